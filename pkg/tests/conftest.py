import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lassolab.designs import DesignSpec, equicorrelated_gram, generate_design  # noqa: E402

_CRITERIA = pytest.StashKey[list]()


def star_design(rho, p=5):
    """Design whose Gram is the identity plus a last variable correlated rho with the rest."""
    return generate_design(DesignSpec("equicorrelated", p=p, rho=rho)).X


def star_gram(rho, p=5):
    return equicorrelated_gram(p, rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Context manager that records a PASS/FAIL line for one acceptance criterion."""
    log = request.config.stash[_CRITERIA]

    @contextmanager
    def run(label):
        try:
            yield
        except BaseException as exc:
            line = f"FAIL  {label}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            log.append(line)
            print(line)
            raise
        line = f"PASS  {label}"
        log.append(line)
        print(line)

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
