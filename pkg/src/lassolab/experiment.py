"""Monte Carlo runner: one design, many noise draws, aggregate bound checks."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import conditions
from .core import DesignMatrix, as_array, gram, standardize, support_of
from .designs import DesignSpec, generate_design
from .errors import ConvergenceError, LassoLabError, PreconditionError
from .oracle import BOUND_NAMES, DesignConstants, LambdaRule, NoiseModel, verify_bounds

SCHEMA_VERSION = "1.0"


def report_schema() -> dict:
    """The JSON schema every report validates against."""
    return json.loads(resources.files("lassolab").joinpath("schemas/report.schema.json").read_text())


@dataclass(frozen=True)
class SparseSpec:
    """beta0 with support ``{0, ..., s-1}``, equal magnitudes, optional signs."""

    s: int
    magnitude: float = 1.0
    signs: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.s < 1:
            raise PreconditionError("sparse spec needs s >= 1")
        if not self.magnitude > 0:
            raise PreconditionError("magnitude must be positive")
        if self.signs is not None:
            if len(self.signs) != self.s or any(v not in (-1, 1) for v in self.signs):
                raise PreconditionError("signs must be s entries from {-1, +1}")

    def vector(self, p: int) -> np.ndarray:
        if self.s > p:
            raise PreconditionError(f"sparsity s={self.s} exceeds p={p}")
        b = np.zeros(p)
        b[: self.s] = self.magnitude * (np.ones(self.s) if self.signs is None else np.array(self.signs, dtype=float))
        return b


@dataclass(frozen=True)
class ExperimentConfig:
    design: DesignSpec | None
    beta0: SparseSpec | tuple[float, ...]
    noise: NoiseModel = NoiseModel()
    rule: LambdaRule = LambdaRule()
    reps: int = 100
    lam: float | None = None
    standardize: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise PreconditionError("reps must be at least 1")

    def to_dict(self) -> dict:
        beta = (
            {"s": self.beta0.s, "magnitude": self.beta0.magnitude, "signs": self.beta0.signs}
            if isinstance(self.beta0, SparseSpec)
            else [float(v) for v in self.beta0]
        )
        return {
            "design": None if self.design is None else self.design.to_dict(),
            "beta0": beta,
            "noise": {"sigma": self.noise.sigma, "seed": self.noise.seed},
            "rule": {"c": self.rule.c, "tau": self.rule.tau},
            "reps": self.reps,
            "lambda": self.lam,
            "standardize": self.standardize,
        }


def design_summary(X) -> dict:
    A = as_array(X)
    G = gram(A)
    w = np.linalg.eigvalsh(G)
    return {
        "n": int(A.shape[0]),
        "p": int(A.shape[1]),
        "gram_min_eigenvalue": float(w[0]),
        "gram_max_eigenvalue": float(w[-1]),
        "unit_diagonal": bool(np.all(np.abs(np.diag(G) - 1) <= 1e-8)),
    }


def _condition_reports(A, S, L) -> list[conditions.ConditionReport]:
    reps = [conditions.compatibility_constant(A, S, L), conditions.strong_restricted_eigenvalue_at(A, S, L)]
    G = gram(A)
    if np.all(np.abs(np.diag(G) - 1) <= 1e-8):
        reps.append(conditions.mutual_incoherence(A, S.s))
    try:
        reps.append(conditions.uniform_irrepresentable(G, S))
    except PreconditionError:
        pass  # singular active block: the condition is undefined here
    return reps


def _freq(flags) -> float | None:
    flags = list(flags)
    return None if not flags else float(np.mean(flags))


def run_experiment(config: ExperimentConfig, X: DesignMatrix | None = None) -> dict:
    """Run ``config.reps`` replications and return a JSON-ready report.

    The design is either generated from ``config.design`` or passed in as
    ``X``. Condition constants are computed once. Replication ``r`` draws its
    noise from the stream ``SeedSequence(seed, spawn_key=(r,))``, so the report
    depends only on the configuration.
    """
    if X is None:
        if config.design is None:
            raise PreconditionError("either a design spec or a design matrix is required")
        X = generate_design(config.design)
    A = as_array(X)
    if config.standardize:
        A = standardize(A)
    p = A.shape[1]
    beta0 = config.beta0.vector(p) if isinstance(config.beta0, SparseSpec) else np.asarray(config.beta0, dtype=float)
    if beta0.size != p:
        raise PreconditionError(f"beta0 has length {beta0.size}, design has p={p}")
    S = support_of(beta0, 0.0)
    if S.s == 0 or S.s == p:
        raise PreconditionError("beta0 must have a nonempty proper support")
    noisy = config.noise.sigma > 0
    L = config.rule.L if noisy else 1.0

    creps = _condition_reports(A, S, L)
    consts = DesignConstants(L, creps[0].value, creps[1].value)

    runs = []
    bound_rows = []
    for r in range(config.reps):
        try:
            v = verify_bounds(A, beta0, config.noise, config.rule, lam=config.lam, constants=consts, rep=r)
        except LassoLabError as exc:
            raise type(exc)(f"replication {r}: {exc}") from exc
        if not v.converged:
            raise ConvergenceError(f"replication {r}: coordinate descent did not converge")
        runs.append(v)
        for b in v.bounds:
            row = b.to_dict()
            row["replication"] = r
            bound_rows.append(row)

    good = [v.on_good_event for v in runs]
    on_good = [v for v in runs if v.on_good_event]
    hold = {name: _freq(b.holds for v in runs for b in v.bounds if b.bound_name == name) for name in BOUND_NAMES}
    hold_good = {
        name: _freq(b.holds for v in on_good for b in v.bounds if b.bound_name == name) for name in BOUND_NAMES
    }
    aggregates = {
        "reps": config.reps,
        "lambda": runs[0].lam,
        "cone_L": L,
        "noisy": noisy,
        "good_event_count": int(sum(good)),
        "good_event_frequency": float(np.mean(good)),
        "hold_frequency": hold,
        "hold_frequency_on_good_event": hold_good,
        "cone_frequency_on_good_event": _freq(v.cone_ok for v in on_good),
        "basic_inequality_frequency": _freq(v.basic_ok for v in runs),
        "l1_ratio_frequency_on_good_event": _freq(v.l1_ratio_ok for v in on_good),
        "mean_losses": {k: float(np.mean([getattr(v.losses, k) for v in runs])) for k in ("pred", "l1", "l2sq", "selection")},
    }
    replications = [
        {
            "replication": r,
            "lambda": v.lam,
            "stochastic_term": v.stochastic,
            "on_good_event": v.on_good_event,
            "cone_ok": v.cone_ok,
            "basic_inequality_ok": v.basic_ok,
            "losses": v.losses._asdict(),
        }
        for r, v in enumerate(runs)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "config": config.to_dict(),
        "design_summary": design_summary(A),
        "condition_reports": [c.to_dict() for c in creps],
        "bound_reports": bound_rows,
        "aggregates": aggregates,
        "results": {"replications": replications},
    }
