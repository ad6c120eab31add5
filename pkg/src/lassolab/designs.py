"""Design-matrix families used by the experiments."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import DesignMatrix
from .errors import PreconditionError

FAMILIES = ("identity", "orthonormal", "equicorrelated", "toeplitz", "example1", "example2", "gaussian")


@dataclass(frozen=True)
class DesignSpec:
    """Which family to draw from and its parameters.

    ``n`` is ignored by the families that realize a Gram matrix through its
    square root (identity, equicorrelated, toeplitz), which always use n = p.
    """

    family: str
    p: int = 2
    n: int | None = None
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"unknown design family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.family not in ("example1", "example2") and self.p < 1:
            raise PreconditionError("p must be positive")
        if self.n is not None and self.n < 1:
            raise PreconditionError("n must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def equicorrelated_gram(p: int, rho: float) -> np.ndarray:
    """Identity, except the last variable has correlation ``rho`` with every other one."""
    if p < 2:
        raise PreconditionError("the equicorrelated family needs p >= 2")
    G = np.eye(p)
    G[:-1, -1] = G[-1, :-1] = rho
    return G


def toeplitz_gram(p: int, rho: float) -> np.ndarray:
    if not abs(rho) < 1:
        raise PreconditionError(f"toeplitz family needs |rho| < 1, got {rho}")
    i = np.arange(p)
    return rho ** np.abs(i[:, None] - i[None, :]).astype(float)


def design_from_gram(G: np.ndarray) -> np.ndarray:
    """A p x p design whose scaled Gram matrix is ``G``: ``sqrt(p) * G^{1/2}``."""
    w, V = np.linalg.eigh(G)
    if w[0] < -1e-12 * max(1.0, abs(w[-1])):
        raise PreconditionError(f"target Gram matrix is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    root = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return np.sqrt(G.shape[0]) * (root + root.T) / 2


def generate_design(spec: DesignSpec) -> DesignMatrix:
    p, fam = spec.p, spec.family
    if fam == "example1":
        return DesignMatrix(np.array([[1.0, 2.0]]))
    if fam == "example2":
        return DesignMatrix(np.array([[2.0, 1.0]]))
    if fam == "identity":
        return DesignMatrix(np.sqrt(p) * np.eye(p))
    if fam == "equicorrelated":
        if (p - 1) * spec.rho**2 > 1 + 1e-12:
            raise PreconditionError(
                f"equicorrelated Gram with p={p}, rho={spec.rho} is not positive semidefinite; "
                f"need (p-1) rho^2 <= 1"
            )
        return DesignMatrix(design_from_gram(equicorrelated_gram(p, spec.rho)))
    if fam == "toeplitz":
        return DesignMatrix(design_from_gram(toeplitz_gram(p, spec.rho)))

    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n = spec.n if spec.n is not None else p
    if fam == "orthonormal":
        if n < p:
            raise PreconditionError(f"orthonormal family needs n >= p, got n={n}, p={p}")
        Q, R = np.linalg.qr(rng.standard_normal((n, p)))
        Q = Q * np.sign(np.diag(R))
        return DesignMatrix(np.sqrt(n) * Q)
    # gaussian
    Z = rng.standard_normal((n, p))
    scale = np.sqrt(np.mean(Z**2, axis=0))
    return DesignMatrix(Z / scale)
