"""Elementary objects: designs, supports, norms, Gram matrices.

Indices are 0-based throughout the Python API. Reports and the CLI print
1-based indices, which is the convention used when talking about "variable 1".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import PreconditionError

DEFAULT_SUPPORT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """An n x p real design. The array is copied and frozen on construction."""

    X: np.ndarray
    names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise PreconditionError(f"design must be a non-empty 2-d array, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise PreconditionError("design contains non-finite entries")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != X.shape[1]:
                raise PreconditionError("number of column names does not match p")
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        return gram(self.X)

    def __repr__(self):
        return f"DesignMatrix(n={self.n}, p={self.p})"


def as_array(X) -> np.ndarray:
    """Return the raw matrix behind ``X`` (a DesignMatrix or anything array-like)."""
    if isinstance(X, DesignMatrix):
        return X.X
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    return A


def as_design(X) -> DesignMatrix:
    return X if isinstance(X, DesignMatrix) else DesignMatrix(X)


@dataclass(frozen=True)
class Support:
    """A strictly increasing set of column indices inside ``range(p)``."""

    indices: tuple[int, ...]
    p: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise PreconditionError(f"support indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.p):
            raise PreconditionError(f"support indices out of range for p={self.p}: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices, p: int) -> "Support":
        return cls(tuple(sorted(set(int(i) for i in indices))), p)

    @classmethod
    def first(cls, s: int, p: int) -> "Support":
        return cls(tuple(range(s)), p)

    @property
    def s(self) -> int:
        return len(self.indices)

    @cached_property
    def complement(self) -> tuple[int, ...]:
        inside = set(self.indices)
        return tuple(j for j in range(self.p) if j not in inside)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.p, dtype=bool)
        m[list(self.indices)] = True
        m.setflags(write=False)
        return m

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.indices]

    def __len__(self):
        return self.s

    def __iter__(self):
        return iter(self.indices)


def as_support(S, p: int) -> Support:
    if isinstance(S, Support):
        if S.p != p:
            raise PreconditionError(f"support built for p={S.p}, used with p={p}")
        return S
    return Support.of(S, p)


class Norms(NamedTuple):
    l0: int
    l1: float
    l2: float
    linf: float


def norms(beta) -> Norms:
    b = np.asarray(beta, dtype=float).ravel()
    if b.size == 0:
        return Norms(0, 0.0, 0.0, 0.0)
    a = np.abs(b)
    return Norms(int(np.count_nonzero(a)), float(a.sum()), float(np.linalg.norm(b)), float(a.max()))


def sign_vector(beta) -> np.ndarray:
    """Entrywise sign with ``sign(0) == 0``, returned as an integer array."""
    return np.sign(np.asarray(beta, dtype=float)).astype(int)


def soft_threshold(x, lam):
    """``sign(x) * max(|x| - lam, 0)``; works elementwise on arrays."""
    if np.any(np.asarray(lam) < 0):
        raise PreconditionError(f"threshold must be nonnegative, got {lam}")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)
    return float(out) if out.ndim == 0 else out


def gram(X) -> np.ndarray:
    """Scaled Gram matrix ``X'X / n``, symmetrized exactly."""
    A = as_array(X)
    G = A.T @ A / A.shape[0]
    return (G + G.T) / 2


class PartitionedGram(NamedTuple):
    sigma11: np.ndarray
    sigma12: np.ndarray
    sigma21: np.ndarray
    sigma22: np.ndarray


def partition_gram(sigma, S) -> PartitionedGram:
    """Split ``sigma`` into the S/S^c blocks, S rows first."""
    sigma = np.asarray(sigma, dtype=float)
    S = as_support(S, sigma.shape[0])
    if S.s == 0 or S.s == S.p:
        raise PreconditionError("partition needs a nonempty proper support")
    a, b = list(S.indices), list(S.complement)
    return PartitionedGram(
        sigma[np.ix_(a, a)], sigma[np.ix_(a, b)], sigma[np.ix_(b, a)], sigma[np.ix_(b, b)]
    )


def support_of(beta, tol: float = DEFAULT_SUPPORT_TOL) -> Support:
    if tol < 0:
        raise PreconditionError("support tolerance must be nonnegative")
    b = np.asarray(beta, dtype=float).ravel()
    return Support(tuple(int(j) for j in np.flatnonzero(np.abs(b) > tol)), b.size)


def numerical_rank_tol(X) -> float:
    A = as_array(X)
    return 1e-10 * float(np.max(np.linalg.norm(A, axis=0), initial=0.0))


def null_space_basis(X) -> np.ndarray:
    """Orthonormal kernel basis of X, one vector per column of the result.

    Uses a column-pivoted QR of X' and declares a pivot zero when it falls below
    ``1e-10`` times the largest column norm of X.
    """
    A = as_array(X)
    n, p = A.shape
    Q, R, _ = linalg.qr(A.T, pivoting=True, mode="full")
    tol = numerical_rank_tol(A)
    diag = np.abs(np.diag(R)) if R.size else np.zeros(0)
    rank = int(np.sum(diag > tol))
    return Q[:, rank:].copy()


def matrix_rank(X) -> int:
    A = as_array(X)
    return A.shape[1] - null_space_basis(A).shape[1]


def check_symmetric(A, what="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError(f"{what} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10 * scale:
        raise PreconditionError(f"{what} is not symmetric")
    return (A + A.T) / 2


def min_eigen(sigma) -> float:
    A = check_symmetric(sigma)
    return float(linalg.eigvalsh(A)[0])


def max_eigen(sigma) -> float:
    A = check_symmetric(sigma)
    return float(linalg.eigvalsh(A)[-1])


def standardize(X) -> np.ndarray:
    """Center columns and scale them to unit mean-square norm.

    Constant columns are left at zero rather than divided by zero.
    """
    A = as_array(X)
    A = A - A.mean(axis=0)
    scale = np.sqrt(np.mean(A**2, axis=0))
    scale[scale == 0] = 1.0
    return A / scale
