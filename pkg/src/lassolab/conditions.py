"""Design-condition constants: MIP, RIP, restricted nullspace, compatibility,
restricted eigenvalues, irrepresentability, beta-min, and the implication
checks that connect them.

Everything here is exact up to solver tolerance but exponential in |S| or in
the number of column subsets, hence the explicit caps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg, optimize

from .cone import MAX_SIGN_BITS, minimize_over_cone, sign_patterns
from .core import (
    Support,
    as_array,
    as_support,
    check_symmetric,
    gram,
    min_eigen,
    null_space_basis,
    partition_gram,
)
from .errors import PreconditionError, RefusalError

DEFAULT_SUBSET_CAP = 100_000
DEGENERACY_CUTOFF = 1e-10


@dataclass(frozen=True)
class ConeSpec:
    """The cone ``{d : ||d_{S^c}||_1 <= L ||d_S||_1}``."""

    S: Support
    L: float

    def __post_init__(self):
        _check_cone(self.S, self.L)


def _cone_args(cone, L, p) -> tuple[Support, float]:
    if isinstance(cone, ConeSpec):
        if L is not None and L != cone.L:
            raise PreconditionError("L given twice with different values")
        S, L = as_support(cone.S, p), cone.L
    else:
        if L is None:
            raise PreconditionError("cone parameter L is required")
        S = as_support(cone, p)
    _check_cone(S, L)
    return S, float(L)


@dataclass(frozen=True)
class ConditionReport:
    name: str
    value: float
    satisfied: bool
    witness: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": _jsonable(self.value),
            "satisfied": bool(self.satisfied),
            "witness": None if self.witness is None else [_jsonable(v) for v in np.asarray(self.witness).tolist()],
            "meta": {k: _jsonable(v) for k, v in self.meta.items()},
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _check_cone(S: Support, L: float):
    if not L > 0:
        raise PreconditionError(f"cone parameter L must be positive, got {L}")
    if S.s == 0 or S.s == S.p:
        raise PreconditionError("cone needs a nonempty proper support")
    if S.s > MAX_SIGN_BITS:
        raise RefusalError(f"|S|={S.s} exceeds the sign-pattern cap of {MAX_SIGN_BITS}")


def _subsets(p: int, s: int, cap: int):
    if not 1 <= s <= p:
        raise PreconditionError(f"subset size must lie in [1, {p}], got {s}")
    count = math.comb(p, s)
    if count > cap:
        raise RefusalError(f"C({p},{s}) = {count} column subsets exceeds the cap of {cap}")
    return itertools.combinations(range(p), s)


def mutual_incoherence(X, s: int = 1) -> ConditionReport:
    """Largest off-diagonal entry of the Gram matrix in absolute value.

    Columns must already be scaled to unit mean-square norm. ``satisfied``
    compares against ``1/(3s)``, the level at which incoherence alone
    guarantees the uniform restricted nullspace property of order ``s``.
    """
    G = gram(X)
    diag = np.diag(G)
    off = np.flatnonzero(np.abs(diag - 1.0) > 1e-8)
    if off.size:
        j = int(off[0])
        raise PreconditionError(
            f"column {j + 1} has mean-square norm {diag[j]:.6g}; standardize columns first"
        )
    p = G.shape[0]
    if p < 2:
        return ConditionReport("mutual_incoherence", 0.0, True, meta={"pair": None, "threshold": 1 / (3 * s)})
    A = np.abs(G)
    np.fill_diagonal(A, -np.inf)
    value = float(A.max())
    # first pair in row-major order among ties, so the witness is stable under rounding
    iu, ju = np.triu_indices(p, 1)
    k = int(np.argmax(A[iu, ju] >= value - 1e-12 * max(value, 1.0)))
    i, j = int(iu[k]), int(ju[k])
    threshold = 1.0 / (3 * s)
    return ConditionReport(
        "mutual_incoherence",
        value,
        value < threshold,
        meta={"pair": [int(i) + 1, int(j) + 1], "threshold": threshold, "s": s},
    )


def rip_constant(X, s: int, subset_cap: int = DEFAULT_SUBSET_CAP) -> ConditionReport:
    """Restricted isometry constant of order ``s`` by exhaustive enumeration.

    ``delta_s = max_T max(lmax(G_T) - 1, 1 - lmin(G_T))`` over all size-s
    column subsets T of the scaled Gram matrix G.
    """
    G = gram(X)
    p = G.shape[0]
    subsets = np.array(list(_subsets(p, s, subset_cap)), dtype=int).reshape(-1, s)
    blocks = G[subsets[:, :, None], subsets[:, None, :]]
    ev = np.linalg.eigvalsh(blocks)
    lo, hi = ev[:, 0], ev[:, -1]
    dev = np.maximum(hi - 1.0, 1.0 - lo)
    k = int(np.argmax(dev))
    witness = np.zeros(p)
    witness[subsets[k]] = 1.0
    value = float(dev[k])
    return ConditionReport(
        "rip_constant",
        value,
        value < 1.0,
        witness=witness,
        meta={
            "order": s,
            "subset": (subsets[k] + 1).tolist(),
            "subset_eigenvalues": [
                [(t + 1).tolist(), float(a), float(b)] for t, a, b in zip(subsets, lo, hi)
            ],
        },
    )


def restricted_nullspace_holds(X, S, L: float | None = None) -> ConditionReport:
    """Decide whether the kernel of X meets the cone C(S, L) only at zero.

    For each sign pattern of the S-block, a linear program finds the kernel
    vector minimizing ``||v_{S^c}||_1`` subject to ``sign * v_S >= 0`` and
    ``sign' v_S = 1``. The property fails exactly when some pattern reaches a
    value ``<= L``. ``value`` is the smallest ratio
    ``||v_{S^c}||_1 / ||v_S||_1`` over the kernel (infinite for a trivial one).
    """
    A = as_array(X)
    p = A.shape[1]
    S, L = _cone_args(S, L, p)
    B = null_space_basis(A)
    k = B.shape[1]
    if k == 0:
        return ConditionReport("restricted_nullspace", math.inf, True, meta={"kernel_dim": 0, "L": L})
    BS = B[list(S.indices)]
    BC = B[list(S.complement)]
    m = BC.shape[0]
    # variables: kernel coordinates c (free), then t >= |B_C c|
    cost = np.concatenate([np.zeros(k), np.ones(m)])
    A_ub = np.block([[BC, -np.eye(m)], [-BC, -np.eye(m)]])
    b_ub = np.zeros(2 * m)
    bounds = [(None, None)] * k + [(0, None)] * m
    best, best_v = math.inf, None
    for sg in sign_patterns(S.s):
        A_sign = np.hstack([-(sg[:, None] * BS), np.zeros((S.s, m))])
        res = optimize.linprog(
            cost,
            A_ub=np.vstack([A_ub, A_sign]),
            b_ub=np.concatenate([b_ub, np.zeros(S.s)]),
            A_eq=np.concatenate([sg @ BS, np.zeros(m)])[None, :],
            b_eq=[1.0],
            bounds=bounds,
            method="highs",
        )
        if res.status == 0 and res.fun < best:
            best = float(res.fun)
            best_v = B @ res.x[:k]
    holds = not best <= L * (1 + 1e-9)
    witness = None
    if best_v is not None and not holds:
        witness = best_v / np.linalg.norm(best_v)
    return ConditionReport(
        "restricted_nullspace",
        best,
        holds,
        witness=witness,
        meta={"kernel_dim": k, "L": L},
    )


def _cone_report(name, X, S, L, kind, **opts) -> ConditionReport:
    G = gram(X)
    S, L = _cone_args(S, L, G.shape[0])
    res = minimize_over_cone(G, S, L, kind, **opts)
    meta = {
        "support": S.one_based(),
        "L": L,
        "iterations": res.iterations,
        "converged": res.converged,
        "sign_patterns": res.patterns,
    }
    if kind == "compatibility":
        meta["normalization"] = "s * (1/n)||X d||^2 / ||d_S||_1^2 (s-scaled)"
    return ConditionReport(name, res.value, res.value > DEGENERACY_CUTOFF, witness=res.witness, meta=meta)


def compatibility_constant(X, S, L: float | None = None, **opts) -> ConditionReport:
    """Squared compatibility constant, scaled by s.

    Minimizes ``s/n ||X d||_2^2`` over ``||d_S||_1 = 1, ||d_{S^c}||_1 <= L``.
    """
    return _cone_report("compatibility", X, S, L, "compatibility", **opts)


def restricted_eigenvalue_at(X, S, L: float | None = None, **opts) -> ConditionReport:
    return _cone_report("restricted_eigenvalue", X, S, L, "restricted", **opts)


def adaptive_restricted_eigenvalue_at(X, S, L: float | None = None, **opts) -> ConditionReport:
    return _cone_report("adaptive_restricted_eigenvalue", X, S, L, "adaptive", **opts)


def strong_restricted_eigenvalue_at(X, S, L: float | None = None, **opts) -> ConditionReport:
    return _cone_report("strong_restricted_eigenvalue", X, S, L, "strong", **opts)


def _over_subsets(at, name, X, s, L, subset_cap, **opts) -> ConditionReport:
    A = as_array(X)
    p = A.shape[1]
    if s >= p:
        raise PreconditionError(f"subset size s={s} leaves no off-support coordinates (p={p})")
    worst = None
    for T in _subsets(p, s, subset_cap):
        rep = at(A, Support(T, p), L, **opts)
        if worst is None or rep.value < worst.value:
            worst = rep
    meta = dict(worst.meta, s=s, subsets=math.comb(p, s))
    return ConditionReport(name, worst.value, worst.satisfied, worst.witness, meta)


def restricted_eigenvalue(X, s: int, L: float, subset_cap: int = DEFAULT_SUBSET_CAP, **opts) -> ConditionReport:
    """Minimum of the (L, S, s) restricted eigenvalue over every |S| = s."""
    return _over_subsets(restricted_eigenvalue_at, "restricted_eigenvalue", X, s, L, subset_cap, **opts)


def adaptive_restricted_eigenvalue(X, s: int, L: float, subset_cap: int = DEFAULT_SUBSET_CAP, **opts) -> ConditionReport:
    return _over_subsets(
        adaptive_restricted_eigenvalue_at, "adaptive_restricted_eigenvalue", X, s, L, subset_cap, **opts
    )


def strong_restricted_eigenvalue(X, s: int, L: float, subset_cap: int = DEFAULT_SUBSET_CAP, **opts) -> ConditionReport:
    return _over_subsets(
        strong_restricted_eigenvalue_at, "strong_restricted_eigenvalue", X, s, L, subset_cap, **opts
    )


def _irrepresentable_map(sigma, S):
    sigma = check_symmetric(sigma, "Gram matrix")
    S = as_support(S, sigma.shape[0])
    blocks = partition_gram(sigma, S)
    lmin = min_eigen(blocks.sigma11)
    if not lmin > 1e-10:
        raise PreconditionError(
            f"Sigma11 is singular (smallest eigenvalue {lmin:.3g}); the active block must satisfy "
            "Lambda_min(Sigma11) > 0"
        )
    # rows: inactive variables; columns: active variables
    return S, blocks, linalg.solve(blocks.sigma11, blocks.sigma12, assume_a="sym").T, lmin


def weak_irrepresentable(sigma, S, tau) -> ConditionReport:
    """``||Sigma21 Sigma11^{-1} tau||_inf`` for one sign vector ``tau`` on S."""
    S, _, M, lmin = _irrepresentable_map(sigma, S)
    tau = np.asarray(tau, dtype=float).ravel()
    if tau.shape[0] != S.s:
        raise PreconditionError(f"tau has length {tau.shape[0]}, support has {S.s} elements")
    if np.max(np.abs(tau)) > 1 + 1e-12:
        raise PreconditionError("tau must lie in the unit l_inf ball")
    v = M @ tau
    value = float(np.max(np.abs(v)))
    return ConditionReport(
        "weak_irrepresentable",
        value,
        value <= 1.0,
        meta={"strict": value < 1.0, "tau": tau.tolist(), "lambda_min_sigma11": lmin},
    )


def uniform_irrepresentable(sigma, S) -> ConditionReport:
    """theta = max over tau in {-1, +1}^s of ``||Sigma21 Sigma11^{-1} tau||_inf``.

    A convex function on the l_inf ball peaks at a vertex, so enumerating the
    sign vectors is exact.
    """
    S, _, M, lmin = _irrepresentable_map(sigma, S)
    taus = sign_patterns(S.s)
    vals = np.max(np.abs(taus @ M.T), axis=1)
    k = int(np.argmax(vals))
    theta = float(vals[k])
    witness = np.zeros(S.p)
    witness[list(S.indices)] = taus[k]
    return ConditionReport(
        "uniform_irrepresentable",
        theta,
        theta < 1.0,
        witness=witness,
        meta={"tau": taus[k].tolist(), "lambda_min_sigma11": lmin},
    )


def beta_min_check(beta0, lam: float, S0=None, phi_comp_sq: float = 1.0) -> ConditionReport:
    """Check ``min_{j in S0} |beta0_j| >= 4 lam s0 / phi_comp_sq``."""
    beta0 = np.asarray(beta0, dtype=float)
    if S0 is None:
        S0 = Support(tuple(np.flatnonzero(beta0)), beta0.size)
    S0 = as_support(S0, beta0.size)
    if S0.s == 0:
        raise PreconditionError("beta-min needs a nonempty active set")
    if not phi_comp_sq > 0:
        raise PreconditionError("compatibility constant must be positive")
    value = float(np.min(np.abs(beta0[list(S0.indices)])))
    threshold = 4.0 * lam * S0.s / phi_comp_sq
    return ConditionReport("beta_min", value, value >= threshold, meta={"threshold": threshold, "s0": S0.s})


def implication_checks(X, s: int, L: float, S=None, subset_cap: int = DEFAULT_SUBSET_CAP, **opts) -> list[ConditionReport]:
    """Evaluate the three routes to the nullspace / compatibility properties.

    ``rip_route``
        satisfied iff ``delta_{2s} < 1/3``. When ``2s > p`` the largest
        available order ``p`` is used and recorded in ``meta["order"]``.
    ``mip_route``
        satisfied iff ``M(X) < 1/(3s)``.
    ``ir_route``
        on ``S`` (default: the first ``s`` columns), applicable when
        ``theta < 1/L``; then reports the lower bound
        ``(1 - L theta)^2 Lambda_min(Sigma11)^2`` and is satisfied iff the
        computed compatibility constant is at least that bound (minus 1e-8).
    """
    A = as_array(X)
    p = A.shape[1]
    order = min(2 * s, p)
    rip = rip_constant(A, order, subset_cap)
    rip_route = ConditionReport(
        "rip_route",
        rip.value,
        rip.value < 1.0 / 3.0,
        witness=rip.witness,
        meta={"order": order, "threshold": 1.0 / 3.0, "requested_order": 2 * s},
    )
    mip = mutual_incoherence(A, s)
    mip_route = ConditionReport("mip_route", mip.value, mip.satisfied, meta=dict(mip.meta))

    S = Support.first(s, p) if S is None else as_support(S, p)
    G = gram(A)
    ir = uniform_irrepresentable(G, S)
    theta = ir.value
    lmin = ir.meta["lambda_min_sigma11"]
    meta = {"theta": theta, "L": L, "lambda_min_sigma11": lmin, "support": S.one_based()}
    if theta < 1.0 / L:
        bound = (1.0 - L * theta) ** 2 * lmin**2
        comp = compatibility_constant(A, S, L, **opts)
        meta.update(applicable=True, compatibility=comp.value)
        ir_route = ConditionReport("ir_route", bound, comp.value >= bound - 1e-8, witness=comp.witness, meta=meta)
    else:
        meta.update(applicable=False)
        ir_route = ConditionReport("ir_route", math.nan, False, meta=meta)
    return [rip_route, mip_route, ir_route]
