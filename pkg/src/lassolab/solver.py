"""Lasso, noiseless Lasso and basis pursuit by cyclic coordinate descent.

Every solver here minimizes

    (1/n) * ||Y - X beta||_2^2 + lam * ||beta||_1

including the noiseless problem, whose response is simply ``Y = X beta0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import as_array
from .errors import ConvergenceError, InfeasibleError, PreconditionError


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 100_000
    tol: float = 1e-10
    kkt_tol: float = 1e-7

    def __post_init__(self):
        if self.max_iters <= 0 or self.tol <= 0 or self.kkt_tol <= 0:
            raise PreconditionError("solver options must all be positive")


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class LassoSolution:
    beta: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    lam: float
    # objective after each sweep, in order
    trace: tuple[float, ...] = field(default=(), repr=False)


class KKTReport(NamedTuple):
    max_inactive_violation: float
    max_active_violation: float
    satisfied: bool


def lasso_objective(X, Y, beta, lam) -> float:
    A = as_array(X)
    r = np.asarray(Y, dtype=float) - A @ np.asarray(beta, dtype=float)
    return float(r @ r / A.shape[0] + lam * np.abs(beta).sum())


def kkt_report(X, Y, beta, lam, kkt_tol: float = DEFAULT_OPTIONS.kkt_tol) -> KKTReport:
    """Check the stationarity system ``(2/n) X'(Y - X beta) = lam * tau``."""
    A = as_array(X)
    beta = np.asarray(beta, dtype=float)
    grad = 2.0 * A.T @ (np.asarray(Y, dtype=float) - A @ beta) / A.shape[0]
    active = beta != 0
    inactive = np.maximum(np.abs(grad[~active]) - lam, 0.0)
    act = np.abs(grad[active] - lam * np.sign(beta[active]))
    vi = float(inactive.max(initial=0.0))
    va = float(act.max(initial=0.0))
    return KKTReport(vi, va, vi <= kkt_tol and va <= kkt_tol)


def _check_problem(A, Y, lam):
    Y = np.asarray(Y, dtype=float).ravel()
    if Y.shape[0] != A.shape[0]:
        raise PreconditionError(f"response has length {Y.shape[0]}, design has n={A.shape[0]}")
    if not np.all(np.isfinite(Y)):
        raise PreconditionError("response contains non-finite entries")
    if not lam >= 0:
        raise PreconditionError(f"lambda must be nonnegative, got {lam}")
    return Y


def solve_lasso(X, Y, lam: float, opts: SolverOptions = DEFAULT_OPTIONS, beta_init=None) -> LassoSolution:
    """Cyclic coordinate descent with an active-set inner loop.

    A full sweep visits every nonzero column in ascending order. Between full
    sweeps, the loop cycles over the current nonzero coordinates only, until
    their largest update drops below ``opts.tol``. The run stops when a full
    sweep moves no coordinate by more than ``opts.tol``.

    Columns that are identically zero keep a zero coefficient and are skipped.
    Hitting ``opts.max_iters`` sweeps returns the current iterate with
    ``converged=False``.
    """
    A = as_array(X)
    Y = _check_problem(A, Y, lam)
    n, p = A.shape
    Xf = np.asfortranarray(A)
    col_sq = np.einsum("ij,ij->j", A, A)
    usable = np.flatnonzero(col_sq > 0)
    cols = [Xf[:, j] for j in range(p)]
    thresh = n * lam / 2.0

    beta = np.zeros(p) if beta_init is None else np.array(beta_init, dtype=float)
    beta[col_sq == 0] = 0.0
    r = Y - A @ beta

    def sweep(idx):
        biggest = 0.0
        for j in idx:
            xj = cols[j]
            cs = col_sq[j]
            old = beta[j]
            z = old * cs + float(xj @ r)
            mag = abs(z) - thresh
            new = math.copysign(mag / cs, z) if mag > 0 else 0.0
            if new != old:
                np.subtract(r, xj * (new - old), out=r)
                beta[j] = new
                d = abs(new - old)
                if d > biggest:
                    biggest = d
        return biggest

    def objective():
        return float(r @ r / n + lam * np.abs(beta).sum())

    trace = []
    iters = 0
    converged = False
    while iters < opts.max_iters:
        change = sweep(usable)
        iters += 1
        trace.append(objective())
        if change <= opts.tol:
            converged = True
            break
        while iters < opts.max_iters:
            active = usable[beta[usable] != 0]
            change = sweep(active)
            iters += 1
            trace.append(objective())
            if change <= opts.tol:
                break

    # fresh residual so the reported objective does not carry drift
    r = Y - A @ beta
    kkt = kkt_report(A, Y, beta, lam, opts.kkt_tol)
    return LassoSolution(
        beta=beta,
        objective=float(r @ r / n + lam * np.abs(beta).sum()),
        kkt_residual=max(kkt.max_inactive_violation, kkt.max_active_violation),
        iterations=iters,
        converged=converged,
        lam=float(lam),
        trace=tuple(trace),
    )


def solve_noiseless_lasso(X, beta0, lam: float, opts: SolverOptions = DEFAULT_OPTIONS) -> LassoSolution:
    if not lam > 0:
        raise PreconditionError("the noiseless Lasso needs lambda > 0")
    A = as_array(X)
    beta0 = np.asarray(beta0, dtype=float)
    return solve_lasso(A, A @ beta0, lam, opts)


def _polish(A, Y, beta):
    """Least-squares refit on the support of ``beta``; None if signs change."""
    T = np.flatnonzero(beta)
    if T.size == 0:
        return None
    coef, *_ = np.linalg.lstsq(A[:, T], Y, rcond=None)
    if np.any(np.sign(coef) != np.sign(beta[T])):
        return None
    out = np.zeros_like(beta)
    out[T] = coef
    return out


def solve_bplp(X, Y, opts: SolverOptions = DEFAULT_OPTIONS, max_stages: int = 80) -> np.ndarray:
    """Minimum l1-norm solution of ``X beta = Y`` by lambda continuation.

    Starts at ``lam = ||2 X'Y / n||_inf`` (where zero is optimal), halves lambda
    per stage and warm-starts each Lasso solve. After every stage the iterate is
    refit by least squares on its support; the refit is kept when it preserves
    the signs. The loop ends once the candidate is feasible and its l1 norm has
    moved by less than 1e-9 since the previous stage.
    """
    A = as_array(X)
    Y = _check_problem(A, Y, 0.0)
    n, _ = A.shape
    ynorm = float(np.linalg.norm(Y))
    ls, *_ = np.linalg.lstsq(A, Y, rcond=None)
    if np.linalg.norm(A @ ls - Y) > 1e-8 * (1 + ynorm):
        raise InfeasibleError("response is not in the column span of the design")
    feas_tol = 1e-6 * (1 + ynorm)

    lam = float(np.max(np.abs(2 * A.T @ Y / n), initial=0.0))
    if lam == 0:
        return np.zeros(A.shape[1])
    beta = np.zeros(A.shape[1])
    prev_l1 = None
    for _ in range(max_stages):
        lam *= 0.5
        beta = solve_lasso(A, Y, lam, opts, beta_init=beta).beta
        cand = _polish(A, Y, beta)
        if cand is None or np.linalg.norm(A @ cand - Y) > feas_tol:
            cand = beta
        l1 = float(np.abs(cand).sum())
        feasible = np.linalg.norm(A @ cand - Y) <= feas_tol
        if feasible and prev_l1 is not None and abs(l1 - prev_l1) < 1e-9:
            return cand
        prev_l1 = l1
    raise ConvergenceError("basis pursuit continuation did not reach a stable feasible point")


def ols_solve(X, Y) -> np.ndarray:
    A = as_array(X)
    Y = _check_problem(A, Y, 0.0)
    n, p = A.shape
    if p > n:
        raise PreconditionError(f"OLS needs p <= n, got p={p}, n={n}")
    Q, R = np.linalg.qr(A)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-10 * max(d.max(), 1.0):
        raise PreconditionError("design is rank deficient")
    return np.linalg.solve(R, Q.T @ Y)

