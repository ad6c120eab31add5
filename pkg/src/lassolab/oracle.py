"""Oracle inequalities for the Lasso, instantiated and checked on solved problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .conditions import ConeSpec, _jsonable, compatibility_constant, strong_restricted_eigenvalue_at
from .cone import sign_patterns
from .core import DEFAULT_SUPPORT_TOL, Support, as_array, as_support, gram, partition_gram, sign_vector, support_of
from .errors import PreconditionError
from .solver import DEFAULT_OPTIONS, SolverOptions, ols_solve, solve_lasso, solve_noiseless_lasso

BOUND_NAMES = ("slow", "fast", "l1", "l2")
HOLD_TOL = 1e-9


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian noise ``N(0, sigma^2 I)`` with a seed. ``sigma = 0`` means noiseless."""

    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise PreconditionError(f"noise level must be finite and nonnegative, got {self.sigma}")

    def rng(self, rep: int | None = None) -> np.random.Generator:
        """Generator for one replication. Streams are split by replication index."""
        key = () if rep is None else (int(rep),)
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))

    def draw(self, n: int, rep: int | None = None) -> np.ndarray:
        if self.sigma == 0:
            return np.zeros(n)
        return self.sigma * self.rng(rep).standard_normal(n)


@dataclass(frozen=True)
class LambdaRule:
    """``lam = c * lambda_universal(sigma, n, p, tau)``.

    The good event is ``lam >= c * stochastic_term``, i.e.
    ``||eps'X/n||_inf <= sigma * sqrt(tau log p / n)``.
    """

    c: float = 2.0
    tau: float = 3.0

    def __post_init__(self):
        if not self.c > 1:
            raise PreconditionError(f"overrule multiplier c must exceed 1, got {self.c}")
        if not self.tau > 2:
            raise PreconditionError(f"tail exponent tau must exceed 2, got {self.tau}")

    def lam(self, sigma: float, n: int, p: int) -> float:
        return self.c * lambda_universal(sigma, n, p, self.tau)

    @property
    def L(self) -> float:
        return cone_parameter(self.c)


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    theoretical: float
    empirical: float
    holds: bool
    lambda_used: float
    phi_used: float
    applicable: bool = True
    on_good_event: bool = True
    meta: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "bound_name": self.bound_name,
            "theoretical": _jsonable(self.theoretical),
            "empirical": _jsonable(self.empirical),
            "holds": bool(self.holds),
            "lambda_used": _jsonable(self.lambda_used),
            "phi_used": _jsonable(self.phi_used),
            "applicable": bool(self.applicable),
            "on_good_event": bool(self.on_good_event),
            "meta": _jsonable(self.meta),
        }


class Losses(NamedTuple):
    pred: float
    l1: float
    l2sq: float
    selection: int


def lambda_universal(sigma: float, n: int, p: int, tau: float = 2.5) -> float:
    """``2 sigma sqrt(tau log p / n)``."""
    if p < 2:
        raise PreconditionError("p must be at least 2 (log p vanishes at p = 1)")
    if n < 1:
        raise PreconditionError("n must be positive")
    if not tau > 2:
        raise PreconditionError(f"tau must exceed 2, got {tau}")
    if sigma < 0:
        raise PreconditionError("sigma must be nonnegative")
    return 2.0 * sigma * math.sqrt(tau * math.log(p) / n)


def cone_parameter(c: float) -> float:
    if not c > 1:
        raise PreconditionError(f"c must exceed 1, got {c}")
    return (c + 1.0) / (c - 1.0)


def stochastic_term(X, eps) -> float:
    """``2 ||eps' X / n||_inf``."""
    A = as_array(X)
    eps = np.asarray(eps, dtype=float).ravel()
    if eps.shape[0] != A.shape[0]:
        raise PreconditionError("noise vector length does not match n")
    return float(2.0 * np.max(np.abs(eps @ A)) / A.shape[0])


def basic_inequality_check(X, Y, beta_hat, beta0, lam: float) -> bool:
    """The basic inequality comparing the Lasso fit against the truth."""
    A = as_array(X)
    n = A.shape[0]
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    eps = np.asarray(Y, dtype=float) - A @ beta0
    fit = A @ (beta_hat - beta0)
    lhs = fit @ fit / n + lam * np.abs(beta_hat).sum()
    rhs = 2.0 * eps @ fit / n + lam * np.abs(beta0).sum()
    return bool(lhs <= rhs + HOLD_TOL)


def cone_membership(delta, S, L: float) -> bool:
    delta = np.asarray(delta, dtype=float).ravel()
    S = as_support(S, delta.size)
    return bool(np.abs(delta[~S.mask]).sum() <= L * np.abs(delta[S.mask]).sum() + HOLD_TOL)


def losses(X, beta_hat, beta0, support_tol: float = DEFAULT_SUPPORT_TOL) -> Losses:
    A = as_array(X)
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    d = beta_hat - beta0
    fit = A @ d
    clipped = np.where(np.abs(beta_hat) > support_tol, beta_hat, 0.0)
    selection = int(np.any(sign_vector(clipped) != sign_vector(beta0)))
    return Losses(float(fit @ fit / A.shape[0]), float(np.abs(d).sum()), float(d @ d), selection)


def table1_bounds(
    lam: float, s: int, phi_comp_sq: float, phi_str_sq: float, beta0_l1: float, noisy: bool
) -> list[BoundReport]:
    """The four oracle bounds, noiseless or noisy column. ``empirical`` is left NaN."""
    if lam < 0 or s < 0 or beta0_l1 < 0:
        raise PreconditionError("lambda, s and ||beta0||_1 must be nonnegative")
    k_slow, k_fast, k_l1, k_l2 = (1.5, 2.25, 4.0, 2.25) if noisy else (1.0, 1.0, 2.0, 1.0)

    def row(name, value, phi, needs_phi, meta=None):
        ok = (phi > 0) if needs_phi else True
        return BoundReport(
            bound_name=name,
            theoretical=value if ok else math.inf,
            empirical=math.nan,
            holds=False,
            lambda_used=lam,
            phi_used=phi if needs_phi else math.nan,
            applicable=ok,
            meta=meta or {},
        )

    fast_meta = {"alternative": 4 * s * lam**2 / phi_comp_sq} if noisy and phi_comp_sq > 0 else {}
    return [
        row("slow", k_slow * lam * beta0_l1, math.nan, False),
        row("fast", k_fast * lam**2 * s / phi_comp_sq if phi_comp_sq > 0 else math.inf, phi_comp_sq, True, fast_meta),
        row("l1", k_l1 * lam * s / phi_comp_sq if phi_comp_sq > 0 else math.inf, phi_comp_sq, True),
        row("l2", k_l2 * lam**2 * s / phi_str_sq**2 if phi_str_sq > 0 else math.inf, phi_str_sq, True),
    ]


class DesignConstants(NamedTuple):
    """Cone constants at ``S = supp(beta0)`` for one cone opening ``L``."""

    L: float
    phi_comp_sq: float
    phi_str_sq: float


def design_constants(X, S, L: float) -> DesignConstants:
    S = as_support(S, as_array(X).shape[1])
    return DesignConstants(
        L,
        compatibility_constant(X, S, L).value,
        strong_restricted_eigenvalue_at(X, S, L).value,
    )


@dataclass(frozen=True)
class Verification:
    """One solved replication: bounds plus the events they are conditioned on."""

    bounds: list[BoundReport]
    losses: Losses
    lam: float
    stochastic: float
    on_good_event: bool
    cone_L: float
    cone_ok: bool
    basic_ok: bool
    l1_ratio_ok: bool
    noisy: bool
    beta_hat: np.ndarray
    iterations: int
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "bounds": [b.to_dict() for b in self.bounds],
            "losses": self.losses._asdict(),
            "lambda": self.lam,
            "stochastic_term": self.stochastic,
            "on_good_event": self.on_good_event,
            "cone_L": self.cone_L,
            "cone_ok": self.cone_ok,
            "basic_inequality_ok": self.basic_ok,
            "l1_ratio_ok": self.l1_ratio_ok,
            "noisy": self.noisy,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def verify_bounds(
    X,
    beta0,
    noise: NoiseModel = NoiseModel(),
    rule: LambdaRule = LambdaRule(),
    cone: ConeSpec | None = None,
    lam: float | None = None,
    constants: DesignConstants | None = None,
    rep: int | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> Verification:
    """Draw noise, solve, and compare every loss with its oracle bound.

    ``noise.sigma == 0`` selects the noiseless problem: ``lam`` must then be
    given, the cone opening is 1 and the noiseless bound column applies.
    Otherwise ``lam`` defaults to ``rule.lam`` and the cone opening to
    ``(c+1)/(c-1)``. The noisy guarantees only cover the good event
    ``lam >= c * stochastic_term``, which is reported alongside.
    """
    A = as_array(X)
    n, p = A.shape
    beta0 = np.asarray(beta0, dtype=float).ravel()
    if beta0.size != p:
        raise PreconditionError(f"beta0 has length {beta0.size}, design has p={p}")
    S = support_of(beta0, 0.0) if cone is None else as_support(cone.S, p)
    if S.s == 0:
        raise PreconditionError("beta0 must have at least one nonzero entry")
    noisy = noise.sigma > 0
    L = 1.0 if not noisy else rule.L
    if cone is not None:
        L = cone.L
    if lam is None:
        if not noisy:
            raise PreconditionError("the noiseless problem needs an explicit lambda")
        lam = rule.lam(noise.sigma, n, p)
    if not lam > 0:
        raise PreconditionError("lambda must be positive")
    if constants is None or constants.L != L:
        constants = design_constants(A, S, L)

    eps = noise.draw(n, rep)
    Y = A @ beta0 + eps
    sol = solve_lasso(A, Y, lam, opts) if noisy else solve_noiseless_lasso(A, beta0, lam, opts)
    beta_hat = sol.beta
    loss = losses(A, beta_hat, beta0)
    stoch = stochastic_term(A, eps)
    good = (not noisy) or lam >= rule.c * stoch
    l1_ratio = 3.0 if noisy else 1.0
    b0l1 = float(np.abs(beta0).sum())

    empirical = {"slow": loss.pred, "fast": loss.pred, "l1": loss.l1, "l2": loss.l2sq}
    bounds = []
    for b in table1_bounds(lam, S.s, constants.phi_comp_sq, constants.phi_str_sq, b0l1, noisy):
        e = empirical[b.bound_name]
        bounds.append(
            BoundReport(
                b.bound_name,
                b.theoretical,
                e,
                bool(b.applicable and e <= b.theoretical + HOLD_TOL),
                lam,
                b.phi_used,
                b.applicable,
                good,
                b.meta,
            )
        )
    return Verification(
        bounds=bounds,
        losses=loss,
        lam=float(lam),
        stochastic=stoch,
        on_good_event=bool(good),
        cone_L=L,
        cone_ok=cone_membership(beta_hat - beta0, S, L),
        basic_ok=basic_inequality_check(A, Y, beta_hat, beta0, lam),
        l1_ratio_ok=bool(np.abs(beta_hat).sum() <= l1_ratio * b0l1 + HOLD_TOL),
        noisy=noisy,
        beta_hat=beta_hat,
        iterations=sol.iterations,
        converged=sol.converged,
    )


@dataclass(frozen=True)
class RecoveryCheck:
    subset_of_S: bool
    linf_bound: float
    linf_ok: bool
    betamin_threshold: float
    sign_recovered: bool
    weak_ir_at_kkt: float
    weak_ir_at_sign: float
    beta: np.ndarray

    def to_dict(self) -> dict[str, Any]:
        return {k: _jsonable(v) for k, v in self.__dict__.items()}


def support_recovery_check(X, beta0, lam: float, opts: SolverOptions = DEFAULT_OPTIONS) -> RecoveryCheck:
    """Noiseless solve and the selection guarantees that go with it.

    ``linf_bound = lam * max_tau ||Sigma11^{-1} tau||_inf / 2`` over the sign
    vertices. ``weak_ir_at_kkt`` evaluates ``||Sigma21 Sigma11^{-1} tau1||_inf``
    at the subgradient ``tau1`` recovered from the solution's stationarity on
    S; when no variable outside S is selected this cannot exceed 1.
    """
    A = as_array(X)
    beta0 = np.asarray(beta0, dtype=float).ravel()
    p = A.shape[1]
    S = support_of(beta0, 0.0)
    if S.s == 0 or S.s == p:
        raise PreconditionError("beta0 must have a nonempty proper support")
    sigma = gram(A)
    blocks = partition_gram(sigma, S)
    if not np.linalg.eigvalsh(blocks.sigma11)[0] > 1e-10:
        raise PreconditionError("Sigma11 is singular; need Lambda_min(Sigma11) > 0")
    inv11 = np.linalg.inv(blocks.sigma11)
    sup = float(np.max(np.abs(sign_patterns(S.s) @ inv11.T)))
    linf_bound = lam * sup / 2.0

    beta = solve_noiseless_lasso(A, beta0, lam, opts).beta
    found = support_of(beta)
    subset = set(found.indices) <= set(S.indices)
    idx = list(S.indices)
    err = float(np.max(np.abs(beta[idx] - beta0[idx])))
    M = blocks.sigma21 @ inv11
    tau1 = -(2.0 / lam) * (sigma[idx] @ (beta - beta0))
    clipped = np.where(np.abs(beta) > DEFAULT_SUPPORT_TOL, beta, 0.0)
    return RecoveryCheck(
        subset_of_S=bool(subset),
        linf_bound=linf_bound,
        linf_ok=bool(err <= linf_bound + 1e-8),
        betamin_threshold=linf_bound,
        sign_recovered=bool(np.array_equal(sign_vector(clipped), sign_vector(beta0))),
        weak_ir_at_kkt=float(np.max(np.abs(M @ tau1))),
        weak_ir_at_sign=float(np.max(np.abs(M @ np.sign(beta0[idx])))),
        beta=beta,
    )


class OLSCheck(NamedTuple):
    empirical_mean: float
    theoretical: float


def ols_prediction_check(p: int, n: int, sigma: float, reps: int, seed: int = 0) -> OLSCheck:
    """Monte Carlo mean of the OLS prediction loss against ``sigma^2 p / n``."""
    if p >= n:
        raise PreconditionError(f"OLS needs p < n, got p={p}, n={n}")
    if reps < 1:
        raise PreconditionError("reps must be positive")
    if sigma < 0:
        raise PreconditionError("sigma must be nonnegative")
    noise = NoiseModel(sigma, seed)
    X = noise.rng().standard_normal((n, p))
    beta0 = np.ones(p)
    total = 0.0
    for r in range(reps):
        Y = X @ beta0 + noise.draw(n, r)
        d = X @ (ols_solve(X, Y) - beta0)
        total += float(d @ d) / n
    return OLSCheck(total / reps, sigma**2 * p / n)
