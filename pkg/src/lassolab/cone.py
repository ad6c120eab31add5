"""Minimization of quadratic ratios over l1 cones.

All design constants built on the cone

    C(S, L) = {d : ||d_{S^c}||_1 <= L ||d_S||_1}

are minima of ``d' Sigma d`` over a normalized slice of the cone, possibly
divided by a second quadratic. The S-block is handled by enumerating sign
patterns: within the orthant ``d_S = sign * u`` with ``u >= 0``, the l1 norm
of ``d_S`` is linear and the slice becomes convex. The off-support block is
split as ``d_{S^c} = a - b`` with ``a, b >= 0``.

Kinds
-----
``"compatibility"``
    ``s * d' Sigma d`` with ``sum(u) = 1`` and ``sum(a + b) <= L``. Convex per
    pattern, so one start is enough.
``"restricted"``
    ``d' Sigma d / ||d_S||_2^2`` on the same slice.
``"strong"``
    ``d' Sigma d / ||d||_2^2`` on the same slice.
``"adaptive"``
    ``d' Sigma d`` with ``||u||_2 = 1`` and ``sum(a + b) <= L sqrt(s)``.

The last three are not convex; they are solved from several starts per
pattern, including the compatibility minimizer of that pattern, and the best
local minimum is reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Support
from .errors import PreconditionError, RefusalError

KINDS = ("compatibility", "restricted", "strong", "adaptive")
MAX_SIGN_BITS = 20


@dataclass(frozen=True)
class ConeResult:
    value: float
    witness: np.ndarray
    iterations: int
    converged: bool
    patterns: int


def sign_patterns(s: int) -> np.ndarray:
    """Sign vectors with a leading +1.

    Every objective here is even in ``d``, so ``sign`` and ``-sign`` give the
    same minimum and half of the ``2**s`` patterns suffice.
    """
    if s > MAX_SIGN_BITS:
        raise RefusalError(f"|S|={s} exceeds the sign-pattern cap of {MAX_SIGN_BITS}")
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=s - 1)), dtype=float).reshape(2 ** (s - 1), s - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


def project_simplex(V: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Row-wise Euclidean projection onto ``{x >= 0, sum(x) = radius}``."""
    V = np.atleast_2d(V)
    k = V.shape[1]
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - radius
    ind = np.arange(1, k + 1)
    cond = U - css / ind > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(V.shape[0]), rho] / (rho + 1)
    return np.maximum(V - theta[:, None], 0.0)


def project_capped(V: np.ndarray, radius: float) -> np.ndarray:
    """Row-wise projection onto ``{x >= 0, sum(x) <= radius}``."""
    P = np.maximum(V, 0.0)
    over = P.sum(axis=1) > radius
    if np.any(over):
        P[over] = project_simplex(V[over], radius)
    return P


def project_sphere_orthant(V: np.ndarray) -> np.ndarray:
    """Row-wise projection onto ``{x >= 0, ||x||_2 = 1}``."""
    P = np.maximum(V, 0.0)
    nrm = np.linalg.norm(P, axis=1)
    bad = nrm == 0
    out = np.empty_like(P)
    out[~bad] = P[~bad] / nrm[~bad, None]
    if np.any(bad):
        out[bad] = 0.0
        out[bad, np.argmax(V[bad], axis=1)] = 1.0
    return out


class _Slice:
    """Objective, gradient and projection for one (Sigma, S, L, kind)."""

    def __init__(self, sigma, S: Support, L: float, kind: str):
        self.kind = kind
        self.S = np.array(S.indices)
        self.Sc = np.array(S.complement)
        self.s = S.s
        self.m = len(self.Sc)
        self.p = S.p
        self.sigma = sigma
        self.radius = L * np.sqrt(self.s) if kind == "adaptive" else L

    def delta(self, signs, x):
        s, m = self.s, self.m
        D = np.zeros((x.shape[0], self.p))
        D[:, self.S] = signs * x[:, :s]
        D[:, self.Sc] = x[:, s : s + m] - x[:, s + m :]
        return D

    def value_grad(self, signs, x, need_grad=True):
        s, m = self.s, self.m
        D = self.delta(signs, x)
        SD = D @ self.sigma
        N = np.einsum("ij,ij->i", D, SD)
        gN = 2.0 * SD
        if self.kind == "compatibility":
            den, gden = np.full_like(N, 1.0 / s), None
        elif self.kind == "adaptive":
            den, gden = np.ones_like(N), None
        elif self.kind == "restricted":
            den = np.einsum("ij,ij->i", x[:, :s], x[:, :s])
            gden = np.zeros_like(D)
            gden[:, self.S] = 2.0 * D[:, self.S]
        else:
            den = np.einsum("ij,ij->i", D, D)
            gden = 2.0 * D
        f = N / den
        if not need_grad:
            return f, None
        gD = gN if gden is None else gN - f[:, None] * gden
        gD = gD / den[:, None]
        g = np.empty_like(x)
        g[:, :s] = signs * gD[:, self.S]
        g[:, s : s + m] = gD[:, self.Sc]
        g[:, s + m :] = -gD[:, self.Sc]
        return f, g

    def project(self, x):
        s = self.s
        out = np.empty_like(x)
        if self.kind == "adaptive":
            out[:, :s] = project_sphere_orthant(x[:, :s])
        else:
            out[:, :s] = project_simplex(x[:, :s])
        out[:, s:] = project_capped(x[:, s:], self.radius)
        return out


def _pgd(sl: _Slice, signs, x0, max_iter, rel_tol, f_floor=0.0):
    """Batched projected gradient with per-row backtracking.

    Each row starts its line search from the Barzilai-Borwein step of its last
    move and halves it until the usual sufficient-decrease test passes, so the
    objective never increases. A row stops when its objective changes by less
    than ``rel_tol`` relative to ``max(|f|, f_floor)``.
    """
    x = sl.project(x0)
    f, g = sl.value_grad(signs, x)
    step = np.ones(x.shape[0])
    live = np.arange(x.shape[0])
    iters = 0
    while live.size and iters < max_iter:
        iters += 1
        xs, fs, gs, ts, sg = x[live], f[live], g[live], step[live], signs[live]
        pending = np.arange(live.size)
        xn = np.empty_like(xs)
        fn = np.empty_like(fs)
        for _ in range(60):
            cand = sl.project(xs[pending] - ts[pending, None] * gs[pending])
            fc, _ = sl.value_grad(sg[pending], cand, need_grad=False)
            d = cand - xs[pending]
            model = fs[pending] + np.einsum("ij,ij->i", gs[pending], d) + np.einsum("ij,ij->i", d, d) / (2 * ts[pending])
            ok = fc <= model + 1e-15 * np.abs(fs[pending])
            xn[pending[ok]] = cand[ok]
            fn[pending[ok]] = fc[ok]
            pending = pending[~ok]
            if not pending.size:
                break
            ts[pending] *= 0.5
        if pending.size:
            # step collapsed: keep the old point for these rows
            xn[pending] = xs[pending]
            fn[pending] = fs[pending]
        change = np.abs(fs - fn)
        done = (change <= rel_tol * np.maximum(np.abs(fs), f_floor)) | (change == 0)
        x[live] = xn
        f[live] = fn
        keep = live[~done]
        if keep.size:
            _, gk = sl.value_grad(signs[keep], x[keep])
            kk = ~done
            dx = xn[kk] - xs[kk]
            dg = gk - gs[kk]
            sy = np.einsum("ij,ij->i", dx, dg)
            ss = np.einsum("ij,ij->i", dx, dx)
            bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), ts[kk] * 2.0)
            step[keep] = np.clip(bb, 1e-12, 1e12)
            g[keep] = gk
        live = keep
    return x, f, iters, live.size == 0


def minimize_over_cone(
    sigma,
    S: Support,
    L: float,
    kind: str = "compatibility",
    max_iter: int = 50_000,
    rel_tol: float = 1e-10,
    random_starts: int = 4,
    seed: int = 0,
) -> ConeResult:
    if kind not in KINDS:
        raise PreconditionError(f"unknown cone objective {kind!r}")
    if not L > 0:
        raise PreconditionError("cone parameter L must be positive")
    if S.s == 0 or S.s == S.p:
        raise PreconditionError("cone needs a nonempty proper support")
    sigma = np.asarray(sigma, dtype=float)
    sl = _Slice(sigma, S, L, kind)
    s, m = sl.s, sl.m
    pats = sign_patterns(s)
    k = pats.shape[0]

    comp = _Slice(sigma, S, L, "compatibility")
    x0 = np.zeros((k, s + 2 * m))
    x0[:, :s] = 1.0 / s
    # near a zero minimum, stop once changes reach rounding level of the Gram scale
    floor = 1e-6 * max(float(np.max(np.abs(np.diag(sigma)))), 1e-300)
    xc, fc, it_c, ok_c = _pgd(comp, pats, x0, max_iter, rel_tol, floor)
    if kind == "compatibility":
        best = int(np.argmin(fc))
        return ConeResult(float(fc[best]), comp.delta(pats[best : best + 1], xc[best : best + 1])[0], it_c, ok_c, k)

    rng = np.random.default_rng(seed)
    starts = [xc]
    for j in range(s):
        v = np.zeros((k, s + 2 * m))
        v[:, j] = 1.0
        starts.append(v)
    for _ in range(random_starts):
        v = np.zeros((k, s + 2 * m))
        v[:, :s] = rng.dirichlet(np.ones(s), size=k)
        v[:, s:] = rng.exponential(size=(k, 2 * m)) * sl.radius / (2 * m)
        starts.append(v)
    X0 = np.vstack(starts)
    if kind == "adaptive":
        # scaling a point of the l1 slice by 1/||u||_2 lands inside the adaptive slice
        X0 /= np.linalg.norm(X0[:, :s], axis=1, keepdims=True)
    signs = np.tile(pats, (len(starts), 1))
    x, f, it, ok = _pgd(sl, signs, X0, max_iter, rel_tol, floor)
    best = int(np.argmin(f))
    witness = sl.delta(signs[best : best + 1], x[best : best + 1])[0]
    return ConeResult(float(f[best]), witness, it + it_c, ok and ok_c, k)
