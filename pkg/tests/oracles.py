"""Reference implementations used only by the tests.

Each one computes the same quantity as a library routine by a different
method, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import optimize


def fista_lasso(X, Y, lam, iters=20000):
    """Accelerated proximal gradient on (1/n)||Y - X b||^2 + lam ||b||_1."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    step = n / (2.0 * np.linalg.norm(X, 2) ** 2)
    b = np.zeros(p)
    z = b.copy()
    t = 1.0
    for _ in range(iters):
        g = -2.0 * X.T @ (Y - X @ z) / n
        v = z - step * g
        b_new = np.sign(v) * np.maximum(np.abs(v) - step * lam, 0.0)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        z = b_new + (t - 1) / t_new * (b_new - b)
        b, t = b_new, t_new
    return b


def basis_pursuit_lp(X, Y):
    """min ||b||_1 s.t. X b = Y as a linear program in (b+, b-)."""
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    res = optimize.linprog(
        np.ones(2 * p),
        A_eq=np.hstack([X, -X]),
        b_eq=np.asarray(Y, dtype=float),
        bounds=[(0, None)] * (2 * p),
        method="highs",
    )
    assert res.status == 0
    return res.x[:p] - res.x[p:]


def pair_scan_incoherence(X):
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    best = 0.0
    for i in range(p):
        for j in range(p):
            if i != j:
                best = max(best, abs(float(X[:, i] @ X[:, j])) / n)
    return best


def rip_order2_closed_form(X):
    """delta_2 from the closed-form eigenvalues of every 2x2 Gram block."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    G = X.T @ X / n
    worst = 0.0
    for i, j in itertools.combinations(range(p), 2):
        a, c, b = G[i, i], G[j, j], G[i, j]
        mid = (a + c) / 2
        rad = np.sqrt(((a - c) / 2) ** 2 + b * b)
        worst = max(worst, mid + rad - 1, 1 - (mid - rad))
    return worst


def l1_sphere_grid(d, k):
    """Points on the unit l1 sphere of R^d whose coordinates are multiples of 1/k."""
    if d == 0:
        return np.zeros((1, 0))
    comps = [c for c in itertools.product(range(k + 1), repeat=d - 1) if sum(c) <= k]
    W = np.array([list(c) + [k - sum(c)] for c in comps], dtype=float) / k
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
    return np.unique((signs[:, None, :] * W[None, :, :]).reshape(-1, d), axis=0)


def grid_cone_constant(sigma, S, L, kind, k=40, kr=40):
    """Dense grid minimum of a cone constant over its normalized slice.

    d_S runs over the l1 unit sphere, d_{S^c} = t * R * v with v on the l1 unit
    sphere and t in [0, 1]; R is L, or L sqrt(s) ||d_S||_2 for the adaptive
    cone. Every grid point is feasible, so the result is an upper bound that
    tightens as the grid is refined.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    S = list(S)
    Sc = [j for j in range(p) if j not in S]
    s, m = len(S), len(Sc)
    U = l1_sphere_grid(s, k)
    V = l1_sphere_grid(m, k) if m > 1 else np.array([[1.0], [-1.0]])
    T = np.linspace(0.0, 1.0, kr + 1)
    un = np.linalg.norm(U, axis=1)
    R = L * np.sqrt(s) * un if kind == "adaptive" else np.full(len(U), float(L))
    best = np.inf
    for i, u in enumerate(U):
        off = (T[:, None, None] * R[i] * V[None, :, :]).reshape(-1, m)
        D = np.zeros((off.shape[0], p))
        D[:, S] = u
        D[:, Sc] = off
        q = np.einsum("ij,jk,ik->i", D, sigma, D)
        if kind == "compatibility":
            val = s * q
        elif kind in ("restricted", "adaptive"):
            val = q / un[i] ** 2
        else:
            val = q / np.einsum("ij,ij->i", D, D)
        best = min(best, float(val.min()))
    return best


def uniform_ir_closed_form(sigma, S):
    """theta as the largest row l1 norm of Sigma21 Sigma11^{-1}."""
    sigma = np.asarray(sigma, dtype=float)
    S = list(S)
    Sc = [j for j in range(sigma.shape[0]) if j not in S]
    M = sigma[np.ix_(Sc, S)] @ np.linalg.inv(sigma[np.ix_(S, S)])
    return float(np.abs(M).sum(axis=1).max())


def random_unit_gram(rng, p, rank_extra=2, ridge=0.3):
    """A random correlation matrix (unit diagonal, positive definite)."""
    W = rng.standard_normal((p, p + rank_extra))
    C = W @ W.T + ridge * np.eye(p)
    d = np.sqrt(np.diag(C))
    return C / np.outer(d, d)
