# Maximize w^T Q w + g^T w over the unit sphere ||w|| = 1.
#
# Q is symmetric but may be indefinite. The global maximizer satisfies
# (mu I - Q) w = g / 2 with mu >= lambda_max(Q); in the eigenbasis of Q this
# becomes the secular equation sum_i (g_i / 2)^2 / (mu - lambda_i)^2 = 1,
# solved for mu by a bracketed root search. When g has no weight on the top
# eigenspace the "hard case" may apply and the remaining norm is put on the
# top eigenvector.
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

EIG_RTOL = 1e-12
HARD_CASE_TOL = 1e-14


def sphere_quadratic_value(q: np.ndarray, g: np.ndarray, w: np.ndarray) -> float:
    return float(w @ q @ w + g @ w)


def _oriented(v: np.ndarray, w_ref: np.ndarray | None) -> np.ndarray:
    if w_ref is not None and float(v @ w_ref) < 0:
        return -v
    return v


def solve_sphere_quadratic(q, g, w_ref: np.ndarray | None = None) -> np.ndarray:
    """Global maximizer of w^T Q w + g^T w subject to ||w|| = 1.

    `w_ref` only resolves the sign of otherwise sign-ambiguous solutions (g on
    the top eigenspace vanishing); the returned vector then has w . w_ref >= 0.
    """
    q = np.asarray(q, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    q = 0.5 * (q + q.T)
    n = g.size

    lam, vecs = np.linalg.eigh(q)
    scale = max(float(np.max(np.abs(lam))), float(np.linalg.norm(g)))
    if scale == 0.0 or not np.isfinite(scale):
        if w_ref is not None and np.linalg.norm(w_ref) > 0:
            return w_ref / np.linalg.norm(w_ref)
        e = np.zeros(n)
        e[0] = 1.0
        return e
    # The maximizer is invariant to a positive rescaling of the objective.
    lam = lam / scale
    gv = 0.5 * (vecs.T @ g) / scale

    lam_max = lam[-1]
    top = lam >= lam_max - EIG_RTOL
    rest = ~top

    if np.linalg.norm(gv[top]) <= HARD_CASE_TOL:
        z_rest = gv[rest] / (lam_max - lam[rest])
        rest_norm = float(np.linalg.norm(z_rest))
        if rest_norm <= 1.0:
            z = np.zeros(n)
            z[rest] = z_rest
            top_vec = vecs[:, np.flatnonzero(top)[-1]]
            w = vecs @ z + np.sqrt(max(0.0, 1.0 - rest_norm**2)) * _oriented(top_vec, w_ref)
            return w / np.linalg.norm(w)
        active = rest
        mu_lo = lam_max
    else:
        active = np.ones(n, dtype=bool)
        mu_lo = lam_max + float(np.max(np.abs(gv[top])))

    g_act = gv[active]
    l_act = lam[active]

    def excess_norm(mu: float) -> float:
        return float(np.linalg.norm(g_act / (mu - l_act))) - 1.0

    mu_hi = lam_max + float(np.linalg.norm(gv))
    if mu_hi <= mu_lo or excess_norm(mu_lo) <= 0.0:
        mu = mu_lo
    elif excess_norm(mu_hi) >= 0.0:
        mu = mu_hi
    else:
        mu = brentq(excess_norm, mu_lo, mu_hi, xtol=1e-15, maxiter=500)

    z = np.zeros(n)
    z[active] = g_act / (mu - l_act)
    w = vecs @ z
    return w / np.linalg.norm(w)
