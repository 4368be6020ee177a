# Conventional partial least squares regression.
#
# Each factor takes the dominant singular pair of X_s^T Y_s as projectors,
# regresses X_s and the response score on the input score by least squares,
# and deflates both residual matrices. H = pinv(P^T) B C^T.
from __future__ import annotations

import logging

import numpy as np

from src.data.dataset import RegressionDataset
from src.data.preprocess import center_columns
from src.errors import DegenerateError, SpecificationError
from src.models.factors import (
    FactorModel,
    LatentFactor,
    apply_sign_convention,
    assemble_coefficients,
)

logger = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-12


def dominant_svd_pair(m) -> tuple[np.ndarray, np.ndarray, float]:
    """Top singular triple (w, c, s) of `m` (= X_s^T Y_s), sign convention applied."""
    m = np.asarray(m, dtype=np.float64)
    if not np.any(m):
        raise DegenerateError("cross-product matrix is all zeros")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if not s[0] > 0:
        raise DegenerateError("cross-product matrix has no positive singular value")
    w, c, _ = apply_sign_convention(u[:, 0], vt[0])
    return w, c, float(s[0])


def _score_norm_sq(t: np.ndarray) -> float:
    tt = float(t @ t)
    if not tt > 0:
        raise DegenerateError("score vector is zero (t't = 0)")
    return tt


def ls_loading(x_s, t) -> np.ndarray:
    """p = X_s^T t / (t^T t), the least-squares fit of X_s by t p^T."""
    t = np.asarray(t, dtype=np.float64)
    return np.asarray(x_s).T @ t / _score_norm_sq(t)


def ls_scalar(u, t) -> float:
    """b = u^T t / (t^T t)."""
    t = np.asarray(t, dtype=np.float64)
    return float(np.asarray(u, dtype=np.float64) @ t) / _score_norm_sq(t)


def deflate(x_s, y_s, factor: LatentFactor) -> tuple[np.ndarray, np.ndarray]:
    """X_{s+1} = X_s - t p^T and Y_{s+1} = Y_s - b t c^T."""
    x_next = x_s - np.outer(factor.t, factor.p)
    y_next = y_s - factor.b * np.outer(factor.t, factor.c)
    return x_next, y_next


def ls_projector_objective(x_s, y_s, w, c) -> float:
    """Least-squares form of the projector problem (to be minimized).

    Sum over observations of the squared X and Y reconstruction errors plus
    the squared latent prediction error. For unit w, c it equals
    ||X_s||^2 + ||Y_s||^2 - 2 w^T X_s^T Y_s c.
    """
    x_s = np.asarray(x_s, dtype=np.float64)
    y_s = np.asarray(y_s, dtype=np.float64)
    t = x_s @ w
    u = y_s @ c
    x_err = x_s - np.outer(t, w)
    y_err = y_s - np.outer(u, c)
    return float(np.sum(x_err**2) + np.sum(y_err**2) + np.sum((t - u) ** 2))


def check_factor_count(n_factors: int, data: RegressionDataset) -> None:
    bound = min(data.n_inputs, data.n_obs)
    if int(n_factors) != n_factors or not 1 <= n_factors <= bound:
        raise SpecificationError(
            f"number of factors must be an integer in [1, {bound}], got {n_factors!r}"
        )


def residual_exhausted(x_s, y_s, x_norm0: float, y_norm0: float) -> bool:
    """True when either residual matrix is numerically zero."""
    return bool(
        np.linalg.norm(x_s) <= RESIDUAL_RTOL * x_norm0
        or np.linalg.norm(y_s) <= RESIDUAL_RTOL * y_norm0
    )


def prepare(data: RegressionDataset, center: bool):
    """Working copies of X and Y (centered if requested) and their means."""
    if center:
        x, x_mean = center_columns(data.x)
        y, y_mean = center_columns(data.y)
        return x, y, x_mean, y_mean
    return np.array(data.x), np.array(data.y), None, None


def plsr_factor(x_s, y_s) -> LatentFactor:
    """Extract one conventional PLSR factor from the residual matrices."""
    w, c, _ = dominant_svd_pair(x_s.T @ y_s)
    t = x_s @ w
    u = y_s @ c
    return LatentFactor(w=w, c=c, t=t, u=u, p=ls_loading(x_s, t), b=ls_scalar(u, t))


def plsr_fit(data: RegressionDataset, n_factors: int, center: bool = False) -> FactorModel:
    """Fit conventional PLSR with up to `n_factors` factors."""
    check_factor_count(n_factors, data)
    x_s, y_s, x_mean, y_mean = prepare(data, center)
    x_norm0, y_norm0 = np.linalg.norm(x_s), np.linalg.norm(y_s)

    factors: list[LatentFactor] = []
    stopped_early = False
    for k in range(1, n_factors + 1):
        if residual_exhausted(x_s, y_s, x_norm0, y_norm0):
            stopped_early = True
        else:
            try:
                factor = plsr_factor(x_s, y_s)
            except DegenerateError as e:
                logger.debug("Factor %d degenerate: %s", k, e)
                stopped_early = True
        if stopped_early:
            logger.info(
                "PLSR stopped at factor %d of %d: residual is numerically zero",
                k, n_factors,
            )
            break
        factors.append(factor)
        x_s, y_s = deflate(x_s, y_s, factor)

    h = assemble_coefficients(factors, data.n_inputs, data.n_outputs)
    logger.debug("PLSR fit with %d factor(s)", len(factors))
    return FactorModel(
        algorithm="plsr",
        factors=tuple(factors),
        h=h,
        n_inputs=data.n_inputs,
        n_outputs=data.n_outputs,
        n_requested=int(n_factors),
        stopped_early=stopped_early,
        x_mean=x_mean,
        y_mean=y_mean,
        config={"n_factors": int(n_factors), "center": bool(center)},
    )
