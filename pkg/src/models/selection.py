# Number-of-factors selection by K-fold cross-validation of conventional PLSR.
from __future__ import annotations

import logging

import numpy as np
from sklearn.model_selection import KFold

from src.data.dataset import RegressionDataset
from src.errors import SpecificationError
from src.models.factors import predict
from src.models.plsr import plsr_fit
from src.utils.metrics import rmse
from src.utils.seeding import derive_int_seed

logger = logging.getLogger(__name__)

# Scores within this fraction of the target's RMS of the best score count as ties.
CV_TIE_RTOL = 1e-9


def cv_rmse_curve(
    data: RegressionDataset, s_max: int, folds: int = 5, seed: int = 0, center: bool = False
) -> np.ndarray:
    """Mean validation RMSE for s = 1..S, S = min(s_max, rank bound of every fold).

    One PLSR fit with S factors per fold; the s-factor model is its prefix.
    """
    if int(s_max) != s_max or s_max < 1:
        raise SpecificationError(f"s_max must be a positive integer, got {s_max!r}")
    if folds < 2:
        raise SpecificationError(f"folds must be >= 2, got {folds}")
    if data.n_obs < folds:
        raise SpecificationError(f"{data.n_obs} observations cannot be split into {folds} folds")

    kf = KFold(n_splits=folds, shuffle=True, random_state=derive_int_seed(seed, "folds"))
    splits = list(kf.split(data.x))
    smallest_train = min(len(tr) for tr, _ in splits)
    s_bound = int(min(s_max, data.n_inputs, smallest_train))

    scores = np.zeros((folds, s_bound))
    for k, (tr, va) in enumerate(splits):
        model = plsr_fit(data.subset(tr), s_bound, center=center)
        valid = data.subset(va)
        for s in range(1, s_bound + 1):
            # a fit that stopped early keeps predicting with all its factors
            sub = model.truncate(s) if s < model.n_factors else model
            scores[k, s - 1] = rmse(predict(sub, valid.x), valid.y)
    curve = scores.mean(axis=0)
    logger.debug("CV RMSE by factor count: %s", np.array2string(curve, precision=4))
    return curve


def select_num_factors(
    data: RegressionDataset, s_max: int, folds: int = 5, seed: int = 0, center: bool = False
) -> int:
    """Factor count with the lowest mean validation RMSE (smallest s on ties)."""
    curve = cv_rmse_curve(data, s_max, folds=folds, seed=seed, center=center)
    tol = CV_TIE_RTOL * float(np.sqrt(np.mean(data.y**2)))
    s_opt = int(np.flatnonzero(curve <= curve.min() + tol)[0]) + 1
    logger.info("Selected %d factor(s) by %d-fold CV (RMSE %.6g)", s_opt, folds, curve[s_opt - 1])
    return s_opt
