# scikit-learn estimators wrapping the PLSR and PMCR fits.
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from src.data.dataset import RegressionDataset
from src.errors import SpecificationError
from src.models.factors import FactorModel, predict
from src.models.plsr import plsr_fit
from src.models.pmcr import PmcrConfig, pmcr_fit


class _FactorRegressor(RegressorMixin, BaseEstimator):
    def _fit_model(self, data: RegressionDataset) -> FactorModel:
        raise NotImplementedError

    def fit(self, X, y):
        y_arr = np.asarray(y)
        self._y_was_1d = y_arr.ndim == 1
        self.model_ = self._fit_model(RegressionDataset(x=X, y=y_arr))
        self.coef_ = self.model_.h
        self.n_factors_ = self.model_.n_factors
        self.n_features_in_ = self.model_.n_inputs
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        yhat = predict(self.model_, X)
        return yhat.ravel() if self._y_was_1d else yhat


class PLSRegressor(_FactorRegressor):
    """Conventional PLSR with `n_factors` SVD factors."""

    def __init__(self, n_factors: int = 20, center: bool = False):
        self.n_factors = n_factors
        self.center = center

    def _fit_model(self, data):
        return plsr_fit(data, self.n_factors, center=self.center)


class PMCRRegressor(_FactorRegressor):
    """Partial maximum correntropy regression; parameters as in PmcrConfig."""

    def __init__(
        self,
        n_factors: int = 20,
        varsigma: float | None = None,
        max_hq_iters: int = 50,
        max_fp_iters: int = 100,
        fp_tol: float = 1e-8,
        silverman_classic: bool = True,
        regression: str = "shared",
        min_effective_fraction: float = 0.1,
        bandwidths=None,
        center: bool = False,
    ):
        self.n_factors = n_factors
        self.varsigma = varsigma
        self.max_hq_iters = max_hq_iters
        self.max_fp_iters = max_fp_iters
        self.fp_tol = fp_tol
        self.silverman_classic = silverman_classic
        self.regression = regression
        self.min_effective_fraction = min_effective_fraction
        self.bandwidths = bandwidths
        self.center = center

    def _fit_model(self, data):
        return pmcr_fit(data, PmcrConfig.from_mapping(self.get_params()))


ESTIMATORS = {"plsr": PLSRegressor, "pmcr": PMCRRegressor}


def make_estimator(name: str, n_factors: int, **params) -> _FactorRegressor:
    """Build the estimator registered under `name` ("plsr" or "pmcr")."""
    try:
        cls = ESTIMATORS[name.lower()]
    except KeyError:
        raise SpecificationError(
            f"unknown algorithm '{name}', expected one of {sorted(ESTIMATORS)}"
        ) from None
    accepted = set(cls().get_params())
    if cls is PLSRegressor:
        # PMCR-only settings do not apply
        params = {k: v for k, v in params.items() if k in accepted}
    unknown = set(params) - accepted
    if unknown:
        raise SpecificationError(f"unknown {name} parameter(s): {', '.join(sorted(unknown))}")
    return cls(n_factors=n_factors, **params)
