"""Scikit-learn style estimator wrappers around the interpolation engines.

Both estimators follow the fit/predict protocol with get_params/set_params
from BaseEstimator, so they compose with sklearn model selection utilities.
X is an (n, d) coordinate array and y the observed values.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .estimation import EstimationConfig, fit as fit_sli
from .kriging import KrigingConfig, ok_predict_point
from .sli import SampleSet, SliModel, SliParams
from .variogram import empirical_variogram, fit_variogram


class SLIInterpolator(RegressorMixin, BaseEstimator):
    """Sparse local-interaction interpolator with adaptive bandwidths.

    Parameters left at None are estimated from the data during fit by
    leave-one-out cross-validation; supplying c1 and mu (and optionally
    kernel/k) skips the search and uses them verbatim.
    """

    def __init__(self, kernel="spherical", k=3, c1=None, mu=None,
                 cost="mae", multistart=5, loo_mode="fast", seed=0):
        self.kernel = kernel
        self.k = k
        self.c1 = c1
        self.mu = mu
        self.cost = cost
        self.multistart = multistart
        self.loo_mode = loo_mode
        self.seed = seed

    def fit(self, X, y):
        samples = SampleSet(X, y)
        if self.c1 is not None and self.mu is not None:
            config = EstimationConfig(
                kernels=[self.kernel], k_candidates=[self.k],
                c1_init=self.c1, mu_init=self.mu, cost=self.cost,
                multistart=1, mode=self.loo_mode, seed=self.seed, max_iter=0,
            )
        else:
            config = EstimationConfig(
                kernels=[self.kernel], k_candidates=[self.k], cost=self.cost,
                multistart=self.multistart, mode=self.loo_mode, seed=self.seed,
            )
        self.fitted_ = fit_sli(samples, config)
        self.model_ = SliModel(samples, self.fitted_.params)
        return self

    @classmethod
    def from_params(cls, X, y, params: SliParams):
        """Bind an already-estimated parameter vector to data, skipping fit."""
        est = cls(kernel=params.kernel.family, k=params.k, c1=params.c1,
                  mu=params.mu)
        est.fitted_ = None
        est.model_ = SliModel(SampleSet(X, y), params)
        return est

    def predict(self, X, return_std=False):
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before predict")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        preds = [self.model_.predict(pt) for pt in X]
        values = np.array([p.value for p in preds])
        if return_std:
            return values, np.array([p.std for p in preds])
        return values


class OrdinaryKrigingInterpolator(RegressorMixin, BaseEstimator):
    """Ordinary kriging with a circular search neighborhood.

    If no variogram model is supplied, fit() estimates the empirical robust
    variogram and picks the best-fitting family by weighted squared error.
    """

    def __init__(self, model=None, radius=None, max_neighbors=64,
                 no_neighbor_policy="nodata", n_bins=25):
        self.model = model
        self.radius = radius
        self.max_neighbors = max_neighbors
        self.no_neighbor_policy = no_neighbor_policy
        self.n_bins = n_bins

    def fit(self, X, y):
        samples = SampleSet(X, y)
        model = self.model
        if model is None:
            emp = empirical_variogram(samples, n_bins=self.n_bins)
            model = fit_variogram(emp)[0][0]
        radius = self.radius
        if radius is None:
            radius = 0.5 * model.xi
        self.config_ = KrigingConfig(model, radius, self.max_neighbors,
                                     self.no_neighbor_policy)
        self.samples_ = samples
        self.index_ = samples.index()
        return self

    def predict(self, X, return_std=False):
        if not hasattr(self, "config_"):
            raise NotFittedError("call fit before predict")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        preds = [
            ok_predict_point(pt, self.samples_, self.index_, self.config_)
            for pt in X
        ]
        values = np.array([p.value for p in preds])
        if return_std:
            return values, np.array([p.std for p in preds])
        return values
