"""Ordinary kriging with circular search neighborhoods.

The per-point system is written in variogram form (so unbounded families
like the power model work): with neighbors s_1..s_m inside the search
radius, solve

    sum_j w_j gamma(s_i, s_j) + l = gamma(s_i, z_p),   sum_j w_j = 1,

and report x_hat = sum_j w_j x_j with variance sum_j w_j gamma(s_j, z_p) + l.
The target is treated as a point distinct from the samples, so the nugget
enters gamma(s_i, z_p) even at zero separation; with a nugget the estimator
therefore smooths instead of honoring coincident sample values. Duplicate
neighbor locations are averaged before solving; a singular system triggers
one deduplicate-and-retry before giving up.
"""

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, solve
from scipy.spatial.distance import cdist

from .sli import Prediction

DEFAULT_NEIGHBOR_CAP = 64


class KrigingConfig:
    """Fitted variogram model plus neighborhood search settings."""

    def __init__(self, model, radius, max_neighbors=DEFAULT_NEIGHBOR_CAP,
                 no_neighbor_policy="nodata"):
        if radius <= 0:
            raise ValueError("search radius must be positive")
        if max_neighbors is not None and max_neighbors < 1:
            raise ValueError("neighbor cap must be >= 1 when present")
        if no_neighbor_policy not in ("nodata", "mean"):
            raise ValueError("no_neighbor_policy must be 'nodata' or 'mean'")
        self.model = model
        self.radius = float(radius)
        self.max_neighbors = max_neighbors
        self.no_neighbor_policy = no_neighbor_policy


def _dedupe(points, values):
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    counts = np.bincount(inverse)
    np.add.at(merged, inverse, values)
    return uniq, merged / counts


def _target_gamma(model, dists):
    # nugget applies to every target-sample pair, zero separation included
    return np.where(dists > 0, model(dists), model.c0)


def _solve_system(pts, vals, target, model):
    m = len(pts)
    a = np.zeros((m + 1, m + 1))
    a[:m, :m] = model(cdist(pts, pts))
    a[:m, m] = 1.0
    a[m, :m] = 1.0
    rhs = np.empty(m + 1)
    gamma_p = _target_gamma(model, np.linalg.norm(pts - target, axis=1))
    rhs[:m] = gamma_p
    rhs[m] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        sol = solve(a, rhs, assume_a="sym")
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("non-finite kriging solution")
    w, lagrange = sol[:m], sol[m]
    return float(w @ vals), float(w @ gamma_p + lagrange), w


def ok_predict_point(target, samples, index, config, _warn_counter=None):
    """Ordinary-kriging prediction at one point.

    Returns a Prediction whose `bandwidth` slot carries the search radius.
    A numerically slightly negative variance is clamped to zero.
    """
    target = np.asarray(target, dtype=np.float64).ravel()
    ids, dists = index.radius_neighbors(target, config.radius)
    if config.max_neighbors is not None and len(ids) > config.max_neighbors:
        ids = ids[: config.max_neighbors]
    if len(ids) == 0:
        if config.no_neighbor_policy == "mean":
            return Prediction(float(np.mean(samples.values)), np.nan, 0,
                              config.radius)
        return Prediction(np.nan, np.nan, 0, config.radius)
    pts = samples.points[ids]
    vals = samples.values[ids]
    if len(ids) == 1:
        d = np.linalg.norm(pts[0] - target)
        g = float(_target_gamma(config.model, np.array([d]))[0])
        return Prediction(float(vals[0]), np.sqrt(max(2.0 * g, 0.0)), 1,
                          config.radius)
    try:
        value, var, _ = _solve_system(pts, vals, target, config.model)
    except (np.linalg.LinAlgError, LinAlgWarning):
        pts, vals = _dedupe(pts, vals)
        if len(pts) == 1:
            d = np.linalg.norm(pts[0] - target)
            g = float(_target_gamma(config.model, np.array([d]))[0])
            return Prediction(float(vals[0]), np.sqrt(max(2.0 * g, 0.0)), 1,
                              config.radius)
        value, var, _ = _solve_system(pts, vals, target, config.model)
    if var < 0:
        if var < -1e-10 and _warn_counter is not None:
            _warn_counter["negative_variance"] = (
                _warn_counter.get("negative_variance", 0) + 1
            )
        var = 0.0
    return Prediction(value, np.sqrt(var), len(pts), config.radius)


def ok_loo_residuals(samples, config, index=None):
    """Leave-one-out residuals: each point predicted from all others."""
    if index is None:
        index = samples.index()
    res = np.empty(samples.n)
    for i in range(samples.n):
        ids, _ = index.radius_neighbors(samples.points[i], config.radius)
        ids = ids[ids != i]
        if config.max_neighbors is not None and len(ids) > config.max_neighbors:
            ids = ids[: config.max_neighbors]
        if len(ids) == 0:
            res[i] = np.nan
            continue
        sub_pts = samples.points[ids]
        sub_vals = samples.values[ids]
        if len(ids) == 1:
            pred = float(sub_vals[0])
        else:
            try:
                pred, _, _ = _solve_system(sub_pts, sub_vals,
                                           samples.points[i], config.model)
            except (np.linalg.LinAlgError, LinAlgWarning):
                sub_pts, sub_vals = _dedupe(sub_pts, sub_vals)
                pred, _, _ = _solve_system(sub_pts, sub_vals,
                                           samples.points[i], config.model)
        res[i] = samples.values[i] - pred
    return res
