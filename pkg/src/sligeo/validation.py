"""Cross-validation harness: statistics, LOO/LPO runs, box summaries.

All error statistics use the convention error = truth - estimate. Relative
statistics skip zero truth values and report how many were excluded. Random
splits flow from a single 64-bit seed so every report is reproducible.
"""

import numpy as np

from .estimation import loo_residuals
from .kriging import KrigingConfig, ok_loo_residuals
from .sli import SampleSet


class CvReport:
    """The seven validation statistics plus per-point errors."""

    FIELDS = ("me", "mae", "mare", "rmse", "rmsre", "max_ae", "r")

    def __init__(self, stats, errors, excluded_zeros=0, fold=None):
        for name in self.FIELDS:
            setattr(self, name, stats[name])
        self.errors = np.asarray(errors, dtype=np.float64)
        self.excluded_zeros = int(excluded_zeros)
        self.fold = fold

    def to_dict(self):
        d = {name: getattr(self, name) for name in self.FIELDS}
        d["n"] = int(len(self.errors))
        d["excluded_zeros"] = self.excluded_zeros
        if self.fold is not None:
            d["fold"] = self.fold
        return d


def cv_statistics(truth, pred, fold=None):
    """Compute bias, absolute, relative and correlation measures.

    Pearson's R is NaN when either vector is constant. MARE/RMSRE exclude
    zero truth values (counted in `excluded_zeros`).
    """
    truth = np.asarray(truth, dtype=np.float64).ravel()
    pred = np.asarray(pred, dtype=np.float64).ravel()
    if truth.shape != pred.shape or truth.size == 0:
        raise ValueError("truth and prediction must have equal nonzero length")
    err = truth - pred
    abs_err = np.abs(err)
    nonzero = truth != 0.0
    rel = err[nonzero] / truth[nonzero]
    if truth.size >= 2 and np.std(truth) > 0 and np.std(pred) > 0:
        r = float(np.corrcoef(truth, pred)[0, 1])
    else:
        r = float("nan")
    stats = {
        "me": float(np.mean(err)),
        "mae": float(np.mean(abs_err)),
        "mare": float(np.mean(np.abs(rel))) if rel.size else float("nan"),
        "rmse": float(np.sqrt(np.mean(err**2))),
        "rmsre": float(np.sqrt(np.mean(rel**2))) if rel.size else float("nan"),
        "max_ae": float(abs_err.max()),
        "r": r,
    }
    return CvReport(stats, err, excluded_zeros=int(np.sum(~nonzero)), fold=fold)


def run_loo(samples, predictor, mode="fast"):
    """Leave-one-out report for a fitted SLI model or a kriging config."""
    if isinstance(predictor, KrigingConfig):
        res = ok_loo_residuals(samples, predictor)
    else:
        p = predictor.params if hasattr(predictor, "params") else predictor
        res = loo_residuals(samples, p.kernel, p.k, p.c1, p.mu,
                            m_x=p.m_x, mode=mode)
    ok_mask = np.isfinite(res)
    pred = samples.values[ok_mask] - res[ok_mask]
    return cv_statistics(samples.values[ok_mask], pred)


def lpo_splits(n, p, folds, seed):
    """Seeded random leave-P-out splits with test size floor(n * p)."""
    if not 0 < p < 1:
        raise ValueError("test rate p must lie in (0, 1)")
    if folds < 1:
        raise ValueError("need at least one fold")
    n_test = int(np.floor(n * p))
    if n_test < 1:
        raise ValueError("test rate too small: empty test set")
    rng = np.random.default_rng(seed)
    splits = []
    for fold in range(folds):
        perm = rng.permutation(n)
        splits.append((np.sort(perm[n_test:]), np.sort(perm[:n_test]), fold))
    return splits


def run_lpo(samples, fit_sli, make_ok, p, folds, seed):
    """Leave-P-out comparison on identical splits.

    `fit_sli(train_samples)` must return a fitted SLI model (refitted per
    fold); `make_ok()` returns the kriging config reused across folds (the
    global variogram). Either may be None to skip that method. Returns
    (reports, fitted_models, skipped) where reports maps method name to a
    list of per-fold CvReports.
    """
    reports = {"sli": [], "ok": []}
    fitted = []
    skipped = []
    ok_config = make_ok() if make_ok is not None else None
    for train_idx, test_idx, fold in lpo_splits(samples.n, p, folds, seed):
        train = SampleSet(samples.points[train_idx], samples.values[train_idx])
        test_pts = samples.points[test_idx]
        truth = samples.values[test_idx]
        if fit_sli is not None:
            try:
                model = fit_sli(train)
            except Exception as exc:  # noqa: BLE001 - fold recorded and skipped
                skipped.append({"fold": fold, "method": "sli", "error": str(exc)})
            else:
                fitted.append(model)
                from .sli import SliModel

                engine = SliModel(train, model.params)
                pred = np.array([engine.predict(pt).value for pt in test_pts])
                reports["sli"].append(cv_statistics(truth, pred, fold=fold))
        if ok_config is not None:
            from .kriging import ok_predict_point

            index = train.index()
            pred = np.array(
                [
                    ok_predict_point(pt, train, index, ok_config).value
                    for pt in test_pts
                ]
            )
            keep = np.isfinite(pred)
            reports["ok"].append(cv_statistics(truth[keep], pred[keep], fold=fold))
    return reports, fitted, skipped


def parameter_stability_report(models):
    """Dispersion of the c1/lambda ratio and of mu across fold fits."""
    if len(models) < 2:
        raise ValueError("need at least 2 fitted models")
    rows = []
    for m in models:
        p = m.params if hasattr(m, "params") else m
        rows.append({"c1": p.c1, "lambda": p.lam, "mu": p.mu,
                     "ratio": p.c1 / p.lam})
    ratios = np.array([r["ratio"] for r in rows])
    mus = np.array([r["mu"] for r in rows])

    def dispersion(v):
        q1, q2, q3 = np.percentile(v, [25, 50, 75])
        return {
            "median": float(q2),
            "iqr": float(q3 - q1),
            "relative_iqr": float((q3 - q1) / q2) if q2 != 0 else float("nan"),
            "min": float(v.min()),
            "max": float(v.max()),
        }

    return {
        "folds": rows,
        "c1_over_lambda": dispersion(ratios),
        "mu": dispersion(mus),
    }


class BoxSummary:
    """Quartile box with whiskers at extreme non-outliers."""

    def __init__(self, median, q1, q3, whisker_lo, whisker_hi, outliers):
        self.median = median
        self.q1 = q1
        self.q3 = q3
        self.whisker_lo = whisker_lo
        self.whisker_hi = whisker_hi
        self.outliers = outliers

    def to_dict(self):
        return {
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_lo": self.whisker_lo,
            "whisker_hi": self.whisker_hi,
            "outliers": list(self.outliers),
        }


def box_summary(values, lower_fence_from_q3=False):
    """Quartiles (linear interpolation), 1.5 IQR fences, outlier list.

    The standard lower fence is q1 - 1.5 IQR; `lower_fence_from_q3`
    switches to q3 - 1.5 IQR for compatibility with sources that anchor
    both fences at the upper quartile.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("box summary of an empty list")
    q1, q2, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo_anchor = q3 if lower_fence_from_q3 else q1
    lo_fence = lo_anchor - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inliers = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = v[(v < lo_fence) | (v > hi_fence)]
    if inliers.size:
        wlo, whi = float(inliers.min()), float(inliers.max())
    else:
        wlo, whi = float(q1), float(q3)
    return BoxSummary(float(q2), float(q1), float(q3), wlo, whi,
                      sorted(float(o) for o in outliers))
