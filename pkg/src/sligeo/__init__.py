"""sligeo: sparse local-interaction spatial interpolation with a kriging baseline."""

from .estimation import (
    EstimationConfig,
    FittedModel,
    fit,
    lambda_star,
    loo_cost,
    loo_residuals,
)
from .grids import GridSpec, Raster, fill_grid, points_in_polygon, total_volume
from .interpolators import OrdinaryKrigingInterpolator, SLIInterpolator
from .kernels import KernelSpec, bandwidth_for_target, eval_kernel, local_bandwidths
from .kriging import KrigingConfig, ok_loo_residuals, ok_predict_point
from .raster_io import read_raster, write_raster
from .sli import (
    SampleSet,
    SliModel,
    SliParams,
    SparsePrecision,
    WeightMatrix,
    build_precision,
    compute_weights,
    cross_weights,
    energy,
    gradient_term,
    predict_point,
)
from .spatial import SpatialIndex, build_index
from .validation import (
    BoxSummary,
    CvReport,
    box_summary,
    cv_statistics,
    lpo_splits,
    parameter_stability_report,
    run_loo,
    run_lpo,
)
from .variogram import (
    EmpiricalVariogram,
    VariogramModel,
    empirical_variogram,
    fit_variogram,
    model_value,
)

__version__ = "0.1.0"

__all__ = [
    "BoxSummary",
    "CvReport",
    "EmpiricalVariogram",
    "EstimationConfig",
    "FittedModel",
    "GridSpec",
    "KernelSpec",
    "KrigingConfig",
    "OrdinaryKrigingInterpolator",
    "Raster",
    "SLIInterpolator",
    "SampleSet",
    "SliModel",
    "SliParams",
    "SparsePrecision",
    "SpatialIndex",
    "WeightMatrix",
    "bandwidth_for_target",
    "box_summary",
    "build_index",
    "build_precision",
    "compute_weights",
    "cross_weights",
    "cv_statistics",
    "empirical_variogram",
    "energy",
    "eval_kernel",
    "fill_grid",
    "fit",
    "fit_variogram",
    "gradient_term",
    "lambda_star",
    "local_bandwidths",
    "loo_cost",
    "lpo_splits",
    "loo_residuals",
    "model_value",
    "ok_loo_residuals",
    "ok_predict_point",
    "parameter_stability_report",
    "points_in_polygon",
    "predict_point",
    "read_raster",
    "run_loo",
    "run_lpo",
    "total_volume",
    "write_raster",
]
