"""sparsecox: scalable sparse Cox regression on column-sparse survival data.

The estimator is a broken-adaptive-ridge (BAR) fit: an initial ridge
solution refined by iteratively reweighted L2-penalized partial-likelihood
optimization, solved with cyclic coordinate descent over sparse columns.
Fixing the reweighting strength at ln(n) or ln(#events) makes the limit a
local BIC / censored-BIC optimizer, so no tuning search is needed.
"""

__version__ = "0.1.0"

from .data import (
    SparseColumnMatrix,
    SurvivalDataset,
    load_dataset,
    save_dataset,
    standardize,
    to_original_scale,
    validate,
)
from .likelihood import (
    LinearPredictorState,
    apply_coord_update,
    coord_derivatives,
    full_gradient,
    init_state,
    log_partial_likelihood,
)
from .solver import FitResult, PenaltySpec, SolverOptions, ccd_minimize, stabilized_coord_step
from .bar import (
    BarConfig,
    PathResult,
    fit_bar,
    fit_bar_grid,
    fit_ridge,
    grouping_bound_check,
    information_criteria,
    path_over,
)
from .screening import ScreenOptions, ScreenResult, sjs_coxbar, sjs_screen
from .sim import (
    BenchmarkReport,
    MethodConfig,
    SelectionMetrics,
    SimScenario,
    run_benchmark,
    score,
    simulate,
)

__all__ = [
    "SparseColumnMatrix", "SurvivalDataset", "load_dataset", "save_dataset",
    "standardize", "to_original_scale", "validate",
    "LinearPredictorState", "init_state", "log_partial_likelihood",
    "coord_derivatives", "apply_coord_update", "full_gradient",
    "FitResult", "PenaltySpec", "SolverOptions", "ccd_minimize", "stabilized_coord_step",
    "BarConfig", "PathResult", "fit_ridge", "fit_bar", "fit_bar_grid",
    "information_criteria", "path_over", "grouping_bound_check",
    "ScreenOptions", "ScreenResult", "sjs_screen", "sjs_coxbar",
    "SimScenario", "SelectionMetrics", "MethodConfig", "BenchmarkReport",
    "simulate", "score", "run_benchmark",
]
