from ._core import (
    DimensionError,
    NumericalError,
    kalman_gain,
    lqr_gain,
    run,
    scenario_names,
    solve_care,
    spearman,
    sparsity,
    sweep,
    weights_json,
)

__all__ = [
    "DimensionError",
    "NumericalError",
    "kalman_gain",
    "lqr_gain",
    "run",
    "scenario_names",
    "solve_care",
    "spearman",
    "sparsity",
    "sweep",
    "weights_json",
]
