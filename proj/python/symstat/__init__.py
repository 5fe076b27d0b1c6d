"""Mean and covariance reconstruction of symmetric stochastic signals."""

from ._symstat import (
    Model,
    Params,
    Stack,
    SymstatError,
    fit,
    fsc,
    group_info,
    param_count,
    real_sph_harm,
    real_wigner_d,
    rel_l1_diff,
    rel_l1_error,
    render_volume,
    resolution_at_threshold,
    run_cli,
    simulate,
    tabulate_counts,
)

__all__ = [
    "Model",
    "Params",
    "Stack",
    "SymstatError",
    "fit",
    "fsc",
    "group_info",
    "param_count",
    "real_sph_harm",
    "real_wigner_d",
    "rel_l1_diff",
    "rel_l1_error",
    "render_volume",
    "resolution_at_threshold",
    "run_cli",
    "simulate",
    "tabulate_counts",
]
