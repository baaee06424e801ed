"""Lead-lag detection for multivariate time series with DTW and K-Medoids."""

from ._core import (
    LEAD_SIGN,
    LagdtwError,
    adjusted_rand_index,
    ccf_auc,
    compute_metrics,
    detect,
    dtw,
    dtw_cost,
    dtw_distance_matrix,
    error_matrix,
    generate,
    kmeans,
    kmedoids,
    rescale_pnl,
)

__all__ = [
    "LEAD_SIGN",
    "LagdtwError",
    "adjusted_rand_index",
    "ccf_auc",
    "compute_metrics",
    "detect",
    "dtw",
    "dtw_cost",
    "dtw_distance_matrix",
    "error_matrix",
    "generate",
    "kmeans",
    "kmedoids",
    "rescale_pnl",
]
