"""Convex clustered multi-task learning.

Linear models over multiple tasks regularized by a spectral "cluster
norm" that relaxes the unknown partition of tasks into clusters, plus
the classical baselines (Frobenius, mean-variance coupling, squared
trace norm, fixed clustered metric, alternating k-means) and a
synthetic benchmark harness.
"""

__version__ = "0.1.0"

from .alternating import (
    KMeansConfig,
    alternate_fit,
    kmeans_relaxation_value,
    kmeans_tasks,
    reproject_sigma,
    true_metric_fit,
)
from .data import (
    TaskDataset,
    load_dataset_csv,
    load_matrix_csv,
    save_dataset_csv,
    save_matrix_csv,
)
from .estimators import AlternatingKMeansModel, MultiTaskModel
from .losses import LogisticLoss, SquareLoss, get_loss
from .partitions import (
    Partition,
    PenaltyWeights,
    fixed_metric_penalty,
    omega_between,
    omega_mean,
    omega_within,
    partition_projection,
    projection_matrices,
    sigma_inv_matrix,
    sigma_matrix,
)
from .regularizers import (
    ClusterNormPenalty,
    FixedMetricPenalty,
    FrobeniusPenalty,
    MultiTaskKernelPenalty,
    TraceNormSquaredPenalty,
)
from .risk import empirical_risk, empirical_risk_grad
from .solver import (
    FitConfig,
    FitResult,
    fit_weights,
    misclassification_rate,
    objective,
    objective_grad,
    predict,
    rmse,
)
from .spectrum import (
    ClusterNormResult,
    SpectralBox,
    cluster_norm_sq,
    cluster_norm_sq_grad,
    make_spectral_box,
    reconstruct_sigma_star,
    solve_spectrum,
)
from .synthetic import SyntheticConfig, SyntheticTruth, generate, train_test_split

__all__ = [
    "AlternatingKMeansModel",
    "ClusterNormPenalty",
    "ClusterNormResult",
    "FitConfig",
    "FitResult",
    "FixedMetricPenalty",
    "FrobeniusPenalty",
    "KMeansConfig",
    "LogisticLoss",
    "MultiTaskKernelPenalty",
    "MultiTaskModel",
    "Partition",
    "PenaltyWeights",
    "SpectralBox",
    "SquareLoss",
    "SyntheticConfig",
    "SyntheticTruth",
    "TaskDataset",
    "TraceNormSquaredPenalty",
    "alternate_fit",
    "cluster_norm_sq",
    "cluster_norm_sq_grad",
    "empirical_risk",
    "empirical_risk_grad",
    "fit_weights",
    "fixed_metric_penalty",
    "generate",
    "get_loss",
    "kmeans_relaxation_value",
    "kmeans_tasks",
    "load_dataset_csv",
    "load_matrix_csv",
    "make_spectral_box",
    "misclassification_rate",
    "objective",
    "objective_grad",
    "omega_between",
    "omega_mean",
    "omega_within",
    "partition_projection",
    "predict",
    "projection_matrices",
    "reconstruct_sigma_star",
    "reproject_sigma",
    "rmse",
    "save_dataset_csv",
    "save_matrix_csv",
    "sigma_inv_matrix",
    "sigma_matrix",
    "solve_spectrum",
    "train_test_split",
    "true_metric_fit",
]
