"""scikit-learn style estimators wrapping the multi-task solver.

Both estimators follow the usual conventions: constructor arguments are
stored verbatim (so ``get_params``/``set_params``/``clone`` work), fit
validates inputs and exposes fitted state through trailing-underscore
attributes, and task membership rides along as an extra ``tasks`` array
aligned with the rows of X.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_consistent_length, column_or_1d

from .alternating import KMeansConfig, alternate_fit
from .data import TaskDataset
from .losses import get_loss
from .partitions import Partition, PenaltyWeights
from .regularizers import (
    ClusterNormPenalty,
    FixedMetricPenalty,
    FrobeniusPenalty,
    MultiTaskKernelPenalty,
    TraceNormSquaredPenalty,
)
from .solver import FitConfig, fit_weights

PENALTIES = ("frobenius", "mt_kernel", "fixed_metric", "trace_norm", "cluster_norm")


def _validate_fit_inputs(X, y, tasks):
    X = check_array(X, dtype=float)
    y = column_or_1d(y)
    if tasks is None:
        tasks = np.zeros(X.shape[0], dtype=int)
    else:
        tasks = column_or_1d(tasks)
    check_consistent_length(X, y, tasks)
    return X, y, tasks


class MultiTaskModel(BaseEstimator):
    """Linear per-task models coupled through a spectral penalty.

    Parameters
    ----------
    penalty : one of 'frobenius', 'mt_kernel', 'fixed_metric',
        'trace_norm', 'cluster_norm'.
    lam : overall regularization strength.
    eps_mean, eps_between, eps_within : component weights of the
        quadratic metrics (used by all penalties except 'trace_norm';
        'frobenius' uses eps_within alone).
    n_clusters : target cluster count for 'cluster_norm'.
    partition : task cluster labels, required for 'fixed_metric'.
    sigma_scale : box scale of the 'trace_norm' surrogate.
    loss : 'square' or 'logistic'.
    """

    def __init__(
        self,
        penalty="cluster_norm",
        lam=0.01,
        eps_mean=0.1,
        eps_between=0.2,
        eps_within=20.0,
        n_clusters=2,
        partition=None,
        sigma_scale=1.0,
        loss="square",
        max_iter=5000,
        grad_tol=1e-5,
        seed=0,
    ):
        self.penalty = penalty
        self.lam = lam
        self.eps_mean = eps_mean
        self.eps_between = eps_between
        self.eps_within = eps_within
        self.n_clusters = n_clusters
        self.partition = partition
        self.sigma_scale = sigma_scale
        self.loss = loss
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.seed = seed

    def _build_regularizer(self):
        weights = PenaltyWeights(self.eps_mean, self.eps_between, self.eps_within)
        if self.penalty == "frobenius":
            return FrobeniusPenalty(self.eps_within)
        if self.penalty == "mt_kernel":
            return MultiTaskKernelPenalty(self.eps_mean, self.eps_between)
        if self.penalty == "fixed_metric":
            if self.partition is None:
                raise ValueError("penalty 'fixed_metric' requires a partition")
            return FixedMetricPenalty(Partition.from_labels(self.partition), weights)
        if self.penalty == "trace_norm":
            return TraceNormSquaredPenalty(self.sigma_scale)
        if self.penalty == "cluster_norm":
            return ClusterNormPenalty(weights, self.n_clusters)
        raise ValueError(f"unknown penalty {self.penalty!r}; expected one of {PENALTIES}")

    def fit(self, X, y, tasks=None):
        X, y, tasks = _validate_fit_inputs(X, y, tasks)
        data = TaskDataset(X, y, tasks)
        config = FitConfig(
            lam=self.lam, max_iters=self.max_iter, grad_tol=self.grad_tol, seed=self.seed
        )
        result = fit_weights(data, get_loss(self.loss), self._build_regularizer(), config)
        self.coef_ = result.W
        self.n_tasks_ = data.m
        self.n_features_in_ = data.d
        self.n_iter_ = result.iterations
        self.objective_trace_ = result.objective_trace
        self.grad_norm_ = result.grad_norm
        self.converged_ = result.converged
        self.cluster_norm_result_ = result.cluster_norm
        return self

    def predict(self, X, tasks=None):
        if not hasattr(self, "coef_"):
            raise ValueError("model is not fitted")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fit with {self.n_features_in_}"
            )
        if tasks is None:
            tasks = np.zeros(X.shape[0], dtype=int)
        else:
            tasks = column_or_1d(tasks)
        check_consistent_length(X, tasks)
        if tasks.min() < 0 or tasks.max() >= self.n_tasks_:
            raise ValueError(f"task indices must lie in [0, {self.n_tasks_})")
        return (X @ self.coef_)[np.arange(X.shape[0]), tasks.astype(int)]


class AlternatingKMeansModel(BaseEstimator):
    """Alternates solving W under a fixed clustered metric with re-clustering
    the task vectors by k-means."""

    def __init__(
        self,
        lam=0.01,
        eps_mean=0.1,
        eps_between=0.2,
        eps_within=20.0,
        n_clusters=2,
        restarts=3,
        max_outer=20,
        kmeans_max_iter=100,
        loss="square",
        max_iter=5000,
        grad_tol=1e-5,
        seed=0,
    ):
        self.lam = lam
        self.eps_mean = eps_mean
        self.eps_between = eps_between
        self.eps_within = eps_within
        self.n_clusters = n_clusters
        self.restarts = restarts
        self.max_outer = max_outer
        self.kmeans_max_iter = kmeans_max_iter
        self.loss = loss
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.seed = seed

    def fit(self, X, y, tasks=None, w_init=None):
        X, y, tasks = _validate_fit_inputs(X, y, tasks)
        data = TaskDataset(X, y, tasks)
        weights = PenaltyWeights(self.eps_mean, self.eps_between, self.eps_within)
        config = KMeansConfig(
            r=self.n_clusters,
            restarts=self.restarts,
            max_kmeans_iters=self.kmeans_max_iter,
            max_outer_iters=self.max_outer,
            seed=self.seed,
        )
        fit_config = FitConfig(
            lam=self.lam, max_iters=self.max_iter, grad_tol=self.grad_tol, seed=self.seed
        )
        result, part = alternate_fit(
            data, get_loss(self.loss), weights, config, fit_config, w_init=w_init
        )
        self.coef_ = result.W
        self.partition_ = part
        self.n_tasks_ = data.m
        self.n_features_in_ = data.d
        self.n_iter_ = result.iterations
        self.objective_trace_ = result.objective_trace
        return self

    def predict(self, X, tasks=None):
        return MultiTaskModel.predict(self, X, tasks)
