"""Penalty functionals on the task-weight matrix, with gradients.

Every penalty exposes ``value(W)`` and ``grad(W)``; all vanish at W = 0.
"""

import numpy as np

from .partitions import PenaltyWeights, sigma_inv_matrix, projection_matrices
from .spectrum import (
    SpectralBox,
    cluster_norm_sq,
    cluster_norm_sq_grad,
    reconstruct_sigma_star,
)


class FrobeniusPenalty:
    """eps |W|_F^2: independent ridge on every task."""

    def __init__(self, eps):
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.eps = float(eps)

    def value(self, W):
        W = np.asarray(W, dtype=float)
        return self.eps * float(np.sum(W * W))

    def grad(self, W):
        return 2.0 * self.eps * np.asarray(W, dtype=float)


class MultiTaskKernelPenalty:
    """eps_mean tr(W U W^T) + eps_between tr(W (I - U) W^T).

    Shrinks the task mean and the total variance of the tasks around it;
    no cluster structure.
    """

    def __init__(self, eps_mean, eps_between):
        if not (eps_mean > 0 and eps_between > 0):
            raise ValueError("weights must be positive")
        self.eps_mean = float(eps_mean)
        self.eps_between = float(eps_between)

    def value(self, W):
        W = np.asarray(W, dtype=float)
        m = W.shape[1]
        wbar = W.mean(axis=1)
        om = m * float(wbar @ wbar)  # tr W U W^T
        return self.eps_mean * om + self.eps_between * (float(np.sum(W * W)) - om)

    def grad(self, W):
        W = np.asarray(W, dtype=float)
        wbar = W.mean(axis=1)
        return 2.0 * self.eps_between * W + 2.0 * (
            self.eps_mean - self.eps_between
        ) * wbar[:, None]


class FixedMetricPenalty:
    """tr(W Sigma(M)^{-1} W^T) for a fixed task partition."""

    def __init__(self, partition, weights):
        self.partition = partition
        self.weights = weights
        self._metric_inv = sigma_inv_matrix(partition, weights)

    def value(self, W):
        W = np.asarray(W, dtype=float)
        self._check(W)
        return float(np.sum((W @ self._metric_inv) * W))

    def grad(self, W):
        W = np.asarray(W, dtype=float)
        self._check(W)
        return 2.0 * W @ self._metric_inv

    def _check(self, W):
        if W.shape[1] != self.partition.m:
            raise ValueError(
                f"W has {W.shape[1]} columns but partition has m={self.partition.m}"
            )


class ClusterNormPenalty:
    """eps_mean tr(W U W^T) + |Pi W|_c^2: the convex clustered-tasks penalty.

    The spectral box is built from (eps_between, eps_within) and the
    target cluster count; the centered part of W pays the box norm, the
    mean direction pays an ordinary quadratic.
    """

    def __init__(self, weights, n_clusters):
        if not isinstance(weights, PenaltyWeights):
            weights = PenaltyWeights(*weights)
        if n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        self.weights = weights
        self.n_clusters = int(n_clusters)

    def box(self, m):
        if self.weights.eps_within == self.weights.eps_between:
            # degenerate box: the metric is pinned, the penalty is a plain ridge
            a = 1.0 / self.weights.eps_within
            return SpectralBox(a, a, m * a, m)
        return SpectralBox.from_weights(self.weights, self.n_clusters, m)

    def value(self, W):
        W = np.asarray(W, dtype=float)
        return self._mean_part(W) + self.norm_result(W).value

    def grad(self, W):
        W = np.asarray(W, dtype=float)
        m = W.shape[1]
        _, Pi = projection_matrices(m)
        res = cluster_norm_sq(W @ Pi, self.box(m))
        wbar = W.mean(axis=1)
        mean_grad = 2.0 * self.weights.eps_mean * np.repeat(wbar[:, None], m, axis=1)
        return mean_grad + cluster_norm_sq_grad(res) @ Pi

    def norm_result(self, W):
        """Spectrum allocation of the centered matrix Pi W."""
        W = np.asarray(W, dtype=float)
        m = W.shape[1]
        _, Pi = projection_matrices(m)
        return cluster_norm_sq(W @ Pi, self.box(m))

    def sigma_star(self, W):
        """The optimal metric attained by the centered matrix."""
        return reconstruct_sigma_star(self.norm_result(W))

    def _mean_part(self, W):
        wbar = W.mean(axis=1)
        return self.weights.eps_mean * W.shape[1] * float(wbar @ wbar)


class TraceNormSquaredPenalty:
    """Squared-trace-norm surrogate through a wide spectral box.

    Uses the box (1e-6 s, 1e6 s, 1) on the uncentered matrix, with s a
    scale parameter; within the box limits the minimum over the spectrum
    equals (sum sigma_i)^2, the squared trace norm.
    """

    def __init__(self, sigma_scale=1.0):
        if not sigma_scale > 0:
            raise ValueError("sigma_scale must be positive")
        self.sigma_scale = float(sigma_scale)

    def box(self, m):
        return SpectralBox(1e-6 * self.sigma_scale, 1e6 * self.sigma_scale, 1.0, m)

    def value(self, W):
        return self.norm_result(W).value

    def grad(self, W):
        W = np.asarray(W, dtype=float)
        return cluster_norm_sq_grad(self.norm_result(W))

    def norm_result(self, W):
        W = np.asarray(W, dtype=float)
        return cluster_norm_sq(W, self.box(W.shape[1]))
