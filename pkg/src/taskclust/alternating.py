"""Non-convex and hybrid baselines around a fixed clustered metric.

Covers: k-means over the task weight vectors, the alternating scheme
(fit W under Sigma(M), re-cluster, repeat), the oracle fit with a known
partition, rounding a learned spectral metric back to a partition, and
the closed form of the center-penalized K-means relaxation used as a
test oracle.
"""

from dataclasses import dataclass, replace

import numpy as np

from .losses import get_loss
from .partitions import (
    Partition,
    omega_within,
    partition_projection,
    projection_matrices,
)
from .regularizers import FixedMetricPenalty, FrobeniusPenalty
from .solver import fit_weights


@dataclass
class KMeansConfig:
    r: int
    restarts: int = 3
    max_kmeans_iters: int = 100
    max_outer_iters: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_kmeans_iters < 1 or self.max_outer_iters < 1:
            raise ValueError("iteration limits must be >= 1")


def _plusplus_init(points, r, rng):
    # k-means++ seeding on row points
    n = points.shape[0]
    centers = np.empty((r, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for k in range(1, r):
        total = d2.sum()
        if total <= 0:
            centers[k] = points[rng.integers(n)]
        else:
            centers[k] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centers[k]) ** 2, axis=1))
    return centers


def _lloyd_once(points, r, rng, max_iters):
    n = points.shape[0]
    centers = _plusplus_init(points, r, rng)
    labels = np.full(n, -1)
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        # empty-cluster repair: re-seed with the point farthest from its center
        for k in range(r):
            if not np.any(new_labels == k):
                far = d2[np.arange(n), new_labels].argmax()
                new_labels[far] = k
                d2[far, :] = np.inf
                d2[far, k] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(r):
            centers[k] = points[labels == k].mean(axis=0)
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels, inertia


def kmeans_points(points, r, restarts=3, seed=0, max_iters=100):
    """Best-of-restarts Lloyd clustering of row points; returns (labels, inertia)."""
    points = np.asarray(points, dtype=float)
    if r > points.shape[0]:
        raise ValueError(f"r={r} exceeds number of points {points.shape[0]}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        labels, inertia = _lloyd_once(points, r, rng, max_iters)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return best


def kmeans_tasks(W, config):
    """Cluster the task weight vectors (columns of W)."""
    W = np.asarray(W, dtype=float)
    if config.r > W.shape[1]:
        raise ValueError(f"r={config.r} exceeds task count m={W.shape[1]}")
    labels, _ = kmeans_points(
        W.T, config.r, config.restarts, config.seed, config.max_kmeans_iters
    )
    return Partition.from_labels(labels)


def true_metric_fit(data, loss, partition, weights, fit_config):
    """Single fit under the metric of a known partition (the oracle baseline)."""
    return fit_weights(data, loss, FixedMetricPenalty(partition, weights), fit_config)


def alternate_fit(data, loss, weights, config, fit_config, w_init=None):
    """Alternate fitting W under Sigma(M) with re-clustering the columns of W.

    The initial partition comes from clustering near-unregularized
    per-task estimates (a vanishing-ridge fit, so the column norms are
    not distorted by shrinkage), or the supplied ``w_init`` (warm start
    from a relaxed solution).  A re-clustering is only adopted if it
    lowers the within-cluster inertia of the current W, so the penalized
    objective is non-increasing across rounds; the loop stops as soon as
    the partition is stable.
    """
    loss = get_loss(loss)
    if w_init is None:
        seed_config = replace(fit_config, lam=1e-10)
        seed_fit = fit_weights(
            data, loss, FrobeniusPenalty(weights.eps_within), seed_config
        )
        W = seed_fit.W
    else:
        W = np.array(w_init, dtype=float)
    part = kmeans_tasks(W, config).canonical()

    result = None
    for _ in range(config.max_outer_iters):
        result = fit_weights(
            data, loss, FixedMetricPenalty(part, weights), fit_config, w_init=W
        )
        W = result.W
        cand = kmeans_tasks(W, config).canonical()
        if cand == part:
            break
        if omega_within(W, partition_projection(cand)) < omega_within(
            W, partition_projection(part)
        ):
            part = cand
        else:
            break  # incumbent partition is at least as good: stable
    return result, part


def reproject_sigma(result, r, restarts=3, seed=0, max_iters=100):
    """Round a learned metric to a partition: k-means on the rows of the
    r leading eigenvectors of Sigma*, each scaled by its eigenvalue so
    that uninformative directions (eigenvalue at the box floor) do not
    drown the structured ones.  Invariant to eigenvector sign flips."""
    if result.right is None:
        raise ValueError("result carries no right factor; use cluster_norm_sq")
    m = result.right.shape[0]
    if r > m:
        raise ValueError(f"r={r} exceeds m={m}")
    order = np.argsort(-result.lambda_star, kind="stable")[:r]
    rows = result.right[:, order] * result.lambda_star[order]
    labels, _ = kmeans_points(rows, r, restarts, seed, max_iters)
    return Partition.from_labels(labels)


def kmeans_relaxation_value(W, p, lam):
    """Closed form of the center-penalized K-means objective after
    optimizing the cluster centers:

        tr[ Pi W^T W Pi (Pi M Pi / lam + I)^{-1} ].
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    W = np.asarray(W, dtype=float)
    m = W.shape[1]
    if p.m != m:
        raise ValueError(f"partition m={p.m} does not match W columns {m}")
    _, Pi = projection_matrices(m)
    M = partition_projection(p)
    C = Pi @ (W.T @ W) @ Pi
    S = Pi @ M @ Pi / lam + np.eye(m)
    return float(np.trace(np.linalg.solve(S, C)))
