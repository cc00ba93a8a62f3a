"""Synthetic clustered-tasks benchmark generator and its train/test split.

Tasks come in clusters with orthogonal supports: each cluster center
occupies its own block of the first d-2 coordinates, every task adds a
small deviation on its cluster's block plus two shared trailing
features, inputs are standard normal and outputs carry additive
Gaussian noise.
"""

from dataclasses import dataclass
from math import ceil

import numpy as np

from .data import TaskDataset
from .partitions import Partition


@dataclass
class SyntheticConfig:
    d: int = 30
    clusters: int = 2
    tasks_per_cluster: int = 2
    var_center: float = 900.0
    var_task: float = 16.0
    var_noise: float = 150.0
    points_per_task: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.d < 4 or self.d % 2 != 0:
            raise ValueError("d must be even and >= 4")
        if self.clusters < 1 or self.tasks_per_cluster < 1:
            raise ValueError("need at least one cluster and one task per cluster")
        if (self.d - 2) % self.clusters != 0:
            raise ValueError(
                f"d-2={self.d - 2} must split evenly across {self.clusters} clusters"
            )
        if self.points_per_task < 1:
            raise ValueError("points_per_task must be >= 1")
        for name in ("var_center", "var_task", "var_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class SyntheticTruth:
    w_true: np.ndarray  # (d, m) generating weight matrix
    centers: np.ndarray  # (d, clusters); support only on the cluster's block
    partition: Partition


def generate(config):
    """Draw one synthetic world; deterministic per config.seed."""
    rng = np.random.default_rng(config.seed)
    d, c, tpc = config.d, config.clusters, config.tasks_per_cluster
    m = c * tpc
    block = (d - 2) // c
    sd_center = np.sqrt(config.var_center)
    sd_task = np.sqrt(config.var_task)
    sd_noise = np.sqrt(config.var_noise)

    centers = np.zeros((d, c))
    for j in range(c):
        centers[j * block : (j + 1) * block, j] = rng.normal(0.0, sd_center, block)

    assignment = tuple(t // tpc for t in range(m))
    W = np.zeros((d, m))
    for t in range(m):
        j = assignment[t]
        sl = slice(j * block, (j + 1) * block)
        W[sl, t] = centers[sl, j] + rng.normal(0.0, sd_task, block)
        W[d - 2 :, t] = rng.normal(0.0, sd_task, 2)

    pts = config.points_per_task
    X = np.empty((m * pts, d))
    y = np.empty(m * pts)
    tasks = np.repeat(np.arange(m), pts)
    for t in range(m):
        sl = slice(t * pts, (t + 1) * pts)
        Xt = rng.standard_normal((pts, d))
        X[sl] = Xt
        y[sl] = Xt @ W[:, t] + rng.normal(0.0, sd_noise, pts)

    truth = SyntheticTruth(w_true=W, centers=centers, partition=Partition(assignment, c))
    return TaskDataset(X, y, tasks, m=m), truth


def train_test_split(data, truth, n_train, fold, seed):
    """Training-fold split: n_train points split equally across clusters,
    then 5/6 to the first task of each cluster and 1/6 to the second
    (per-task counts rounded, first task gets ceil(5 n_c / 6)).  Folds
    0..2 use disjoint slices of a seeded per-task shuffle; everything
    outside the chosen fold's training slice is the test set.
    """
    if fold not in (0, 1, 2):
        raise ValueError(f"fold must be 0, 1 or 2, got {fold}")
    if n_train < 1:
        raise ValueError("n_train must be >= 1")
    p = truth.partition
    c = p.r
    tpc = p.m // c
    if tpc != 2 or p.m != 2 * c:
        raise ValueError("split rule is defined for exactly two tasks per cluster")

    base, rem = divmod(n_train, c)
    counts = np.zeros(p.m, dtype=int)
    for j in range(c):
        n_c = base + (1 if j < rem else 0)
        members = [t for t in range(p.m) if p.assignment[t] == j]
        first = min(ceil(5 * n_c / 6), n_c)
        counts[members[0]] = first
        counts[members[1]] = n_c - first

    rng = np.random.default_rng(seed)
    train_idx = []
    test_idx = []
    for t in range(p.m):
        idx = data.task_indices(t)
        perm = rng.permutation(idx)
        k = counts[t]
        if (fold + 1) * k > idx.size:
            raise ValueError(
                f"fold {fold} needs {(fold + 1) * k} points for task {t} "
                f"but only {idx.size} are available"
            )
        chosen = perm[fold * k : (fold + 1) * k]
        train_idx.append(np.sort(chosen))
        test_idx.append(np.sort(np.setdiff1d(idx, chosen)))
    return (
        data.subset(np.concatenate(train_idx)),
        data.subset(np.concatenate(test_idx)),
    )
