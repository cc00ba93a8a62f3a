"""Multi-task datasets and the CSV interchange formats.

Dataset CSV: header ``task,y,x1,...,xd``, one example per row, 0-based
integer task column.  Matrix CSV: header ``c1,...,cm``, one matrix row
per line, full float precision.
"""

import numpy as np


class TaskDataset:
    """Labeled examples partitioned into tasks.

    Holds ``X`` (n, d), ``y`` (n,) and ``tasks`` (n,) with integer task
    indices in [0, m).  Tasks may be empty; the index sets of the tasks
    partition [0, n).
    """

    def __init__(self, X, y, tasks, m=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        tasks = np.asarray(tasks)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0] or X.shape[0] != tasks.shape[0]:
            raise ValueError(
                f"inconsistent lengths: X {X.shape[0]}, y {y.shape[0]}, "
                f"tasks {tasks.shape[0]}"
            )
        if X.shape[0] == 0:
            raise ValueError("dataset must contain at least one example")
        if not np.issubdtype(tasks.dtype, np.integer):
            rounded = np.asarray(tasks, dtype=float)
            if not np.all(rounded == np.round(rounded)):
                raise ValueError("task indices must be integers")
            tasks = rounded.astype(int)
        if tasks.min() < 0:
            raise ValueError("task indices must be non-negative")
        if m is None:
            m = int(tasks.max()) + 1
        elif tasks.max() >= m:
            raise ValueError(f"task index {tasks.max()} out of range for m={m}")
        self.X = X
        self.y = y
        self.tasks = tasks.astype(int)
        self.m = int(m)
        self.n, self.d = X.shape
        self._indices = None

    def task_indices(self, t):
        """Example indices of task ``t``."""
        if not 0 <= t < self.m:
            raise ValueError(f"task {t} out of range for m={self.m}")
        if self._indices is None:
            self._indices = [np.flatnonzero(self.tasks == k) for k in range(self.m)]
        return self._indices[t]

    def subset(self, idx):
        """New dataset restricted to example indices ``idx`` (same m)."""
        idx = np.asarray(idx, dtype=int)
        return TaskDataset(self.X[idx], self.y[idx], self.tasks[idx], m=self.m)

    def pooled(self):
        """All examples merged into a single task (task 0, m = 1)."""
        return TaskDataset(self.X, self.y, np.zeros(self.n, dtype=int), m=1)

    def __repr__(self):
        return f"TaskDataset(n={self.n}, d={self.d}, m={self.m})"


def save_dataset_csv(data, path):
    header = "task,y," + ",".join(f"x{j + 1}" for j in range(data.d))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(data.n):
            feats = ",".join(_fmt(v) for v in data.X[i])
            fh.write(f"{data.tasks[i]},{_fmt(data.y[i])},{feats}\n")


def load_dataset_csv(path, m=None):
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if len(cols) < 3 or cols[0] != "task" or cols[1] != "y":
            raise ValueError(f"bad dataset header {header!r}; expected task,y,x1,...")
        expected = ["task", "y"] + [f"x{j + 1}" for j in range(len(cols) - 2)]
        if cols != expected:
            raise ValueError(f"bad dataset header {header!r}")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.size == 0:
        raise ValueError(f"{path}: no examples")
    if body.shape[1] != len(cols):
        raise ValueError(f"{path}: row width {body.shape[1]} != header width {len(cols)}")
    return TaskDataset(body[:, 2:], body[:, 1], body[:, 0], m=m)


def save_matrix_csv(A, path):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w") as fh:
        fh.write(",".join(f"c{j + 1}" for j in range(A.shape[1])) + "\n")
        for row in A:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def load_matrix_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if cols != [f"c{j + 1}" for j in range(len(cols))]:
            raise ValueError(f"bad matrix header {header!r}; expected c1,...,cm")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.size == 0:
        raise ValueError(f"{path}: empty matrix")
    if body.shape[1] != len(cols):
        raise ValueError(f"{path}: row width {body.shape[1]} != header width {len(cols)}")
    return body


def _fmt(v):
    return f"{float(v):.17g}"
