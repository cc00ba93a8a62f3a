"""Average training loss of a task-weight matrix and its gradient."""

import numpy as np

from .losses import get_loss


def _check_weight_shape(W, data):
    W = np.asarray(W, dtype=float)
    if W.shape != (data.d, data.m):
        raise ValueError(f"weight matrix shape {W.shape} != (d, m) = ({data.d}, {data.m})")
    return W


def _margins(W, data):
    # u_i = x_i . w_{t(i)}
    return (data.X @ W)[np.arange(data.n), data.tasks]


def empirical_risk(W, data, loss):
    """(1/n) sum of per-example losses at the task-specific predictions."""
    W = _check_weight_shape(W, data)
    loss = get_loss(loss)
    u = _margins(W, data)
    return float(np.sum(loss.value(u, data.y)) / data.n)


def empirical_risk_grad(W, data, loss):
    """Gradient of :func:`empirical_risk` in W; column t only sees task t's examples."""
    W = _check_weight_shape(W, data)
    loss = get_loss(loss)
    u = _margins(W, data)
    lp = loss.derivative(u, data.y)
    R = np.zeros((data.n, data.m))
    R[np.arange(data.n), data.tasks] = lp
    return (data.X.T @ R) / data.n
