"""Penalized empirical-risk minimization over the task-weight matrix.

Accelerated (Nesterov-momentum) gradient descent with Armijo-backtracked
steps and a monotone safeguard: a momentum step is only kept if it
lowers the objective, otherwise the momentum is reset and a plain
descent step is taken.  Everything is deterministic, starting at W = 0.
Momentum matters here: the penalized objectives are badly conditioned
(coupling directions carry curvature ~ lam*eps while the data term is
O(1)), where plain descent needs tens of thousands of iterations.
"""

from dataclasses import dataclass, field

import numpy as np

from .losses import get_loss
from .risk import empirical_risk, empirical_risk_grad


@dataclass
class FitConfig:
    """Solver settings.  ``grad_tol`` is relative: the fit stops once
    |grad|_F <= grad_tol * (1 + |objective|).  ``seed`` is reserved for
    randomized initialization schemes; the shipped solver starts at W = 0."""

    lam: float = 1.0
    max_iters: int = 5000
    grad_tol: float = 1e-5
    step_init: float = 1.0
    step_shrink: float = 0.5
    armijo: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.grad_tol > 0 and self.step_init > 0):
            raise ValueError("tolerances and steps must be positive")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if not 0 < self.armijo < 1:
            raise ValueError("armijo must lie in (0, 1)")


@dataclass
class FitResult:
    W: np.ndarray
    objective_trace: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    cluster_norm: object = None  # ClusterNormResult when the penalty has one


def objective(W, data, loss, reg, lam):
    """Empirical risk plus lam times the penalty."""
    return empirical_risk(W, data, loss) + lam * reg.value(W)


def objective_grad(W, data, loss, reg, lam):
    return empirical_risk_grad(W, data, loss) + lam * np.asarray(reg.grad(W))


def _backtrack(value, anchor, f_anchor, G, gsq, step, config):
    """Armijo search along -G from the anchor; returns (point, f, t) or None."""
    t = step
    while t > 1e-20:
        cand = anchor - t * G
        f_cand = value(cand)
        if np.isfinite(f_cand) and f_cand <= f_anchor - config.armijo * t * gsq:
            return cand, f_cand, t
        t *= config.step_shrink
    return None


def fit_weights(data, loss, reg, config, w_init=None):
    """Descend the penalized objective until the gradient test or max_iters.

    The returned objective trace is non-increasing by construction.
    Raises RuntimeError if a non-finite objective or gradient shows up.
    """
    loss = get_loss(loss)
    if w_init is None:
        W = np.zeros((data.d, data.m))
    else:
        W = np.array(w_init, dtype=float)
        if W.shape != (data.d, data.m):
            raise ValueError(f"w_init shape {W.shape} != ({data.d}, {data.m})")
    lam = config.lam

    def value(V):
        return objective(V, data, loss, reg, lam)

    def gradient(V, it):
        G = objective_grad(V, data, loss, reg, lam)
        if not np.all(np.isfinite(G)):
            raise RuntimeError(f"non-finite gradient at iteration {it}")
        return G

    f = value(W)
    if not np.isfinite(f):
        raise RuntimeError("non-finite objective at iteration 0")
    trace = [f]
    step = config.step_init
    converged = False
    gnorm = np.inf
    W_prev = W
    momentum = 1.0  # Nesterov t_k sequence
    for it in range(config.max_iters):
        momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum))
        Y = W + ((momentum - 1.0) / momentum_next) * (W - W_prev)
        G = gradient(Y, it)
        gnorm = float(np.linalg.norm(G))
        if gnorm <= config.grad_tol * (1.0 + abs(f)):
            converged = True
            break
        f_before = f
        hit = _backtrack(value, Y, value(Y), G, gnorm * gnorm, step, config)
        if hit is not None and hit[1] <= f:
            W_prev, (W, f, t) = W, hit
            momentum = momentum_next
        else:
            # momentum overshoots: restart it and take a plain descent step
            momentum = 1.0
            W_prev = W
            G = gradient(W, it)
            gnorm = float(np.linalg.norm(G))
            if gnorm <= config.grad_tol * (1.0 + abs(f)):
                converged = True
                break
            hit = _backtrack(value, W, f, G, gnorm * gnorm, step, config)
            if hit is None:
                break  # no decrease possible at float precision
            W, f, t = hit
        if not f < f_before:
            break  # objective at its float floor: no measurable progress
        trace.append(f)
        step = 2.0 * t

    final_grad = objective_grad(W, data, loss, reg, lam)
    gnorm = float(np.linalg.norm(final_grad))
    cn = reg.norm_result(W) if hasattr(reg, "norm_result") else None
    return FitResult(
        W=W,
        objective_trace=np.asarray(trace),
        grad_norm=gnorm,
        iterations=len(trace) - 1,
        converged=converged,
        cluster_norm=cn,
    )


def predict(W, x, task):
    """Prediction of task ``task`` at a single input vector."""
    W = np.asarray(W, dtype=float)
    if not 0 <= task < W.shape[1]:
        raise ValueError(f"task {task} out of range for m={W.shape[1]}")
    return float(W[:, task] @ np.asarray(x, dtype=float))


def _predictions(W, data):
    W = np.asarray(W, dtype=float)
    if W.shape != (data.d, data.m):
        raise ValueError(f"weight matrix shape {W.shape} != ({data.d}, {data.m})")
    return (data.X @ W)[np.arange(data.n), data.tasks]


def rmse(W, data):
    """Mean over (non-empty) tasks of the per-task root-mean-square error."""
    u = _predictions(W, data)
    vals = []
    for t in range(data.m):
        idx = data.task_indices(t)
        if idx.size:
            vals.append(np.sqrt(np.mean((u[idx] - data.y[idx]) ** 2)))
    return float(np.mean(vals))


def misclassification_rate(W, data):
    """Mean over tasks of the sign-prediction error rate (labels in {-1, +1})."""
    if not np.all(np.abs(data.y) == 1.0):
        raise ValueError("misclassification rate requires labels in {-1, +1}")
    u = _predictions(W, data)
    pred = np.where(u >= 0, 1.0, -1.0)
    vals = []
    for t in range(data.m):
        idx = data.task_indices(t)
        if idx.size:
            vals.append(np.mean(pred[idx] != data.y[idx]))
    return float(np.mean(vals))
