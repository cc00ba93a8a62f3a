"""Partition algebra over tasks and the quadratic metrics it induces.

A partition of m tasks into r non-empty clusters yields the block
projection M (block-constant, M^2 = M, tr M = r).  Together with the
mean projection U = 11^T/m and the centering projection Pi = I - U it
splits any weight matrix's energy into mean / between-cluster /
within-cluster parts, and defines the block metric Sigma(M) weighted by
three positive coefficients.
"""

from dataclasses import dataclass

import numpy as np


def projection_matrices(m):
    """Mean projection U = 11^T/m and centering projection Pi = I - U."""
    if m < 1:
        raise ValueError("need at least one task")
    U = np.full((m, m), 1.0 / m)
    return U, np.eye(m) - U


@dataclass(frozen=True)
class Partition:
    """Cluster assignment of m tasks: labels in [0, r), every cluster non-empty."""

    assignment: tuple
    r: int

    def __post_init__(self):
        labels = tuple(int(c) for c in self.assignment)
        object.__setattr__(self, "assignment", labels)
        m = len(labels)
        if m == 0:
            raise ValueError("empty partition")
        if self.r < 1 or self.r > m:
            raise ValueError(f"cluster count r={self.r} out of range for m={m}")
        seen = set(labels)
        if min(labels) < 0 or max(labels) >= self.r:
            raise ValueError("cluster labels must lie in [0, r)")
        if seen != set(range(self.r)):
            raise ValueError("every cluster in [0, r) must be non-empty")

    @classmethod
    def from_labels(cls, labels):
        """Build from arbitrary labels, relabeled compactly by first occurrence."""
        remap = {}
        canon = []
        for c in labels:
            c = int(c)
            if c not in remap:
                remap[c] = len(remap)
            canon.append(remap[c])
        return cls(tuple(canon), len(remap))

    def canonical(self):
        """Same clustering with labels renumbered by first occurrence."""
        return Partition.from_labels(self.assignment)

    @property
    def m(self):
        return len(self.assignment)

    def cluster_sizes(self):
        sizes = np.zeros(self.r, dtype=int)
        for c in self.assignment:
            sizes[c] += 1
        return sizes

    def indicator(self):
        """The m x r binary assignment matrix E."""
        E = np.zeros((self.m, self.r))
        E[np.arange(self.m), list(self.assignment)] = 1.0
        return E


def partition_projection(p):
    """M = E (E^T E)^{-1} E^T: 1/|cluster| on same-cluster pairs, 0 elsewhere."""
    E = p.indicator()
    return (E / p.cluster_sizes()) @ E.T


@dataclass(frozen=True)
class PenaltyWeights:
    """Positive weights on the mean / between / within energy components."""

    eps_mean: float
    eps_between: float
    eps_within: float

    def __post_init__(self):
        for name in ("eps_mean", "eps_between", "eps_within"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")


def _trace_quad(W, S):
    # tr W S W^T for symmetric S
    return float(np.sum((W @ S) * W))


def omega_mean(W):
    """tr W U W^T: m times the squared norm of the mean task vector."""
    W = np.asarray(W, dtype=float)
    U, _ = projection_matrices(W.shape[1])
    return _trace_quad(W, U)


def omega_between(W, M):
    """tr W (M - U) W^T: dispersion of cluster means around the global mean."""
    W = np.asarray(W, dtype=float)
    _check_metric_dims(W, M)
    U, _ = projection_matrices(W.shape[1])
    return _trace_quad(W, M - U)


def omega_within(W, M):
    """tr W (I - M) W^T: dispersion of tasks around their cluster means."""
    W = np.asarray(W, dtype=float)
    _check_metric_dims(W, M)
    return _trace_quad(W, np.eye(W.shape[1]) - M)


def _check_metric_dims(W, M):
    M = np.asarray(M)
    if M.shape != (W.shape[1], W.shape[1]):
        raise ValueError(f"metric shape {M.shape} does not match m={W.shape[1]}")


def sigma_inv_matrix(p, weights):
    """eps_mean U + eps_between (M - U) + eps_within (I - M)."""
    m = p.m
    U, _ = projection_matrices(m)
    M = partition_projection(p)
    return (
        weights.eps_mean * U
        + weights.eps_between * (M - U)
        + weights.eps_within * (np.eye(m) - M)
    )


def sigma_matrix(p, weights):
    """Inverse of :func:`sigma_inv_matrix`: same projections, reciprocal weights."""
    inv = PenaltyWeights(
        1.0 / weights.eps_mean, 1.0 / weights.eps_between, 1.0 / weights.eps_within
    )
    return sigma_inv_matrix(p, inv)


def fixed_metric_penalty(W, p, weights):
    """tr W Sigma(M)^{-1} W^T for a known partition."""
    W = np.asarray(W, dtype=float)
    if W.shape[1] != p.m:
        raise ValueError(f"W has {W.shape[1]} columns but partition has m={p.m}")
    return _trace_quad(W, sigma_inv_matrix(p, weights))
