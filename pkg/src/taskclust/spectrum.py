"""Exact evaluation of the spectral-box norm and its gradient.

The squared norm of a d x m matrix A is

    |A|_c^2 = min { tr A S^{-1} A^T : alpha I <= S <= beta I, tr S = gamma },

which reduces, through the SVD of A, to allocating the trace budget
gamma over m eigenvalues lambda_i in [alpha, beta] so as to minimize
sum_i sigma_i^2 / lambda_i.  The only coupling is the trace constraint;
its dual variable nu >= 0 fixes every eigenvalue to

    lambda_i = clamp(sigma_i / sqrt(nu), alpha, beta).

The map nu -> sum_i lambda_i(nu) is piecewise smooth and non-increasing
with breakpoints at sigma_i^2/beta^2 and sigma_i^2/alpha^2, so the
optimal nu is found exactly by scanning the breakpoint intervals for
the one whose interior stationarity equation

    sqrt(nu) = (sum of mid-range sigma_i) / (gamma - alpha n- - beta n+)

is self-consistent.  Two degenerate branches need explicit handling:

* nu = 0: all positive sigma_i saturate at beta and the budget is still
  slack; the remainder is spread uniformly over zero-sigma entries
  (their objective contribution is zero, so any feasible fill is
  optimal; uniform is deterministic).
* flat dual: an interval with no mid-range entry whose clamped trace
  already equals gamma; any nu inside is optimal and the left endpoint
  is returned.
"""

from dataclasses import dataclass

import numpy as np

from .partitions import PenaltyWeights

# singular values below this fraction of the largest are snapped to zero
_ZERO_SV_RTOL = 1e-12
# endpoint attribution tolerance in the breakpoint interval scan
_ENDPOINT_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralBox:
    """Feasible metrics: eigenvalues in [alpha, beta], trace equal to gamma."""

    alpha: float
    beta: float
    gamma: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("matrix side m must be >= 1")
        if not (np.isfinite(self.alpha) and 0.0 < self.alpha <= self.beta):
            raise ValueError(
                f"need 0 < alpha <= beta, got alpha={self.alpha}, beta={self.beta}"
            )
        lo, hi = self.m * self.alpha, self.m * self.beta
        tol = 1e-12 * max(1.0, abs(hi))
        if not (lo - tol <= self.gamma <= hi + tol):
            raise ValueError(
                f"trace budget gamma={self.gamma} infeasible: "
                f"needs m*alpha={lo} <= gamma <= m*beta={hi}"
            )

    @classmethod
    def from_weights(cls, weights, r, m):
        """Box of the clustered-tasks relaxation for r clusters over m tasks.

        alpha = 1/eps_within, beta = 1/eps_between,
        gamma = (m - r + 1) alpha + (r - 1) beta.
        Requires eps_within > eps_between (a degenerate alpha = beta box
        can only be built through the plain constructor).
        """
        if not isinstance(weights, PenaltyWeights):
            weights = PenaltyWeights(*weights)
        if not weights.eps_within > weights.eps_between:
            raise ValueError(
                "clustered regime requires eps_within > eps_between "
                f"(got {weights.eps_within} <= {weights.eps_between})"
            )
        if not 1 <= r <= m:
            raise ValueError(f"cluster count r={r} out of range for m={m}")
        alpha = 1.0 / weights.eps_within
        beta = 1.0 / weights.eps_between
        gamma = (m - r + 1) * alpha + (r - 1) * beta
        return cls(alpha, beta, gamma, m)


def make_spectral_box(weights, r, m):
    """Alias for :meth:`SpectralBox.from_weights`."""
    return SpectralBox.from_weights(weights, r, m)


@dataclass
class ClusterNormResult:
    """Optimal spectrum allocation for one matrix (or bare singular values).

    ``sigma`` is the zero-padded, descending length-m singular spectrum;
    ``lambda_star`` is aligned with it.  ``left``/``right`` hold the
    singular factors when the result came from a matrix (``left`` is
    d x k with k = min(d, m); ``right`` is the full m x m orthonormal
    right factor) and are needed for gradients and for materializing the
    optimal metric.
    """

    value: float
    lambda_star: np.ndarray
    nu_star: float
    sigma: np.ndarray
    box: SpectralBox
    left: np.ndarray = None
    right: np.ndarray = None


def _spectrum_value(sigma, lam):
    return float(np.sum(sigma * sigma / lam))


def solve_spectrum(sigma, box):
    """Minimize sum sigma_i^2/lambda_i over the box-and-trace feasible set.

    ``sigma`` must already be padded to length m (zeros for missing
    singular values).  Returns a :class:`ClusterNormResult` without
    singular factors.
    """
    sigma = np.array(sigma, dtype=float)
    if sigma.shape != (box.m,):
        raise ValueError(f"expected {box.m} singular values, got shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)) or np.any(sigma < 0):
        raise ValueError("singular values must be finite and non-negative")
    smax = sigma.max()
    if smax > 0:
        sigma[sigma < _ZERO_SV_RTOL * smax] = 0.0

    a, b, g = box.alpha, box.beta, box.gamma
    pos = sigma > 0
    n_pos = int(pos.sum())
    n_zero = box.m - n_pos
    gtol = 1e-12 * max(1.0, abs(g))

    # nu = 0 branch: even with every positive-sigma eigenvalue at beta the
    # budget is not used up; zero-sigma entries absorb the slack.
    trace_at_zero = n_pos * b + n_zero * a
    if trace_at_zero < g - gtol:
        fill = (g - n_pos * b) / n_zero  # n_zero > 0 since g <= m*beta
        lam = np.where(pos, b, np.clip(fill, a, b))
        return ClusterNormResult(
            value=_spectrum_value(sigma, lam),
            lambda_star=lam,
            nu_star=0.0,
            sigma=sigma,
            box=box,
        )

    sq = sigma * sigma
    breakpoints = np.unique(np.concatenate([[0.0], sq / (b * b), sq / (a * a)]))
    edges = list(breakpoints) + [np.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if not hi > lo:
            continue
        probe = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * lo + 1.0
        at_beta = sq > b * b * probe  # sigma_i > beta sqrt(nu)
        at_alpha = sq < a * a * probe  # sigma_i < alpha sqrt(nu)
        mid = ~(at_beta | at_alpha)
        denom = g - a * at_alpha.sum() - b * at_beta.sum()
        if not mid.any():
            if abs(denom) <= gtol:
                # flat dual: clamped trace already matches the budget
                lam = np.where(at_beta, b, a)
                return ClusterNormResult(
                    value=_spectrum_value(sigma, lam),
                    lambda_star=lam,
                    nu_star=float(lo),
                    sigma=sigma,
                    box=box,
                )
            continue
        if denom <= 0:
            continue
        root = sigma[mid].sum() / denom  # sqrt(nu) candidate
        cand = root * root
        lo_ok = cand >= lo - _ENDPOINT_RTOL * max(1.0, lo)
        hi_ok = (not np.isfinite(hi)) or cand < hi - _ENDPOINT_RTOL * max(1.0, hi)
        if lo_ok and hi_ok:
            lam = np.clip(sigma / root, a, b)
            return ClusterNormResult(
                value=_spectrum_value(sigma, lam),
                lambda_star=lam,
                nu_star=float(cand),
                sigma=sigma,
                box=box,
            )
    raise RuntimeError("breakpoint scan found no stationary dual point (unexpected)")


def cluster_norm_sq(A, box):
    """Squared spectral-box norm of A, retaining factors for the gradient."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if A.shape[1] != box.m:
        raise ValueError(f"matrix has {A.shape[1]} columns but box.m={box.m}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    left, s, vt = np.linalg.svd(A, full_matrices=True)
    k = min(A.shape)
    sigma = np.zeros(box.m)
    sigma[:k] = s
    result = solve_spectrum(sigma, box)
    result.left = left[:, :k]
    result.right = vt.T  # full m x m orthonormal basis
    return result


def cluster_norm_sq_grad(result):
    """Gradient of the squared norm in the matrix argument.

    d|A|_c^2 / dA = L diag(2 sigma_i / lambda_i^*) R^T over the leading
    min(d, m) singular triplets.  For a centered argument the caller
    composes with the centering projection on the right.
    """
    if result.left is None or result.right is None:
        raise ValueError("result carries no singular factors; use cluster_norm_sq")
    k = result.left.shape[1]
    scale = 2.0 * result.sigma[:k] / result.lambda_star[:k]
    return (result.left * scale) @ result.right[:, :k].T


def reconstruct_sigma_star(result):
    """Materialize the optimal metric S* = V diag(lambda*) V^T."""
    if result.right is None:
        raise ValueError("result carries no right factor; use cluster_norm_sq")
    V = result.right
    return (V * result.lambda_star) @ V.T
