import numpy as np
import pytest

from oracles import (
    fd_grad,
    spectrum_min_bisect,
    spectrum_min_grid2,
    spectrum_min_pg,
)
from taskclust.partitions import PenaltyWeights
from taskclust.spectrum import (
    ClusterNormResult,
    SpectralBox,
    cluster_norm_sq,
    cluster_norm_sq_grad,
    make_spectral_box,
    reconstruct_sigma_star,
    solve_spectrum,
)


def random_box(rng, m):
    a = float(rng.uniform(0.05, 2.0))
    b = a + float(rng.uniform(0.01, 3.0))
    g = float(rng.uniform(m * a, m * b))
    return SpectralBox(a, b, g, m)


# ---------------------------------------------------------------- box


def test_make_spectral_box_values():
    box = make_spectral_box(PenaltyWeights(1.0, 1.0, 2.0), r=2, m=4)
    assert box.alpha == 0.5
    assert box.beta == 1.0
    assert box.gamma == pytest.approx(3 * 0.5 + 1.0)


def test_make_spectral_box_extreme_r():
    w = PenaltyWeights(1.0, 0.5, 4.0)
    m = 5
    box1 = make_spectral_box(w, 1, m)
    assert box1.gamma == pytest.approx(m * box1.alpha)
    boxm = make_spectral_box(w, m, m)
    assert boxm.gamma == pytest.approx(boxm.alpha + (m - 1) * boxm.beta)


def test_make_spectral_box_rejects_bad_inputs():
    with pytest.raises(ValueError, match="eps_within > eps_between"):
        make_spectral_box(PenaltyWeights(1.0, 2.0, 2.0), 1, 3)
    with pytest.raises(ValueError, match="out of range"):
        make_spectral_box(PenaltyWeights(1.0, 1.0, 2.0), 5, 3)
    with pytest.raises(ValueError, match="infeasible"):
        SpectralBox(1.0, 2.0, 7.0, 3)
    with pytest.raises(ValueError, match="alpha"):
        SpectralBox(2.0, 1.0, 4.0, 3)
    # degenerate alpha = beta allowed through the plain constructor
    SpectralBox(1.5, 1.5, 4.5, 3)


# ---------------------------------------------------------------- solve_spectrum


def test_worked_kkt_case():
    res = solve_spectrum([2.0, 1.0], SpectralBox(0.5, 1.5, 2.0, 2))
    assert res.value == pytest.approx(4.5, abs=1e-10)
    np.testing.assert_allclose(res.lambda_star, [4.0 / 3.0, 2.0 / 3.0], atol=1e-10)
    assert res.nu_star == pytest.approx(2.25, abs=1e-10)
    # independent oracles agree
    assert spectrum_min_grid2([2, 1], 0.5, 1.5, 2.0) == pytest.approx(4.5, abs=1e-6)
    assert spectrum_min_pg(np.array([2.0, 1.0]), 0.5, 1.5, 2.0) == pytest.approx(
        4.5, abs=1e-8
    )


def test_flat_dual_case():
    res = solve_spectrum([10.0, 1.0], SpectralBox(0.5, 1.5, 2.0, 2))
    assert res.value == pytest.approx(100 / 1.5 + 1 / 0.5, abs=1e-6)
    np.testing.assert_allclose(res.lambda_star, [1.5, 0.5])
    # left endpoint of the flat interval
    assert res.nu_star == pytest.approx(4.0, abs=1e-10)
    assert spectrum_min_grid2([10, 1], 0.5, 1.5, 2.0) == pytest.approx(
        res.value, rel=1e-8
    )


def test_nu_zero_boundary_case():
    res = solve_spectrum([0.0, 0.0, 3.0], SpectralBox(0.1, 1.0, 2.5, 3))
    assert res.value == 9.0
    np.testing.assert_allclose(res.lambda_star, [0.75, 0.75, 1.0])
    assert res.nu_star == 0.0


def test_all_zero_sigma():
    box = SpectralBox(0.2, 1.0, 2.0, 4)
    res = solve_spectrum(np.zeros(4), box)
    assert res.value == 0.0
    np.testing.assert_allclose(res.lambda_star, np.full(4, 0.5))
    assert np.all(res.lambda_star >= box.alpha) and np.all(res.lambda_star <= box.beta)


def test_all_zero_sigma_tight_budget():
    # gamma = m * alpha leaves no slack: uniform fill equals alpha
    box = SpectralBox(0.5, 2.0, 2.0, 4)
    res = solve_spectrum(np.zeros(4), box)
    assert res.value == 0.0
    np.testing.assert_allclose(res.lambda_star, np.full(4, 0.5))


def test_solve_spectrum_validation():
    box = SpectralBox(0.5, 1.5, 2.0, 2)
    with pytest.raises(ValueError, match="expected 2"):
        solve_spectrum([1.0, 2.0, 3.0], box)
    with pytest.raises(ValueError, match="non-negative"):
        solve_spectrum([1.0, -1.0], box)
    with pytest.raises(ValueError, match="finite"):
        solve_spectrum([np.inf, 1.0], box)


def test_oracle_equivalence_random():
    rng = np.random.default_rng(101)
    for _ in range(100):
        m = int(rng.integers(2, 5))
        sigma = rng.uniform(0.0, 10.0, m)
        box = random_box(rng, m)
        res = solve_spectrum(sigma, box)
        ref = spectrum_min_pg(sigma, box.alpha, box.beta, box.gamma)
        assert res.value == pytest.approx(ref, rel=1e-4)
        ref2 = spectrum_min_bisect(sigma, box.alpha, box.beta, box.gamma)
        assert res.value == pytest.approx(ref2, rel=1e-6)


def test_feasibility_and_stationarity():
    rng = np.random.default_rng(103)
    for _ in range(200):
        m = int(rng.integers(2, 7))
        sigma = rng.uniform(0.0, 8.0, m)
        if rng.uniform() < 0.3:
            sigma[rng.integers(m)] = 0.0
        box = random_box(rng, m)
        res = solve_spectrum(sigma, box)
        assert np.all(res.lambda_star >= box.alpha - 1e-12)
        assert np.all(res.lambda_star <= box.beta + 1e-12)
        assert res.lambda_star.sum() == pytest.approx(box.gamma, abs=1e-8 * box.gamma)
        assert res.nu_star >= 0.0
        if res.nu_star > 0:
            clamped = np.clip(sigma / np.sqrt(res.nu_star), box.alpha, box.beta)
            assert clamped.sum() == pytest.approx(box.gamma, abs=1e-8 * box.gamma)
        assert res.value == pytest.approx(
            float(np.sum(sigma[sigma > 0] ** 2 / res.lambda_star[sigma > 0])),
            rel=1e-8,
        )


def test_clamped_trace_monotone_in_nu():
    rng = np.random.default_rng(107)
    for _ in range(20):
        m = int(rng.integers(2, 6))
        sigma = rng.uniform(0.0, 5.0, m)
        box = random_box(rng, m)
        nus = np.geomspace(1e-8, 1e8, 120)
        traces = [
            np.clip(sigma / np.sqrt(nu), box.alpha, box.beta).sum() for nu in nus
        ]
        assert np.all(np.diff(traces) <= 1e-12)


# ---------------------------------------------------------------- cluster_norm_sq


def test_zero_matrix():
    box = SpectralBox(0.5, 1.5, 2.0, 2)
    res = cluster_norm_sq(np.zeros((3, 2)), box)
    assert res.value == 0.0
    np.testing.assert_allclose(res.lambda_star, [1.0, 1.0])


def test_frobenius_degeneration():
    rng = np.random.default_rng(109)
    for _ in range(20):
        d, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        A = rng.normal(size=(d, m))
        alpha = float(rng.uniform(0.1, 3.0))
        box = SpectralBox(alpha, alpha, m * alpha, m)
        res = cluster_norm_sq(A, box)
        assert res.value == pytest.approx(np.sum(A * A) / alpha, rel=1e-12)


def test_limit_box_matches_squared_trace_norm():
    rng = np.random.default_rng(113)
    for _ in range(20):
        d, m = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        A = rng.normal(size=(d, m))
        s = np.linalg.svd(A, compute_uv=False)
        if s.min() <= 1e-3:
            continue
        box = SpectralBox(1e-8, 1e8, 1.0, m)
        res = cluster_norm_sq(A, box)
        assert res.value == pytest.approx(float(s.sum() ** 2), rel=1e-4)


def test_grid_oracle_on_matrices():
    rng = np.random.default_rng(127)
    for _ in range(30):
        m = int(rng.integers(2, 5))
        d = int(rng.integers(1, 6))
        A = rng.normal(size=(d, m)) * rng.uniform(0.5, 3.0)
        box = random_box(rng, m)
        res = cluster_norm_sq(A, box)
        s = np.linalg.svd(A, compute_uv=False)
        sigma = np.zeros(m)
        sigma[: min(d, m)] = s
        ref = spectrum_min_pg(sigma, box.alpha, box.beta, box.gamma)
        assert res.value == pytest.approx(ref, rel=1e-4)


def test_homogeneity():
    rng = np.random.default_rng(131)
    A = rng.normal(size=(4, 3))
    box = random_box(rng, 3)
    base = cluster_norm_sq(A, box).value
    for c in (0.5, 2.0, -3.0, 7.5):
        assert cluster_norm_sq(c * A, box).value == pytest.approx(
            c * c * base, rel=1e-10
        )


def test_triangle_inequality_on_sqrt():
    rng = np.random.default_rng(137)
    for _ in range(50):
        m = int(rng.integers(2, 6))
        d = int(rng.integers(1, 6))
        box = random_box(rng, m)
        A = rng.normal(size=(d, m))
        B = rng.normal(size=(d, m))
        na = np.sqrt(cluster_norm_sq(A, box).value)
        nb = np.sqrt(cluster_norm_sq(B, box).value)
        nab = np.sqrt(cluster_norm_sq(A + B, box).value)
        assert nab <= na + nb + 1e-9 * (1 + na + nb)


def test_rejects_non_finite():
    box = SpectralBox(0.5, 1.5, 2.0, 2)
    with pytest.raises(ValueError, match="non-finite"):
        cluster_norm_sq(np.array([[np.nan, 0.0]]), box)


# ---------------------------------------------------------------- gradient


def test_gradient_worked_case():
    box = SpectralBox(0.5, 1.5, 2.0, 2)
    res = cluster_norm_sq(np.diag([2.0, 1.0]), box)
    np.testing.assert_allclose(
        cluster_norm_sq_grad(res), np.diag([3.0, 3.0]), atol=1e-10
    )


def test_gradient_zero_matrix():
    box = SpectralBox(0.5, 1.5, 2.0, 2)
    res = cluster_norm_sq(np.zeros((3, 2)), box)
    np.testing.assert_allclose(cluster_norm_sq_grad(res), np.zeros((3, 2)))


def test_gradient_requires_factors():
    res = solve_spectrum([1.0, 2.0], SpectralBox(0.5, 1.5, 2.0, 2))
    with pytest.raises(ValueError, match="factors"):
        cluster_norm_sq_grad(res)
    with pytest.raises(ValueError, match="factor"):
        reconstruct_sigma_star(res)


def _spaced_singular_values(rng, d, m):
    # keep singular values well separated so the norm is differentiable
    while True:
        A = rng.normal(size=(d, m))
        s = np.linalg.svd(A, compute_uv=False)
        gaps_ok = s.size < 2 or np.min(s[:-1] - s[1:]) > 0.2
        if s.min() > 0.1 and gaps_ok:
            return A


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(139)
    worst = 0.0
    for _ in range(30):
        m = int(rng.integers(2, 5))
        d = int(rng.integers(2, 6))
        A = _spaced_singular_values(rng, d, m)
        box = random_box(rng, m)
        res = cluster_norm_sq(A, box)
        G = cluster_norm_sq_grad(res)
        F = fd_grad(lambda V: cluster_norm_sq(V, box).value, A, h=1e-6)
        worst = max(worst, np.max(np.abs(G - F)) / max(1.0, np.max(np.abs(F))))
    assert worst < 1e-4


# ---------------------------------------------------------------- sigma star


def test_sigma_star_zero_matrix():
    box = SpectralBox(0.5, 1.5, 2.4, 2)
    res = cluster_norm_sq(np.zeros((3, 2)), box)
    np.testing.assert_allclose(reconstruct_sigma_star(res), 1.2 * np.eye(2))


def test_sigma_star_worked_case():
    box = SpectralBox(0.5, 1.5, 2.0, 2)
    res = cluster_norm_sq(np.diag([2.0, 1.0]), box)
    np.testing.assert_allclose(
        reconstruct_sigma_star(res), np.diag([4.0 / 3.0, 2.0 / 3.0]), atol=1e-12
    )


def test_sigma_star_consistency():
    rng = np.random.default_rng(149)
    for _ in range(30):
        m = int(rng.integers(2, 6))
        d = int(rng.integers(1, 7))
        A = rng.normal(size=(d, m))
        box = random_box(rng, m)
        res = cluster_norm_sq(A, box)
        S = reconstruct_sigma_star(res)
        np.testing.assert_allclose(S, S.T, atol=1e-12)
        eigs = np.linalg.eigvalsh(S)
        assert np.all(eigs >= box.alpha - 1e-9)
        assert np.all(eigs <= box.beta + 1e-9)
        assert np.trace(S) == pytest.approx(box.gamma, rel=1e-10)
        direct = float(np.trace(A @ np.linalg.solve(S, A.T)))
        assert direct == pytest.approx(res.value, rel=1e-8)
