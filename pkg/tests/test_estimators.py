import numpy as np
import pytest
from sklearn.base import clone

from taskclust.data import TaskDataset
from taskclust.estimators import AlternatingKMeansModel, MultiTaskModel
from taskclust.losses import SquareLoss
from taskclust.partitions import PenaltyWeights
from taskclust.regularizers import ClusterNormPenalty
from taskclust.solver import FitConfig, fit_weights


def toy_problem(rng, n=60, d=3, m=3):
    X = rng.normal(size=(n, d))
    tasks = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    w = rng.normal(size=(d, m))
    y = np.einsum("ij,ji->i", X, w[:, tasks]) + 0.1 * rng.normal(size=n)
    return X, y, tasks


def test_get_params_set_params_clone():
    est = MultiTaskModel(penalty="frobenius", lam=0.5, eps_within=2.0)
    params = est.get_params()
    assert params["penalty"] == "frobenius"
    assert params["lam"] == 0.5
    est2 = clone(est)
    assert est2.get_params() == params
    est2.set_params(lam=0.9)
    assert est2.lam == 0.9 and est.lam == 0.5


def test_fit_matches_functional_core():
    rng = np.random.default_rng(1)
    X, y, tasks = toy_problem(rng)
    est = MultiTaskModel(
        penalty="cluster_norm", lam=0.05, eps_mean=0.2, eps_between=1.0,
        eps_within=4.0, n_clusters=2,
    ).fit(X, y, tasks)
    data = TaskDataset(X, y, tasks)
    reg = ClusterNormPenalty(PenaltyWeights(0.2, 1.0, 4.0), 2)
    res = fit_weights(data, SquareLoss(), reg, FitConfig(lam=0.05))
    np.testing.assert_array_equal(est.coef_, res.W)
    assert est.n_iter_ == res.iterations
    assert est.cluster_norm_result_ is not None


def test_predict_shapes_and_values():
    rng = np.random.default_rng(2)
    X, y, tasks = toy_problem(rng)
    est = MultiTaskModel(penalty="frobenius", lam=0.01).fit(X, y, tasks)
    preds = est.predict(X, tasks)
    assert preds.shape == (X.shape[0],)
    direct = (X @ est.coef_)[np.arange(X.shape[0]), tasks]
    np.testing.assert_array_equal(preds, direct)


def test_single_task_default():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 2))
    y = X @ np.array([1.0, -2.0]) + 0.01 * rng.normal(size=30)
    est = MultiTaskModel(penalty="frobenius", lam=1e-8).fit(X, y)
    assert est.coef_.shape == (2, 1)
    np.testing.assert_allclose(est.predict(X), X @ est.coef_[:, 0])
    np.testing.assert_allclose(est.coef_[:, 0], [1.0, -2.0], atol=0.01)


def test_unfitted_predict_raises():
    with pytest.raises(ValueError, match="not fitted"):
        MultiTaskModel().predict(np.zeros((2, 2)))


def test_bad_penalty_and_missing_partition():
    rng = np.random.default_rng(4)
    X, y, tasks = toy_problem(rng)
    with pytest.raises(ValueError, match="unknown penalty"):
        MultiTaskModel(penalty="lasso").fit(X, y, tasks)
    with pytest.raises(ValueError, match="partition"):
        MultiTaskModel(penalty="fixed_metric").fit(X, y, tasks)


def test_fixed_metric_with_partition():
    rng = np.random.default_rng(5)
    X, y, tasks = toy_problem(rng, m=4)
    est = MultiTaskModel(
        penalty="fixed_metric", partition=(0, 0, 1, 1), lam=0.05,
        eps_mean=0.2, eps_between=1.0, eps_within=4.0,
    ).fit(X, y, tasks)
    assert est.coef_.shape == (3, 4)
    assert np.all(np.diff(est.objective_trace_) <= 0)


def test_predict_task_range_checked():
    rng = np.random.default_rng(6)
    X, y, tasks = toy_problem(rng)
    est = MultiTaskModel(penalty="frobenius", lam=0.1).fit(X, y, tasks)
    with pytest.raises(ValueError, match="task"):
        est.predict(X[:2], [0, 99])
    with pytest.raises(ValueError, match="features"):
        est.predict(np.zeros((2, 9)), [0, 0])


def test_alternating_estimator():
    rng = np.random.default_rng(7)
    d, per = 4, 50
    w = np.zeros((d, 4))
    w[:2, :2] = 6.0
    w[2:, 2:] = -6.0
    X = rng.normal(size=(4 * per, d))
    tasks = np.repeat(np.arange(4), per)
    y = np.einsum("ij,ji->i", X, w[:, tasks]) + 0.3 * rng.normal(size=4 * per)
    est = AlternatingKMeansModel(
        lam=0.02, eps_mean=0.1, eps_between=0.5, eps_within=5.0, n_clusters=2, seed=0
    ).fit(X, y, tasks)
    assert est.partition_.canonical().assignment == (0, 0, 1, 1)
    assert est.coef_.shape == (4, 4)
    preds = est.predict(X[:5], tasks[:5])
    assert preds.shape == (5,)
    est2 = clone(est).fit(X, y, tasks)
    np.testing.assert_array_equal(est.coef_, est2.coef_)
