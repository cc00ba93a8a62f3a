"""Benchmark grid over methods, training sizes, seeds, and folds.

Each cell is an isolated run: generate the synthetic world for the
seed, split, fit one method, evaluate the mean test metric.  Cells
share nothing mutable, draw their method-internal randomness from a
stream derived from (seed, method, n_train, fold), and may therefore
run in parallel with scheduling-independent results.
"""

import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .alternating import KMeansConfig, alternate_fit, reproject_sigma, true_metric_fit
from .data import save_matrix_csv
from .losses import get_loss
from .partitions import PenaltyWeights, sigma_matrix
from .regularizers import (
    ClusterNormPenalty,
    FrobeniusPenalty,
    MultiTaskKernelPenalty,
    TraceNormSquaredPenalty,
)
from .solver import FitConfig, fit_weights, misclassification_rate, rmse
from .spectrum import reconstruct_sigma_star
from .synthetic import SyntheticConfig, generate, train_test_split

METHODS = (
    "frobenius",
    "mt_kernel",
    "trace",
    "cluster_norm",
    "true_metric",
    "kmeans_alt",
    "reprojected",
    "cn_init",
    "pooling",
)

RESULTS_HEADER = "method,n_train,seed,fold,metric,value,iters,seconds"
SUMMARY_HEADER = "method,n_train,metric,mean,std,cells"

DEFAULT_SPEC_TEXT = """\
# synthetic clustered-tasks benchmark: methods x sizes x seeds x folds
# (lambda/eps calibrated on generator seeds 100+; single-task ridge and the
# trace surrogate get their own lambda since their penalties live on very
# different scales)
methods = frobenius,trace,cluster_norm,mt_kernel,true_metric,kmeans_alt,reprojected,cn_init
n_train = 24,48,96,192,384
seeds = 0,1,2,3,4,5,6,7,8,9
folds = 0
loss = square
lambda = 0.01
lambda_frobenius = 3e-5
lambda_pooling = 3e-5
lambda_trace = 3e-4
eps_m = 0.1
eps_b = 0.2
eps_w = 20.0
clusters = 2
"""


@dataclass
class ExperimentSpec:
    methods: tuple
    n_train: tuple
    seeds: tuple
    folds: tuple = (0,)
    lam: float = 0.01
    eps_mean: float = 0.1
    eps_between: float = 0.2
    eps_within: float = 20.0
    clusters: int = 2
    loss: str = "square"
    max_iters: int = 5000
    grad_tol: float = 1e-5
    sigma_scale: float = 1.0
    lambda_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.methods = tuple(self.methods)
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
        for name in ("n_train", "seeds", "folds"):
            setattr(self, name, tuple(int(v) for v in getattr(self, name)))
        if not (self.methods and self.n_train and self.seeds and self.folds):
            raise ValueError("methods, n_train, seeds and folds must be non-empty")
        get_loss(self.loss)
        for m in self.lambda_overrides:
            if m not in METHODS:
                raise ValueError(f"lambda override for unknown method {m!r}")

    def weights(self):
        return PenaltyWeights(self.eps_mean, self.eps_between, self.eps_within)


_SPEC_KEYS = {
    "methods": ("methods", lambda v: tuple(s.strip() for s in v.split(",") if s.strip())),
    "n_train": ("n_train", lambda v: tuple(int(s) for s in v.split(","))),
    "seeds": ("seeds", lambda v: tuple(int(s) for s in v.split(","))),
    "folds": ("folds", lambda v: tuple(int(s) for s in v.split(","))),
    "lambda": ("lam", float),
    "eps_m": ("eps_mean", float),
    "eps_b": ("eps_between", float),
    "eps_w": ("eps_within", float),
    "clusters": ("clusters", int),
    "loss": ("loss", str),
    "max_iters": ("max_iters", int),
    "grad_tol": ("grad_tol", float),
    "sigma_scale": ("sigma_scale", float),
}


def parse_spec(text):
    """Parse the flat ``key = value`` experiment format ('#' comments)."""
    kwargs = {}
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"spec line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key.startswith("lambda_"):
            overrides[key[len("lambda_") :]] = float(value)
            continue
        if key not in _SPEC_KEYS:
            raise ValueError(f"spec line {lineno}: unknown key {key!r}")
        field_name, conv = _SPEC_KEYS[key]
        kwargs[field_name] = conv(value)
    for required in ("methods", "n_train", "seeds"):
        if required not in kwargs:
            raise ValueError(f"spec is missing required key {required!r}")
    return ExperimentSpec(lambda_overrides=overrides, **kwargs)


def load_spec(path):
    return parse_spec(Path(path).read_text())


def default_spec():
    return parse_spec(DEFAULT_SPEC_TEXT)


@dataclass
class ResultRow:
    method: str
    n_train: int
    seed: int
    fold: int
    metric: str
    value: float
    iters: int
    seconds: float

    def key(self):
        return (self.method, self.n_train, self.seed, self.fold)

    def deterministic_fields(self):
        """Everything except wall time (which cannot reproduce bit-for-bit)."""
        return (
            self.method,
            self.n_train,
            self.seed,
            self.fold,
            self.metric,
            f"{self.value:.17g}",
            self.iters,
        )

    def csv_line(self):
        return (
            f"{self.method},{self.n_train},{self.seed},{self.fold},"
            f"{self.metric},{self.value:.17g},{self.iters},{self.seconds:.6f}"
        )


def cell_seed(seed, method, n_train, fold):
    """Independent per-cell RNG stream key, stable across runs and platforms."""
    ss = np.random.SeedSequence(
        [int(seed), zlib.crc32(method.encode()), int(n_train), int(fold)]
    )
    return int(ss.generate_state(1)[0])


def fit_method(method, train, spec, method_seed, truth_partition=None):
    """Fit one method on a training set; returns W plus per-method extras."""
    loss = get_loss(spec.loss)
    weights = spec.weights()
    lam = spec.lambda_overrides.get(method, spec.lam)
    fit_cfg = FitConfig(lam=lam, max_iters=spec.max_iters, grad_tol=spec.grad_tol)
    kcfg = KMeansConfig(r=spec.clusters, seed=method_seed)

    partition = None
    cn_result = None
    extra_iters = 0

    if method == "frobenius":
        res = fit_weights(train, loss, FrobeniusPenalty(spec.eps_within), fit_cfg)
        W = res.W
    elif method == "mt_kernel":
        res = fit_weights(
            train, loss, MultiTaskKernelPenalty(spec.eps_mean, spec.eps_between), fit_cfg
        )
        W = res.W
    elif method == "trace":
        res = fit_weights(train, loss, TraceNormSquaredPenalty(spec.sigma_scale), fit_cfg)
        W = res.W
    elif method == "cluster_norm":
        res = fit_weights(train, loss, ClusterNormPenalty(weights, spec.clusters), fit_cfg)
        W = res.W
        cn_result = res.cluster_norm
    elif method == "pooling":
        res = fit_weights(
            train.pooled(), loss, FrobeniusPenalty(spec.eps_within), fit_cfg
        )
        W = np.repeat(res.W, train.m, axis=1)
    elif method == "true_metric":
        if truth_partition is None:
            raise ValueError("true_metric requires the generating partition")
        res = true_metric_fit(train, loss, truth_partition, weights, fit_cfg)
        W = res.W
        partition = truth_partition
    elif method == "kmeans_alt":
        res, partition = alternate_fit(train, loss, weights, kcfg, fit_cfg)
        W = res.W
    elif method == "reprojected":
        relaxed = fit_weights(
            train, loss, ClusterNormPenalty(weights, spec.clusters), fit_cfg
        )
        extra_iters = relaxed.iterations
        partition = reproject_sigma(
            relaxed.cluster_norm, spec.clusters, restarts=kcfg.restarts, seed=method_seed
        )
        res = true_metric_fit(train, loss, partition, weights, fit_cfg)
        W = res.W
    elif method == "cn_init":
        relaxed = fit_weights(
            train, loss, ClusterNormPenalty(weights, spec.clusters), fit_cfg
        )
        extra_iters = relaxed.iterations
        res, partition = alternate_fit(
            train, loss, weights, kcfg, fit_cfg, w_init=relaxed.W
        )
        W = res.W
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")

    return {
        "W": W,
        "iterations": res.iterations + extra_iters,
        "objective": float(res.objective_trace[-1]),
        "grad_norm": res.grad_norm,
        "converged": res.converged,
        "partition": partition,
        "cluster_norm": cn_result,
    }


def run_cell(spec, method, n_train, seed, fold):
    """One benchmark cell; failures are captured, not raised."""
    t0 = time.perf_counter()
    try:
        data, truth = generate(SyntheticConfig(seed=seed))
        train, test = train_test_split(data, truth, n_train, fold, seed)
        info = fit_method(
            method,
            train,
            spec,
            cell_seed(seed, method, n_train, fold),
            truth_partition=truth.partition,
        )
        if spec.loss == "square":
            metric, value = "rmse", rmse(info["W"], test)
        else:
            metric, value = "misclassification", misclassification_rate(info["W"], test)
        sigma = None
        if method == "cluster_norm":
            sigma = reconstruct_sigma_star(info["cluster_norm"])
        elif method == "kmeans_alt":
            sigma = sigma_matrix(info["partition"], spec.weights())
        row = ResultRow(
            method, n_train, seed, fold, metric, value, info["iterations"],
            time.perf_counter() - t0,
        )
        return row, sigma, None
    except Exception as exc:  # error marker row, grid continues
        row = ResultRow(
            method, n_train, seed, fold, "error", float("nan"), 0,
            time.perf_counter() - t0,
        )
        return row, None, f"{type(exc).__name__}: {exc}"


def run_benchmark(spec, out_dir=None, jobs=1):
    """Run every cell of the spec; optionally write CSVs under out_dir.

    Returns the list of ResultRow sorted by (method, n_train, seed, fold).
    """
    cells = [
        (method, n, seed, fold)
        for method in spec.methods
        for n in spec.n_train
        for seed in spec.seeds
        for fold in spec.folds
    ]
    outputs = Parallel(n_jobs=jobs)(delayed(run_cell)(spec, *cell) for cell in cells)
    outputs = sorted(outputs, key=lambda out: out[0].key())
    rows = [out[0] for out in outputs]

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w") as fh:
            fh.write(RESULTS_HEADER + "\n")
            for row in rows:
                fh.write(row.csv_line() + "\n")
        _write_summary(rows, out / "summary.csv")
        for row, sigma, _ in outputs:
            if sigma is not None:
                save_matrix_csv(
                    sigma,
                    out
                    / f"sigma_{row.method}_n{row.n_train}_s{row.seed}_f{row.fold}.csv",
                )
        errors = [
            f"{','.join(map(str, row.key()))}: {msg}"
            for row, _, msg in outputs
            if msg is not None
        ]
        if errors:
            (out / "errors.log").write_text("\n".join(errors) + "\n")
    return rows


def summarize(rows):
    """Per-(method, n_train) mean and population std of the metric values."""
    groups = {}
    for row in rows:
        if row.metric == "error":
            continue
        groups.setdefault((row.method, row.n_train, row.metric), []).append(row.value)
    table = []
    for (method, n_train, metric), vals in sorted(groups.items()):
        arr = np.asarray(vals)
        table.append(
            (method, n_train, metric, float(arr.mean()), float(arr.std()), len(vals))
        )
    return table


def _write_summary(rows, path):
    with open(path, "w") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for method, n_train, metric, mean, std, cells in summarize(rows):
            fh.write(f"{method},{n_train},{metric},{mean:.17g},{std:.17g},{cells}\n")
