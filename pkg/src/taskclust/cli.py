"""Command-line harness: evaluate norms, fit models on CSV datasets,
run the synthetic benchmark grid, and export learned metrics."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    DEFAULT_SPEC_TEXT,
    METHODS,
    ExperimentSpec,
    default_spec,
    fit_method,
    load_spec,
    run_benchmark,
)
from .data import load_dataset_csv, load_matrix_csv, save_matrix_csv
from .partitions import Partition, PenaltyWeights, sigma_matrix
from .regularizers import ClusterNormPenalty
from .spectrum import SpectralBox, cluster_norm_sq


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="taskclust",
        description="Clustered multi-task learning: cluster-norm models and baselines.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_norm = sub.add_parser("norm", help="squared spectral-box norm of a CSV matrix")
    p_norm.add_argument("matrix", help="matrix CSV (header c1,...,cm)")
    p_norm.add_argument("--alpha", type=float, required=True)
    p_norm.add_argument("--beta", type=float, required=True)
    p_norm.add_argument("--gamma", type=float, required=True)
    p_norm.set_defaults(func=cmd_norm)

    p_fit = sub.add_parser("fit", help="fit one method on a dataset CSV")
    p_fit.add_argument("dataset", help="dataset CSV (header task,y,x1,...,xd)")
    p_fit.add_argument("--method", required=True, choices=METHODS)
    p_fit.add_argument("--out", required=True, help="output model CSV (W, d x m)")
    p_fit.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p_fit.add_argument("--eps-m", type=float, default=0.1)
    p_fit.add_argument("--eps-b", type=float, default=0.2)
    p_fit.add_argument("--eps-w", type=float, default=20.0)
    p_fit.add_argument("--clusters", type=int, default=2)
    p_fit.add_argument("--loss", choices=("square", "logistic"), default="square")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--sigma-scale", type=float, default=1.0)
    p_fit.add_argument("--max-iters", type=int, default=5000)
    p_fit.add_argument("--grad-tol", type=float, default=1e-5)
    p_fit.add_argument(
        "--partition",
        default=None,
        help="comma-separated cluster labels per task (required for true_metric)",
    )
    p_fit.set_defaults(func=cmd_fit)

    p_bench = sub.add_parser(
        "bench-synthetic", help="run the synthetic benchmark grid"
    )
    p_bench.add_argument("--spec", default=None, help="spec file (defaults built in)")
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel cells")
    p_bench.add_argument(
        "--print-spec", action="store_true", help="print the default spec and exit"
    )
    p_bench.set_defaults(func=cmd_bench_synthetic)

    p_sig = sub.add_parser(
        "export-sigma", help="write the learned task metric of a fitted model"
    )
    p_sig.add_argument("model", help="model CSV written by `fit`")
    p_sig.add_argument("--out", required=True, help="output m x m CSV")
    p_sig.set_defaults(func=cmd_export_sigma)
    return parser


def cmd_norm(args):
    A = load_matrix_csv(args.matrix)
    box = SpectralBox(args.alpha, args.beta, args.gamma, A.shape[1])
    result = cluster_norm_sq(A, box)
    print(f"value,{result.value:.17g}")
    print("lambda_star," + ",".join(f"{v:.17g}" for v in result.lambda_star))
    return 0


def _sidecar_path(model_path):
    return Path(str(model_path) + ".meta.json")


def cmd_fit(args):
    data = load_dataset_csv(args.dataset)
    partition = None
    if args.partition is not None:
        labels = [int(s) for s in args.partition.split(",")]
        if len(labels) != data.m:
            raise ValueError(
                f"--partition has {len(labels)} labels but dataset has {data.m} tasks"
            )
        partition = Partition.from_labels(labels)
    if args.method == "true_metric" and partition is None:
        raise ValueError("method true_metric requires --partition")

    spec = ExperimentSpec(
        methods=(args.method,),
        n_train=(1,),
        seeds=(args.seed,),
        lam=args.lam,
        eps_mean=args.eps_m,
        eps_between=args.eps_b,
        eps_within=args.eps_w,
        clusters=args.clusters,
        loss=args.loss,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        sigma_scale=args.sigma_scale,
    )
    info = fit_method(args.method, data, spec, args.seed, truth_partition=partition)
    save_matrix_csv(info["W"], args.out)
    meta = {
        "method": args.method,
        "loss": args.loss,
        "lambda": args.lam,
        "eps_mean": args.eps_m,
        "eps_between": args.eps_b,
        "eps_within": args.eps_w,
        "clusters": args.clusters,
        "sigma_scale": args.sigma_scale,
        "seed": args.seed,
        "d": data.d,
        "m": data.m,
        "final_objective": info["objective"],
        "iterations": info["iterations"],
        "grad_norm": info["grad_norm"],
        "converged": info["converged"],
        "partition": list(info["partition"].assignment) if info["partition"] else None,
    }
    _sidecar_path(args.out).write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {args.out} (objective {info['objective']:.17g})")
    return 0


def cmd_bench_synthetic(args):
    if args.print_spec:
        print(DEFAULT_SPEC_TEXT, end="")
        return 0
    spec = load_spec(args.spec) if args.spec else default_spec()
    rows = run_benchmark(spec, out_dir=args.out, jobs=args.jobs)
    failed = sum(1 for r in rows if r.metric == "error")
    print(f"wrote {len(rows)} cells to {args.out}" + (f" ({failed} failed)" if failed else ""))
    return 0


def cmd_export_sigma(args):
    W = load_matrix_csv(args.model)
    sidecar = _sidecar_path(args.model)
    if not sidecar.exists():
        raise ValueError(f"model metadata {sidecar} not found")
    meta = json.loads(sidecar.read_text())
    weights = PenaltyWeights(meta["eps_mean"], meta["eps_between"], meta["eps_within"])
    method = meta["method"]
    if method == "cluster_norm":
        penalty = ClusterNormPenalty(weights, meta["clusters"])
        sigma = penalty.sigma_star(W)
    elif meta.get("partition") is not None:
        sigma = sigma_matrix(Partition.from_labels(meta["partition"]), weights)
    elif method == "mt_kernel":
        # single-cluster metric: eps_within plays no role on the centered part
        single = Partition.from_labels([0] * meta["m"])
        sigma = sigma_matrix(
            single,
            PenaltyWeights(meta["eps_mean"], meta["eps_between"], meta["eps_between"]),
        )
    else:
        raise ValueError(f"model fitted with {method!r} carries no task metric")
    save_matrix_csv(sigma, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
