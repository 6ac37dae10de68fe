"""Command-line entry point ``coreset``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..core import KernelKind, KernelSpec, total_costs
from ..rng import generator, unit_ball
from ..sampler import monotonic_coreset
from ..stream import MergeTreeConfig, stream_coreset
from ..verifier import (DEFAULT_CS, DEFAULT_KS, DEFAULT_RS, bound_matrix, find_intersection,
                        lower_bound_demo, ratio_simple_sweep)
from .data import DataError, load_csv, make_synthetic, make_wine_like, read_points_csv, write_points_csv
from .experiments import ExperimentConfig, run_logistic_experiment, run_sigmoid_experiment
from .report import emit_report, to_json

BUILTIN_DATA = {"synthetic": make_synthetic, "wine_like": make_wine_like}


def _add_kernel(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--kernel", choices=[k.value for k in KernelKind], required=required,
                   default=None if required else "sigmoid")
    p.add_argument("--k", type=float, required=required, default=None if required else 500.0,
                   help="regularization divisor")
    p.add_argument("--radius", type=float, default=None, help="query ball radius (logistic)")


def _spec(args) -> KernelSpec:
    return KernelSpec(args.kernel, args.k, args.radius)


def _load(args, label_col=None, fold=False):
    return load_csv(args.input, label_column=label_col, fold_labels=fold)


def _cmd_build(args) -> int:
    data = _load(args, args.label_col, args.fold_labels)
    core = monotonic_coreset(data.set, _spec(args), args.eps, args.delta, args.seed, size=args.size)
    write_points_csv(args.output, core.points, core.weights)
    print(json.dumps({"n": len(data), "m": len(core), "output": str(args.output)}))
    return 0


def _cmd_eval(args) -> int:
    data = _load(args)
    Q = read_points_csv(args.coreset)
    if Q.dim != data.set.dim:
        raise DataError(f"coreset dimension {Q.dim} differs from data dimension {data.set.dim}")
    spec = _spec(args)
    radius = args.radius if spec.kind is KernelKind.LOGISTIC else 1.0
    X = unit_ball(generator(args.seed), args.queries, data.set.dim, radius)
    full = total_costs(data.set, spec, X)
    approx = total_costs(Q, spec, X)
    rel = np.abs(approx - full) / full
    print(json.dumps({"queries": args.queries, "max_rel_error": float(rel.max()),
                      "mean_rel_error": float(rel.mean())}))
    return 0


def _cmd_bench(args) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    config.setdefault("kind", "sigmoid" if args.mode == "sigmoid" else "logistic")
    cfg = ExperimentConfig.from_dict(config)
    if args.input in BUILTIN_DATA:
        data = BUILTIN_DATA[args.input](cfg.seed)
    else:
        label_col = args.label_col
        if label_col is None and args.mode == "logistic":
            label_col = -1
        data = load_csv(args.input, label_column=label_col)
    if args.mode == "sigmoid":
        report = run_sigmoid_experiment(data, cfg, timing=args.timing)
    else:
        report = run_logistic_experiment(data, cfg, timing=args.timing)
    fmt = "csv" if str(args.output).endswith(".csv") else "json"
    emit_report(report, args.output, fmt)
    print(json.dumps({"output": str(args.output), "aggregates": report.aggregates}))
    return 0


def _cmd_stream(args) -> int:
    data = _load(args)
    threshold = args.threshold or 2 * args.leaf_size
    cfg = MergeTreeConfig(args.leaf_size, args.eps, args.delta, threshold, args.seed, args.size)
    P = data.set
    batches = (P.subset(np.arange(i, min(i + args.leaf_size, len(P))))
               for i in range(0, len(P), args.leaf_size))
    core, stats = stream_coreset(batches, _spec(args), cfg, return_stats=True)
    write_points_csv(args.output, core.points, core.weights)
    print(json.dumps({"m": len(core), **stats.as_record(args.eps)}))
    return 0


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _cmd_verify(args) -> int:
    if args.matrix != "default":
        raise ValueError(f"unknown matrix {args.matrix!r}")
    records = []
    for kind in KernelKind:
        res = find_intersection(kind)
        simple = ratio_simple_sweep(kind, res.x_kc)
        records.append({"check": "ratio_simple", **simple.as_record(), "kind": kind.value})
    for rep in bound_matrix(DEFAULT_CS, DEFAULT_KS, DEFAULT_RS):
        records.append({"check": "regularized_ratio", **rep.as_record()})
    _emit(records, args.output)
    return 0 if all(r["passed"] for r in records) else 1


def _cmd_lowerbound(args) -> int:
    rows = lower_bound_demo(args.n, args.d, _floats(args.radii), args.kernel)
    _emit(rows, args.output)
    return 0


def _emit(records, output) -> None:
    if output:
        emit_report(records, output, "csv" if str(output).endswith(".csv") else "json")
    else:
        sys.stdout.write(to_json(records))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coreset", description="Sensitivity-sampling coresets for monotonic kernels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a coreset from a CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--label-col", type=int, default=None)
    p.add_argument("--fold-labels", action="store_true")
    _add_kernel(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=None, help="explicit coreset size")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("eval", help="relative cost error of a coreset over random queries")
    p.add_argument("--input", required=True)
    p.add_argument("--coreset", required=True)
    _add_kernel(p)
    p.add_argument("--queries", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="coreset versus uniform sampling experiment")
    p.add_argument("--mode", choices=["sigmoid", "logistic"], required=True)
    p.add_argument("--input", required=True, help="CSV path, 'synthetic' or 'wine_like'")
    p.add_argument("--label-col", type=int, default=None,
                   help="label column for CSV input (logistic default: last column)")
    p.add_argument("--config", default=None, help="JSON file of experiment settings")
    p.add_argument("--output", required=True)
    p.add_argument("--timing", action="store_true", help="record wall-clock runtime in the report")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("stream", help="merge-and-reduce coreset of a CSV file read in leaves")
    p.add_argument("--input", required=True)
    p.add_argument("--leaf-size", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=int, default=None, help="recompress threshold (default 2 x leaf size)")
    p.add_argument("--size", type=int, default=None, help="final coreset size cap")
    _add_kernel(p, required=False)
    p.set_defaults(func=_cmd_stream)

    p = sub.add_parser("verify-bounds", help="sweep every kernel ratio bound")
    p.add_argument("--matrix", default="default")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("lowerbound-demo", help="witness sensitivities of the separable set")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--radii", default="1,10,1e2,1e4,1e6")
    p.add_argument("--kernel", choices=[k.value for k in KernelKind], default="sigmoid")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_lowerbound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ValueError, OSError) as exc:
        print(f"coreset: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
