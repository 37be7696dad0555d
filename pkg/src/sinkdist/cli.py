"""Benchmark command line: gap, bench, iters, knn, pairwise.

Each subcommand runs one experiment and writes its records as CSV. Exit
codes: 0 on success, 2 on usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .dataset_io import write_results_csv


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    p.add_argument("--synthetic", action="store_true", help="run on sampled data, no files")
    p.add_argument("--tolerance", type=float, default=None, help="solver stop tolerance")
    p.add_argument("--fixed-iters", type=int, default=None, help="fixed iteration count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sinkdist",
        description="Benchmarks for entropic-regularized transport distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap", help="relative gap between regularized and exact cost")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--lambdas", type=_parse_floats, default=[1, 2, 5, 9, 20, 50])
    _add_common(p)

    p = sub.add_parser("bench", help="wall-time comparison of solvers")
    p.add_argument("--dims", type=_parse_ints, default=[64, 128, 256, 512])
    p.add_argument("--methods", default="emd,sinkhorn")
    p.add_argument("--lambdas", type=_parse_floats, default=[1, 9])
    p.add_argument("--trials", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("iters", help="iteration counts vs regularization strength")
    p.add_argument("--dims", type=_parse_ints, default=[128])
    p.add_argument("--lambdas", type=_parse_floats, default=[1, 2, 5, 9, 20, 50])
    p.add_argument("--trials", type=int, default=20)
    _add_common(p)

    p = sub.add_parser("knn", help="nearest-neighbor error per distance method")
    p.add_argument("--images", default=None, help="IDX image file")
    p.add_argument("--labels", default=None, help="IDX label file")
    p.add_argument("--subset", type=int, default=500)
    p.add_argument("--folds", type=int, default=4)
    p.add_argument("--methods", default=",".join(experiments.KNN_METHODS))
    p.add_argument("--crop", type=int, default=20, help="center-crop size (0 = native)")
    p.add_argument("--power", type=float, default=1.0, help="cost exponent for independence")
    _add_common(p)

    p = sub.add_parser("pairwise", help="one-vs-many distance dump")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--count", type=int, default=16)
    p.add_argument("--method", default="sinkhorn")
    p.add_argument("--lambda", dest="lam", type=float, default=9.0)
    p.add_argument("--alpha", type=float, default=None)
    _add_common(p)

    return parser


def _emit(records, out_path) -> None:
    if out_path is None:
        from .dataset_io import CSV_HEADER, _fmt

        print(CSV_HEADER)
        for r in records:
            print(
                ",".join(
                    [
                        r.experiment,
                        str(r.dimension),
                        _fmt(r.lam),
                        r.method,
                        str(r.seed),
                        _fmt(float(r.value)),
                        _fmt(float(r.wall_time_ms)),
                        _fmt(r.iterations),
                    ]
                )
            )
    else:
        write_results_csv(records, out_path)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gap":
            if not args.lambdas:
                parser.error("gap needs a nonempty --lambdas list")
            records = experiments.run_gap_experiment(
                args.dim,
                args.pairs,
                args.lambdas,
                args.seed,
                tolerance=args.tolerance if args.tolerance else 1e-6,
            )
        elif args.command == "bench":
            methods = [m for m in args.methods.split(",") if m]
            if not methods:
                parser.error("bench needs a nonempty --methods list")
            unknown = set(methods) - {"emd", "sinkhorn"}
            if unknown:
                parser.error(f"unknown bench methods: {sorted(unknown)}")
            records = experiments.run_timing_experiment(
                args.dims,
                methods,
                args.lambdas,
                args.trials,
                args.seed,
                tolerance=args.tolerance if args.tolerance else 0.01,
            )
        elif args.command == "iters":
            if not args.lambdas:
                parser.error("iters needs a nonempty --lambdas list")
            records = experiments.run_iterations_experiment(
                args.dims,
                args.lambdas,
                args.trials,
                args.seed,
                tolerance=args.tolerance if args.tolerance else 0.01,
            )
        elif args.command == "knn":
            methods = [m for m in args.methods.split(",") if m]
            if not methods:
                parser.error("knn needs a nonempty --methods list")
            unknown = set(methods) - set(experiments.KNN_METHODS)
            if unknown:
                parser.error(f"unknown knn methods: {sorted(unknown)}")
            if not args.synthetic and (args.images is None or args.labels is None):
                parser.error("knn needs --images/--labels unless --synthetic is set")
            records = experiments.run_knn_eval(
                images_path=args.images,
                labels_path=args.labels,
                subset_size=args.subset,
                methods=methods,
                folds=args.folds,
                seed=args.seed,
                synthetic=args.synthetic,
                crop_to=args.crop if args.crop else None,
                power_a=args.power,
                fixed_iters=args.fixed_iters if args.fixed_iters else 20,
            )
        elif args.command == "pairwise":
            records = experiments.run_pairwise(
                dim=args.dim,
                count=args.count,
                method=args.method,
                lam=args.lam,
                seed=args.seed,
                tolerance=args.tolerance if args.tolerance else 0.01,
                fixed_iters=args.fixed_iters,
                alpha=args.alpha,
            )
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(records, args.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
