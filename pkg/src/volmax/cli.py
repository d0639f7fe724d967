"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 verification failure.
Set ``VOLMAX_WORKERS`` to fan the per-part work out over threads.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import _backend
from .data import (
    ExperimentConfig,
    format_report,
    load_csv,
    sample_gaussian,
    sample_unit_sphere,
    write_report,
)
from .diagnostics import tightness_instance
from .experiments import FIG1, FIG2, FIG3, run_grid
from .solvers import greedy, local_search

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> tuple:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_common(p):
    p.add_argument("--dataset", default="sphere",
                   help="sphere, gaussian, tightness, or a CSV path (default: sphere)")
    p.add_argument("--d", type=int, default=784, help="dimension for generated data (default: 784)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--timing", action="store_true",
                   help="record wall time in reports (makes them non-reproducible)")


def _add_grid(p, defaults, m=10, reps=5):
    _add_common(p)
    p.add_argument("--m", type=int, default=m, help=f"point sets per stream (default: {m})")
    p.add_argument("--reps", type=int, default=reps, help=f"repetitions averaged (default: {reps})")
    p.add_argument("--k-grid", type=_int_list, default=defaults["k_values"],
                   help="comma-separated k values")
    p.add_argument("--epsilon", type=float,
                   help="measure local_search(epsilon) solutions instead of greedy ones")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="volmax", description="Greedy volume maximization and its local optimality.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="pick k points by greedy or local search")
    _add_common(p)
    p.set_defaults(d=10)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=100, help="points to generate for sphere/gaussian")
    p.add_argument("--algorithm", choices=("greedy", "local-search"), default="greedy")
    p.add_argument("--epsilon", type=float, default=0.1)

    p = sub.add_parser("fig1", help="local optimality against k (10 sets of 3000 points)")
    _add_grid(p, FIG1)
    p.add_argument("--part-size", type=int, default=FIG1["part_sizes"][0])

    p = sub.add_parser("fig2", help="local optimality for large k (10 sets of 300 points)")
    _add_grid(p, FIG2)
    p.add_argument("--part-size", type=int, default=FIG2["part_sizes"][0])

    p = sub.add_parser("fig3", help="local optimality against point-set size")
    _add_grid(p, FIG3)
    p.add_argument("--sizes", type=_int_list, default=FIG3["part_sizes"],
                   help="comma-separated part sizes (default: 500..4000 step 500)")

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    return parser


def _load_points(args):
    if args.dataset == "sphere":
        return sample_unit_sphere(args.n, args.d, args.seed)
    if args.dataset == "gaussian":
        return sample_gaussian(args.n, args.d, args.seed)
    if args.dataset == "tightness":
        return tightness_instance(args.k)
    return load_csv(args.dataset)


def _emit(text: str, args, quiet: bool) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif not quiet:
        sys.stdout.write(text)


def cmd_solve(args, quiet=False) -> int:
    if args.k < 1:
        raise UsageError(f"--k must be at least 1, got {args.k}")
    points = _load_points(args)
    start = time.perf_counter()
    if args.algorithm == "greedy":
        sol, swaps = greedy(points, args.k), None
    else:
        sol, swaps = local_search(points, args.k, args.epsilon)
    elapsed = time.perf_counter() - start
    record = {
        "algorithm": args.algorithm,
        "k": args.k,
        "ids": sol.ids(points),
        "log_volume": None if sol.log_vol.is_zero else sol.log_vol.value,
        "rank_deficient": sol.rank_deficient,
        "swaps": swaps,
    }
    if args.timing:
        record["wall_time"] = elapsed
    if args.format == "json":
        text = json.dumps(record, indent=2) + "\n"
    else:
        lines = [f"{key},{_csv_value(value)}" for key, value in record.items()]
        text = "field,value\n" + "\n".join(lines) + "\n"
    _emit(text, args, quiet)
    if args.out and not quiet:
        print(f"ids: {' '.join(map(str, record['ids']))}")
        print(f"log_volume: {record['log_volume']}")
    if not quiet:
        print(f"wall_time: {elapsed:.4f}s", file=sys.stderr)
    return EXIT_OK


def _csv_value(value) -> str:
    if isinstance(value, list):
        return " ".join(map(str, value))
    if isinstance(value, float):
        return format(value, ".17g")
    return "" if value is None else str(value)


def cmd_grid(args, quiet=False) -> int:
    sizes = args.sizes if args.command == "fig3" else (args.part_size,)
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    if args.dataset == "tightness":
        raise UsageError("the experiment commands need sphere, gaussian or a CSV dataset")
    try:
        config = ExperimentConfig(
            dataset=args.dataset, m=args.m, part_sizes=tuple(sizes), k_values=tuple(sorted(args.k_grid)),
            d=args.d, epsilon=args.epsilon, seeds=tuple(args.seed + r for r in range(args.reps)),
            experiment=args.command,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = run_grid(config, timing=args.timing)
    if args.out:
        write_report(rows, args.format, args.out)
    elif not quiet:
        sys.stdout.write(format_report(rows, args.format))
    return EXIT_OK


def cmd_verify(args, quiet=False) -> int:
    from . import acceptance

    echo = (lambda line: None) if quiet else print
    if not quiet:
        print(f"kernels: {_backend.NAME}")
    results = acceptance.run(args.level, echo)
    failed = [r for r in results if not r.passed]
    if not quiet:
        print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "fig1": cmd_grid, "fig2": cmd_grid, "fig3": cmd_grid, "verify": cmd_verify}


def main(argv=None, quiet: bool = False) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, quiet=quiet)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"volmax: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
