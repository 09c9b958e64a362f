"""Command line interface.

Subcommands: solve, reduce, verify, generate, inspect, bench. Exit codes:
0 success, 1 verification above tolerance, 2 validation problems (shape,
symmetry, sparsity, bad inputs), 3 numeric failures (singular blocks,
zero weight sum, fill outside the mask, generation giving up).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import kernels
from .bench import DEFAULT_BENCH_COUPLING, run_bench, to_csv, write_csv
from .covariance import ValidationConfig, from_dense, to_dense
from .errors import HmvpError, ValidationError
from .generator import DEFAULT_COUPLING, GeneratorConfig, generate, reference_instance
from .hierarchy import template_for
from .matrixio import (
    chain_to_dict,
    read_matrix,
    read_vector,
    report_to_dict,
    write_json,
    write_matrix,
)
from .oracle import dense_min_variance
from .reduction import build_chain
from .solver import portfolio_return, solve_min_variance


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmvp",
        description="Minimum-variance portfolios on hierarchical covariance matrices.",
    )
    parser.add_argument("--zero-tol", type=float, default=1e-12,
                        help="threshold below which off-pattern entries count as zero")
    parser.add_argument("--pd-tol", type=float, default=1e-10,
                        help="relative pivot threshold for singularity checks")
    parser.add_argument("--strict-mask", action="store_true",
                        help="validate couplings against the refined-triangle "
                             "edge pattern instead of the permissive block pattern")
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; the sweep and kernels run single-threaded")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compute minimum-variance weights")
    solve.add_argument("--input", required=True, help="matrix file (.csv or .json)")
    solve.add_argument("--level", type=int, help="hierarchy level (required for CSV)")
    solve.add_argument("--returns", help="optional expected-returns vector (CSV)")
    solve.add_argument("--output", help="write the JSON report here (default stdout)")

    reduce = sub.add_parser("reduce", help="emit the level-by-level reduction chain")
    reduce.add_argument("--input", required=True)
    reduce.add_argument("--level", type=int)
    reduce.add_argument("--emit-chain", default="-",
                        help="chain JSON destination (default stdout)")

    verify = sub.add_parser("verify",
                            help="cross-check recursive weights against the dense oracle")
    verify.add_argument("--input", required=True)
    verify.add_argument("--level", type=int)
    verify.add_argument("--tol", type=float, default=1e-9,
                        help="max relative weight deviation allowed")

    gen = sub.add_parser("generate", help="draw a random conforming instance")
    gen.add_argument("--level", type=int, default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--coupling", type=float, default=DEFAULT_COUPLING)
    gen.add_argument("--integer-mode", action="store_true")
    gen.add_argument("--reference", action="store_true",
                     help="emit the built-in 15-asset reference instance")
    gen.add_argument("--out", required=True, help="matrix destination (.csv or .json)")

    inspect = sub.add_parser("inspect", help="describe the hierarchy at a level")
    inspect.add_argument("--level", type=int, required=True)
    inspect.add_argument("--json", action="store_true", dest="as_json")

    bench = sub.add_parser("bench", help="time recursive vs dense solvers")
    bench.add_argument("--levels", default="2-5",
                       help="levels to sweep, e.g. '2-7' or '2,4,6'")
    bench.add_argument("--seeds", type=int, default=1, help="instances per level")
    bench.add_argument("--reps", type=int, default=5, help="repetitions per timing")
    bench.add_argument("--coupling", type=float, default=DEFAULT_BENCH_COUPLING)
    bench.add_argument("--backend", default="auto",
                       choices=["auto", *kernels.available_backends()],
                       help="kernel backend for the recursive timings")
    bench.add_argument("--output", help="CSV destination (default stdout)")
    return parser


def _parse_levels(text: str) -> list[int]:
    levels = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            levels.extend(range(int(lo), int(hi) + 1))
        elif part:
            levels.append(int(part))
    if not levels or any(level < 1 for level in levels):
        raise ValidationError(f"bad level sweep {text!r}")
    return levels


def _load_block_covariance(args, config):
    matrix, file_level = read_matrix(args.input)
    level = getattr(args, "level", None)
    if level is None:
        level = file_level
    elif file_level is not None and file_level != level:
        raise ValidationError(
            f"--level {level} disagrees with the file's level {file_level}"
        )
    if level is None:
        raise ValidationError("--level is required for CSV input")
    return from_dense(matrix, template_for(level), level, config), matrix


def _cmd_solve(args, config) -> int:
    cov, _ = _load_block_covariance(args, config)
    weights, report = solve_min_variance(cov, config)
    payload = report_to_dict(report)
    if args.returns:
        returns = read_vector(args.returns)
        payload["expected_return"] = portfolio_return(weights, returns)
    write_json(payload, args.output)
    return 0


def _cmd_reduce(args, config) -> int:
    cov, _ = _load_block_covariance(args, config)
    chain = build_chain(cov, config)
    write_json(chain_to_dict(chain), args.emit_chain)
    return 0


def _cmd_verify(args, config) -> int:
    cov, matrix = _load_block_covariance(args, config)
    weights, _ = solve_min_variance(cov, config)
    oracle = dense_min_variance(matrix, config)
    deviation = float(
        np.max(np.abs(weights.values - oracle.weights))
        / np.max(np.abs(oracle.weights))
    )
    print(f"max relative weight deviation: {deviation:.3e} (tol {args.tol:.3e})")
    return 0 if deviation <= args.tol else 1


def _cmd_generate(args, config) -> int:
    if args.reference:
        cov = reference_instance()
    else:
        gen_config = GeneratorConfig(
            level=args.level,
            seed=args.seed,
            coupling_scale=args.coupling,
            integer_mode=args.integer_mode,
            strict_mask=config.strict_mask,
        )
        cov = generate(gen_config)
    write_matrix(args.out, to_dense(cov), level=cov.level)
    print(f"wrote level-{cov.level} instance ({cov.n} assets) to {args.out}")
    return 0


def _cmd_inspect(args, config) -> int:
    level = args.level
    template = template_for(level)
    clusters = template.clusters(level)
    if args.as_json:
        payload = {
            "level": level,
            "node_count": template.node_count(level),
            "junction_count": template.junction_count(level),
            "cluster_count": template.cluster_count(level),
            "clusters": [
                {
                    "index": c.index,
                    "corners": list(c.corners),
                    "interiors": list(c.interiors),
                }
                for c in clusters
            ],
        }
        write_json(payload, None)
        return 0
    print(f"level {level}: {template.node_count(level)} nodes, "
          f"{template.junction_count(level)} junctions, "
          f"{template.cluster_count(level)} clusters")
    for c in clusters:
        print(f"  cluster {c.index}: corners {list(c.corners)} "
              f"interiors {list(c.interiors)}")
    mask = template.adjacency_mask(level, strict=config.strict_mask)
    edges = int(np.count_nonzero(np.triu(mask, 1)))
    kind = "strict" if config.strict_mask else "permissive"
    print(f"  {kind} mask: {edges} off-diagonal pairs allowed")
    return 0


def _cmd_bench(args, config) -> int:
    levels = _parse_levels(args.levels)
    records = run_bench(
        levels,
        seeds_per_level=args.seeds,
        reps=args.reps,
        coupling=args.coupling,
        backend=args.backend,
        config=config,
    )
    if args.output:
        write_csv(records, args.output)
        print(f"wrote {len(records)} records to {args.output}")
    else:
        sys.stdout.write(to_csv(records))
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "reduce": _cmd_reduce,
    "verify": _cmd_verify,
    "generate": _cmd_generate,
    "inspect": _cmd_inspect,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = ValidationConfig(
        zero_tol=args.zero_tol,
        pd_tol=args.pd_tol,
        strict_mask=args.strict_mask,
    )
    try:
        return _COMMANDS[args.command](args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HmvpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
