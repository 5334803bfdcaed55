"""Admin CLI: catalog ingestion, behavior-chain simulation, and serving.

Exit codes
  0  success
  2  usage error (argparse)
  3  unreadable or unparseable input file
  4  validation failure (matrix or document contents)
  5  chain structure error (reducible or periodic)
  6  stationary iteration did not converge

``--json`` switches the simulation and ingest commands to machine-readable
output on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

from greenbasket import chain
from greenbasket.catalog import ingest, save_snapshot
from greenbasket.chain import (
    ChainStructureError,
    ConvergenceError,
    MatrixValidationError,
    apply_transform,
    compare,
    format_matrix,
    load_matrix,
    load_transform,
    stationary,
)
from greenbasket.config import resolve_config
from greenbasket.errors import ConfigError, GreenBasketError, ValidationError

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_VALIDATION = 4
EXIT_STRUCTURE = 5
EXIT_CONVERGENCE = 6

DEFAULT_WATCH = "S6,S9,S12,S14"


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _exit_code_for(error: GreenBasketError) -> int:
    if isinstance(error, ConfigError):
        return EXIT_INPUT
    if isinstance(error, ChainStructureError):
        return EXIT_STRUCTURE
    if isinstance(error, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(error, (MatrixValidationError, ValidationError)):
        return EXIT_VALIDATION
    return EXIT_VALIDATION


def cmd_ingest_catalog(args) -> int:
    catalog, report = ingest(args.catalog)
    if args.snapshot:
        save_snapshot(catalog, args.snapshot)
    if args.json:
        print(json.dumps({
            "accepted": report.accepted,
            "rejected": [{"line": r.line, "reason": r.reason} for r in report.rejected],
            "categories": len(catalog.categories),
            "snapshot": args.snapshot,
        }))
    else:
        print(f"accepted {report.accepted} products "
              f"({len(catalog.categories)} categories), "
              f"rejected {report.rejected_count} rows")
        for row in report.rejected:
            print(f"  line {row.line}: {row.reason}")
        if args.snapshot:
            print(f"snapshot written to {args.snapshot}")
    return EXIT_OK


def cmd_validate_matrix(args) -> int:
    matrix = load_matrix(args.matrix)
    if args.json:
        print(json.dumps({"valid": True, "states": list(matrix.labels)}))
    else:
        print(f"matrix OK: {matrix.size} states, all rows stochastic")
    return EXIT_OK


def cmd_apply_transform(args) -> int:
    base = load_matrix(args.matrix)
    transform = load_transform(args.transform)
    result = apply_transform(base, transform)
    text = format_matrix(result, comment=f"{args.matrix} with transform {transform.name}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote transformed matrix to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_stationary(args) -> int:
    matrix = load_matrix(args.matrix)
    result = stationary(matrix, tolerance=args.tolerance, max_iterations=args.max_iterations)
    if args.json:
        print(json.dumps({
            "probabilities": result.probabilities,
            "iterations_used": result.iterations_used,
            "residual": result.residual,
        }))
    else:
        for label in matrix.labels:
            print(f"{label:>4}  {result.probabilities[label]:.6f}")
        print(f"converged in {result.iterations_used} iterations, "
              f"residual {result.residual:.2e}")
    return EXIT_OK


def cmd_compare_adoption(args) -> int:
    base = load_matrix(args.matrix)
    transform = load_transform(args.transform)
    transformed = apply_transform(base, transform)
    watch = tuple(w.strip() for w in args.watch.split(",") if w.strip())
    before = stationary(base, tolerance=args.tolerance, max_iterations=args.max_iterations)
    after = stationary(transformed, tolerance=args.tolerance, max_iterations=args.max_iterations)
    report = compare(before, after, watch=watch)
    if args.json:
        print(json.dumps({
            "transform": transform.name,
            "watch": list(watch),
            "all_watched_increased": report.all_watched_increased,
            "states": [
                {
                    "state": label,
                    "before": report.before[label],
                    "after": report.after[label],
                    "delta": report.delta[label],
                    "increased": report.increased.get(label),
                }
                for label in report.labels
            ],
        }))
    else:
        print(f"transform: {transform.name}")
        print(f"{'state':>6} {'before':>10} {'after':>10} {'delta':>11}  watched")
        for label in report.labels:
            mark = ""
            if label in report.increased:
                mark = "increased" if report.increased[label] else "NOT increased"
            print(f"{label:>6} {report.before[label]:>10.6f} "
                  f"{report.after[label]:>10.6f} {report.delta[label]:>+11.6f}  {mark}")
        verdict = "all" if report.all_watched_increased else "NOT all"
        print(f"{verdict} watched states increased: {', '.join(watch)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from greenbasket.api import create_app

    config = resolve_config(
        port=args.port,
        catalog=args.catalog,
        references=args.references,
        gamify_config=args.gamify_config,
        data_dir=args.data_dir,
    )
    app = create_app(config)
    print(f"serving on port {config.port} "
          f"(catalog: {config.catalog_path}, data dir: {config.data_dir})")
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenbasket",
        description="Food-footprint shopping assistant: admin and simulation commands.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-catalog", help="ingest a catalog document and report")
    p.add_argument("catalog", help="catalog CSV path")
    p.add_argument("--snapshot", help="write a parsed snapshot to this path")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_ingest_catalog)

    p = sub.add_parser("validate-matrix", help="validate a transition-matrix file")
    p.add_argument("matrix")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate_matrix)

    p = sub.add_parser("apply-transform", help="apply a named transform to a matrix")
    p.add_argument("matrix")
    p.add_argument("transform")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.set_defaults(func=cmd_apply_transform)

    p = sub.add_parser("stationary", help="stationary distribution of a matrix")
    p.add_argument("matrix")
    p.add_argument("--tolerance", type=float, default=chain.DEFAULT_TOLERANCE)
    p.add_argument("--max-iterations", type=int, default=chain.DEFAULT_MAX_ITERATIONS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser(
        "compare-adoption",
        help="stationary comparison of a baseline vs its adoption transform",
    )
    p.add_argument("matrix")
    p.add_argument("transform")
    p.add_argument("--watch", default=DEFAULT_WATCH,
                   help=f"comma-separated states to flag (default {DEFAULT_WATCH})")
    p.add_argument("--tolerance", type=float, default=chain.DEFAULT_TOLERANCE)
    p.add_argument("--max-iterations", type=int, default=chain.DEFAULT_MAX_ITERATIONS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare_adoption)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--port", type=int)
    p.add_argument("--catalog")
    p.add_argument("--references")
    p.add_argument("--gamify-config")
    p.add_argument("--data-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GreenBasketError as exc:
        code = _exit_code_for(exc)
        diagnostic = getattr(exc, "code", "error")
        return _fail(f"[{diagnostic}] {exc}", code)
    except OSError as exc:
        return _fail(str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
