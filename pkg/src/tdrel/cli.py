"""Command-line front end: ``tdrel solve --problem ... --input ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .decomp import decompose, limit_children, normalize_root, read_td, validate
from .engine import DEFAULT_ROW_CAP, EngineConfig, default_workers, run_dp
from .instance import ParseError, parse_dimacs_cnf, parse_dimacs_graph, parse_wdimacs
from .problems import PROBLEMS, UnsatError, make_bundle
from .relalg import CapacityError

log = logging.getLogger("tdrel")

EXIT_OK, EXIT_UNSAT, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    problem: str
    input: Path
    colors: int | None = None
    td: Path | None = None
    seed: int = 0
    workers: int = 1
    child_limit: int = 5
    row_cap: int = DEFAULT_ROW_CAP
    free_vars: str = "count"
    debug: bool = False
    stats_json: Path | None = None

    def __post_init__(self):
        if (self.colors is not None) != (self.problem == "col"):
            raise ValueError("--colors is required for col and only allowed there")
        if self.colors is not None and self.colors < 1:
            raise ValueError("--colors must be at least 1")
        if self.workers < 1:
            raise ValueError("--workers must be at least 1")
        if self.child_limit < 2:
            raise ValueError("--child-limit must be at least 2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdrel", description="Dynamic programming on tree decompositions.")
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("--problem", required=True, choices=PROBLEMS)
    solve.add_argument("--input", required=True, type=Path, help="DIMACS CNF, WDIMACS or DIMACS/PACE graph file")
    solve.add_argument("--colors", type=int, help="number of colours (col only)")
    solve.add_argument("--td", type=Path, help="PACE .td file to use instead of the heuristic")
    solve.add_argument("--seed", type=int, default=0, help="tie-breaking seed for the heuristic")
    solve.add_argument("--workers", type=int, default=default_workers())
    solve.add_argument("--child-limit", type=int, default=5)
    solve.add_argument("--row-cap", type=int, default=DEFAULT_ROW_CAP)
    solve.add_argument("--free-vars", choices=("count", "ignore"), default="count")
    solve.add_argument("--debug", action="store_true", help="print every node table before the result")
    solve.add_argument("--stats-json", type=Path, help="write run statistics here")
    solve.add_argument("-v", "--verbose", action="store_true")
    return parser


def _read_instance(cfg: RunConfig):
    data = cfg.input.read_bytes()
    if cfg.problem == "sharpsat":
        return parse_dimacs_cnf(data)
    if cfg.problem == "maxsat":
        return parse_wdimacs(data)
    return parse_dimacs_graph(data)


def stats_report(cfg: RunConfig, solution) -> dict:
    s = solution.stats
    return {
        "problem": cfg.problem,
        "width": s.width,
        "nodeCount": s.nodes,
        "maxTableRows": s.max_rows,
        "wallSeconds": s.wall_seconds,
        "workers": cfg.workers,
        "seed": cfg.seed,
        "solution": solution.value,
    }


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    start = time.perf_counter()
    try:
        instance = _read_instance(cfg)
        bundle = make_bundle(cfg.problem, colors=cfg.colors, free_vars=cfg.free_vars)
        graph = bundle.graph(instance)
        if cfg.td is not None:
            td = read_td(cfg.td.read_bytes())
            bad = validate(td, graph)
            if bad is not None:
                raise ParseError(f"{cfg.td}: not a tree decomposition of the input: {bad}")
        else:
            td = decompose(graph, cfg.seed)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    td = normalize_root(limit_children(td, cfg.child_limit))
    log.info("decomposition: %d nodes, width %d", len(td.bags), td.width)
    config = EngineConfig(workers=cfg.workers, row_cap=cfg.row_cap, debug=cfg.debug, validate=False)
    try:
        solution = run_dp(instance, td, bundle, config)
    except CapacityError as exc:
        print(f"error: row capacity exceeded: {exc}", file=err)
        return EXIT_CAPACITY
    except UnsatError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_UNSAT
    solution.stats.wall_seconds = time.perf_counter() - start
    if cfg.debug:
        print(solution.trace_dump(), file=out)
    if cfg.stats_json is not None:
        cfg.stats_json.write_text(json.dumps(stats_report(cfg, solution), indent=2) + "\n")
    print(solution.line(), file=out)
    return EXIT_UNSAT if solution.kind == "unsat" else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(
            problem=args.problem,
            input=args.input,
            colors=args.colors,
            td=args.td,
            seed=args.seed,
            workers=args.workers,
            child_limit=args.child_limit,
            row_cap=args.row_cap,
            free_vars=args.free_vars,
            debug=args.debug,
            stats_json=args.stats_json,
        )
    except ValueError as exc:
        parser.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
