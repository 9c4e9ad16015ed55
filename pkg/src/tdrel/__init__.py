"""Dynamic programming on tree decompositions with relational-algebra table algorithms."""

from .decomp import TreeDecomposition, decompose, limit_children, normalize_root, read_td, validate, write_td
from .engine import DecompositionError, EngineConfig, ProblemBundle, Solution, compute_node_table, run_dp
from .instance import (
    CnfFormula,
    Graph,
    ParseError,
    PartialMaxSatInstance,
    parse_dimacs_cnf,
    parse_dimacs_graph,
    parse_wdimacs,
    primal_graph,
)
from .problems import (
    col_bundle,
    ids_bundle,
    make_bundle,
    maxsat_bundle,
    oracle,
    sharpsat_bundle,
    vc_bundle,
)

__version__ = "0.1.0"


def solve(problem: str, instance, *, colors: int | None = None, seed: int = 0, config: EngineConfig | None = None) -> Solution:
    """Decompose, normalize and run the DP in one call."""
    bundle = make_bundle(problem, colors=colors)
    td = normalize_root(limit_children(decompose(bundle.graph(instance), seed)))
    return run_dp(instance, td, bundle, config)


__all__ = [
    "CnfFormula", "DecompositionError", "EngineConfig", "Graph", "ParseError",
    "PartialMaxSatInstance", "ProblemBundle", "Solution", "TreeDecomposition",
    "col_bundle", "compute_node_table", "decompose", "ids_bundle", "limit_children",
    "make_bundle", "maxsat_bundle", "normalize_root", "oracle", "parse_dimacs_cnf",
    "parse_dimacs_graph", "parse_wdimacs", "primal_graph", "read_td", "run_dp",
    "sharpsat_bundle", "solve", "validate", "vc_bundle", "write_td",
]
