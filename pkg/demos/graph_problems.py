"""Solve colouring, vertex cover and independent domination on one graph.

Run with ``python demos/graph_problems.py [seed]``.
"""

import random
import sys

from tdrel import solve
from tdrel.generators import random_graph
from tdrel.problems import oracle


def main(seed: int = 7) -> None:
    g = random_graph(random.Random(seed), 12, 0.25)
    print(f"{g.num_vertices} vertices, {len(g.edges)} edges")
    for problem, kw in [("col", {"colors": 3}), ("col", {"colors": 4}), ("vc", {}), ("ids", {})]:
        got = solve(problem, g, seed=seed, **kw)
        check = oracle(problem, g, **kw)
        label = problem + (f" o={kw['colors']}" if kw else "")
        print(f"{label:8} {got.line():>10}   brute force {check.line():>10}   width {got.stats.width}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 7)
