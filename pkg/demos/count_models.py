"""Count the models of a small formula and print every intermediate table.

Run with ``python demos/count_models.py``.
"""

from tdrel import solve
from tdrel.engine import EngineConfig
from tdrel.instance import parse_dimacs_cnf

FORMULA = """\
p cnf 4 4
-1 2 3 0
1 -2 -3 0
1 4 0
1 -4 0
"""


def main() -> None:
    formula = parse_dimacs_cnf(FORMULA)
    solution = solve("sharpsat", formula, config=EngineConfig(debug=True))
    print(solution.trace_dump())
    print(f"width {solution.stats.width}, {solution.stats.nodes} nodes")
    print(solution.line())


if __name__ == "__main__":
    main()
