"""Model counting on chained-clique formulas of growing length.

Width stays at 20 while the variable count grows, so the runtime should grow
roughly linearly. Run with ``python demos/scale.py``.
"""

import random
import time

from tdrel import solve
from tdrel.generators import chained_clique_cnf


def main() -> None:
    for n in (250, 500, 1000, 2000):
        formula = chained_clique_cnf(random.Random(n), n)
        start = time.perf_counter()
        sol = solve("sharpsat", formula)
        elapsed = time.perf_counter() - start
        digits = len(str(sol.value))
        print(f"n={n:5}  width {sol.stats.width}  max rows {sol.stats.max_rows:6}  {elapsed:6.2f} s  count has {digits} digits")


if __name__ == "__main__":
    main()
