"""Seeded random and structured instance generators for tests and demos."""

from __future__ import annotations

import itertools
import random

from .instance import CnfFormula, Graph, PartialMaxSatInstance


def random_clause(rng: random.Random, n: int, k: int) -> frozenset[int]:
    vs = rng.sample(range(1, n + 1), min(k, n))
    return frozenset(v if rng.random() < 0.5 else -v for v in vs)


def random_cnf(rng: random.Random, n: int, m: int, max_len: int = 3) -> CnfFormula:
    """``m`` clauses of 1..max_len distinct variables each."""
    return CnfFormula(n, tuple(random_clause(rng, n, rng.randint(1, max_len)) for _ in range(m)) if n else ())


def random_maxsat(rng: random.Random, n: int, hard: int, soft: int, max_len: int = 3) -> PartialMaxSatInstance:
    h = random_cnf(rng, n, hard, max_len)
    s = random_cnf(rng, n, soft, max_len)
    return PartialMaxSatInstance(h, s.clauses)


def random_graph(rng: random.Random, n: int, p: float) -> Graph:
    edges = [e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < p]
    return Graph.from_edges(n, edges)


def random_tree(rng: random.Random, n: int) -> Graph:
    """Uniform attachment: vertex i links to a random earlier vertex."""
    return Graph.from_edges(n, [(rng.randint(1, i - 1), i) for i in range(2, n + 1)])


def planted_clique(rng: random.Random, n: int, k: int, p: float) -> tuple[Graph, list[int]]:
    g = random_graph(rng, n, p)
    clique = sorted(rng.sample(range(1, n + 1), k))
    return Graph.from_edges(n, set(g.edges) | set(itertools.combinations(clique, 2))), clique


def clique_chain_blocks(num_vars: int, block: int, overlap: int) -> list[list[int]]:
    """Consecutive windows of ``block`` variables sharing ``overlap`` with the next.

    The last window is shortened so that the windows end exactly at
    ``num_vars``.
    """
    if not 0 <= overlap < block:
        raise ValueError("need 0 <= overlap < block")
    blocks, start = [], 1
    while True:
        end = min(start + block - 1, num_vars)
        blocks.append(list(range(start, end + 1)))
        if end == num_vars:
            return blocks
        start = end - overlap + 1


def clause_template(rng: random.Random, width: int, count: int, clause_len: int = 3) -> list[frozenset[int]]:
    """Random clauses over local positions ``0..width-1`` (literal ``p+1``
    or ``-(p+1)`` for position ``p``), plus one clause over all positions."""
    out = [frozenset(p + 1 if rng.random() < 0.5 else -(p + 1) for p in range(width))]
    for _ in range(count):
        ps = rng.sample(range(width), min(clause_len, width))
        out.append(frozenset(p + 1 if rng.random() < 0.5 else -(p + 1) for p in ps))
    return out


def place(template: list[frozenset[int]], window: list[int]) -> list[frozenset[int]]:
    """Instantiate a template on ``window``; clauses reaching past its end are dropped."""
    out = []
    for c in template:
        if all(abs(x) <= len(window) for x in c):
            out.append(frozenset(window[abs(x) - 1] * (1 if x > 0 else -1) for x in c))
    return out


def chained_clique_cnf(
    rng: random.Random,
    num_vars: int,
    block: int = 21,
    overlap: int = 5,
    clauses_per_block: int = 40,
    clause_len: int = 3,
) -> CnfFormula:
    """One random clause template placed on consecutive overlapping windows.

    Each window also gets a clause over all its variables, so windows are
    cliques of the primal graph and together form a path decomposition of
    width ``block - 1``.
    """
    template = clause_template(rng, block, clauses_per_block, clause_len)
    out = []
    for window in clique_chain_blocks(num_vars, block, overlap):
        if len(window) < block:
            out.append(frozenset(window))
        out.extend(place(template, window))
    return CnfFormula(num_vars, tuple(out))
