"""Problem instances, DIMACS-family parsers and primal graphs."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable

log = logging.getLogger(__name__)

Clause = frozenset  # of non-zero ints


class ParseError(ValueError):
    """Malformed instance text."""


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(frozenset(c) for c in self.clauses))
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ParseError(f"literal {lit} out of range 1..{self.num_vars}")

    def occurring(self) -> set[int]:
        return {abs(lit) for c in self.clauses for lit in c}

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, sorted_lits(c) + [0])) for c in self.clauses]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PartialMaxSatInstance:
    hard: CnfFormula
    soft: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "soft", tuple(frozenset(c) for c in self.soft))
        CnfFormula(self.hard.num_vars, self.soft)  # range check

    @property
    def num_vars(self) -> int:
        return self.hard.num_vars

    def to_wdimacs(self, top: int | None = None) -> str:
        top = top if top is not None else len(self.soft) + 1
        n = len(self.hard.clauses) + len(self.soft)
        lines = [f"p wcnf {self.num_vars} {n} {top}"]
        lines += [" ".join(map(str, [top] + sorted_lits(c) + [0])) for c in self.hard.clauses]
        lines += [" ".join(map(str, [1] + sorted_lits(c) + [0])) for c in self.soft]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``1..num_vertices``."""

    num_vertices: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ParseError(f"self-loop on vertex {u}")
            for x in (u, v):
                if not 1 <= x <= self.num_vertices:
                    raise ParseError(f"vertex {x} out of range 1..{self.num_vertices}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        return cls(n, frozenset(edges))

    @property
    def vertices(self) -> range:
        return range(1, self.num_vertices + 1)

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def to_dimacs(self, kind: str = "edge") -> str:
        lines = [f"p {kind} {self.num_vertices} {len(self.edges)}"]
        prefix = "e " if kind == "edge" else ""
        lines += [f"{prefix}{u} {v}" for u, v in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def sorted_lits(clause: Iterable[int]) -> list[int]:
    return sorted(clause, key=lambda lit: (abs(lit), lit < 0))


def _text(data: str | bytes) -> str:
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def _body_tokens(text: str, kind: str) -> tuple[list[str], list[str]]:
    """Split into the ``p`` header fields and the remaining tokens."""
    header = None
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise ParseError(f"line {lineno}: duplicate header")
            header = line.split()
            if len(header) < 2 or header[1] not in kind.split("|"):
                raise ParseError(f"line {lineno}: expected 'p {kind}' header, got {line!r}")
            continue
        if header is None:
            raise ParseError(f"line {lineno}: data before 'p' header")
        tokens.extend(line.split())
    if header is None:
        raise ParseError("missing 'p' header")
    return header, tokens


def _ints(fields: list[str], what: str) -> list[int]:
    try:
        return [int(x) for x in fields]
    except ValueError:
        raise ParseError(f"non-integer field in {what}: {fields}") from None


def _clauses(tokens: list[str], num_vars: int, *, weighted: bool):
    lits = _ints(tokens, "clause data")
    out, cur, weight = [], [], None
    for x in lits:
        if weighted and weight is None:
            weight = x
            continue
        if x == 0:
            out.append((weight, frozenset(cur)))
            cur, weight = [], None
            continue
        if abs(x) > num_vars:
            raise ParseError(f"literal {x} out of range 1..{num_vars}")
        cur.append(x)
    if cur or weight is not None:
        log.warning("last clause is not 0-terminated; accepting it")
        out.append((weight, frozenset(cur)))
    return out


def parse_dimacs_cnf(data: str | bytes) -> CnfFormula:
    header, tokens = _body_tokens(_text(data), "cnf")
    if len(header) != 4:
        raise ParseError(f"malformed header {' '.join(header)!r}")
    nv, nc = _ints(header[2:], "header")
    clauses = [c for _, c in _clauses(tokens, nv, weighted=False)]
    if len(clauses) != nc:
        log.warning("header declares %d clauses, found %d", nc, len(clauses))
    return CnfFormula(nv, tuple(clauses))


def parse_wdimacs(data: str | bytes) -> PartialMaxSatInstance:
    """Unweighted partial MaxSAT: weight ``top`` is hard, weight 1 is soft."""
    header, tokens = _body_tokens(_text(data), "wcnf")
    if len(header) != 5:
        raise ParseError(f"malformed header {' '.join(header)!r}; expected 'p wcnf <nv> <nc> <top>'")
    nv, nc, top = _ints(header[2:], "header")
    hard, soft = [], []
    for weight, clause in _clauses(tokens, nv, weighted=True):
        if weight == top:
            hard.append(clause)
        elif weight == 1:
            soft.append(clause)
        else:
            raise ParseError(f"clause weight {weight} is neither 1 nor top={top}")
    if len(hard) + len(soft) != nc:
        log.warning("header declares %d clauses, found %d", nc, len(hard) + len(soft))
    return PartialMaxSatInstance(CnfFormula(nv, tuple(hard)), tuple(soft))


def parse_dimacs_graph(data: str | bytes) -> Graph:
    """DIMACS ``p edge`` (``e u v`` lines) or PACE ``p tw`` (bare ``u v``)."""
    text = _text(data)
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if header is not None:
                raise ParseError(f"line {lineno}: duplicate header")
            if len(fields) != 4 or fields[1] not in ("edge", "tw", "col"):
                raise ParseError(f"line {lineno}: malformed header {line!r}")
            header = _ints(fields[2:], "header")
            continue
        if header is None:
            raise ParseError(f"line {lineno}: data before 'p' header")
        if fields[0] == "e":
            fields = fields[1:]
        if len(fields) != 2:
            raise ParseError(f"line {lineno}: expected an edge, got {line!r}")
        edges.append(tuple(_ints(fields, f"line {lineno}")))
    if header is None:
        raise ParseError("missing 'p' header")
    g = Graph(header[0], frozenset(edges))
    if len(g.edges) != header[1]:
        log.info("header declares %d edges, found %d distinct", header[1], len(g.edges))
    return g


def primal_graph(instance: CnfFormula | PartialMaxSatInstance) -> Graph:
    """Variables as vertices; an edge for every pair sharing a clause."""
    if isinstance(instance, PartialMaxSatInstance):
        n, clauses = instance.num_vars, instance.hard.clauses + instance.soft
    else:
        n, clauses = instance.num_vars, instance.clauses
    edges = set()
    for c in clauses:
        vs = sorted({abs(lit) for lit in c})
        edges.update(itertools.combinations(vs, 2))
    return Graph(n, frozenset(edges))
