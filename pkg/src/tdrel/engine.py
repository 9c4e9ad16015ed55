"""Dynamic programming over (not necessarily nice) tree decompositions.

Every node runs one merged pipeline built from a problem's placeholder
set (`ProblemBundle`):

1. theta-join of the child tables on their shared variables, filtered by
   ``join_add_filter`` and merged by ``join_add_cols``; leaves start from
   ``leaf_table``;
2. cross-join with ``intr_table(v)`` for every introduced variable;
3. ``intr_add_cols`` by extended projection;
4. selection by ``intr_filter``;
5. selection by ``rem_filter``;
6. removal scores into scratch columns (``rem_scratch``), then grouping by
   the kept variables plus ``rem_group_cols`` with ``rem_aggr``.

Conjuncts of ``intr_filter`` that only read columns left untouched by
``intr_add_cols`` are applied as soon as their columns exist during
step 2. Selection commutes with those steps, so the table is the same.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Sequence

from .decomp import TreeDecomposition, validate
from .instance import CnfFormula, Graph, PartialMaxSatInstance, primal_graph
from .relalg import (
    TRUE,
    Aggregate,
    Col,
    Column,
    EqCol,
    Formula,
    SchemaError,
    Table,
    ValueExpr,
    conjoin,
    conjuncts,
    cross_join,
    extended_project,
    group_aggregate,
    rename,
    select,
    theta_join,
)

log = logging.getLogger(__name__)

DEFAULT_ROW_CAP = 2**26
MAX_WORKERS = 24


class DecompositionError(ValueError):
    """The decomposition does not fit the instance's graph."""


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, MAX_WORKERS))


def var_name(v: int) -> str:
    return f"v{v}"


def child_col(name: str, j: int) -> str:
    """Name of column ``name`` of the ``j``-th child inside a join."""
    return f"{name}@{j}"


@dataclass(frozen=True)
class NodeContext:
    node: int
    bag: tuple[int, ...]
    children: tuple[int, ...]
    child_bags: tuple[frozenset[int], ...]
    child_scopes: tuple[tuple[int, ...], ...]
    introduced: tuple[int, ...]
    removed: tuple[int, ...]
    scope: tuple[int, ...]  # variables kept in this node's output table

    @property
    def work(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.bag).union(*self.child_scopes)))


@dataclass(frozen=True)
class LocalInstance:
    clauses: tuple[frozenset[int], ...] = ()
    fresh_clauses: tuple[frozenset[int], ...] = ()
    soft: tuple[frozenset[int], ...] = ()
    disposed: tuple[frozenset[int], ...] = ()
    edges: tuple[tuple[int, int], ...] = ()
    fresh_edges: tuple[tuple[int, int], ...] = ()
    free: frozenset[int] = frozenset()

    def describe(self) -> str:
        def cl(cs):
            return "[" + ", ".join("{" + " ".join(map(str, sorted(c, key=abs))) + "}" for c in cs) + "]"

        parts = []
        if self.clauses:
            parts.append(f"clauses={cl(self.clauses)}")
        if self.soft:
            parts.append(f"soft={cl(self.soft)}")
        if self.disposed:
            parts.append(f"disposed={cl(self.disposed)}")
        if self.edges:
            parts.append("edges=[" + ", ".join(f"{u}-{v}" for u, v in self.edges) + "]")
        return " ".join(parts) or "empty"


class InstanceIndex:
    """Per-variable indexes for extracting local instances quickly."""

    def __init__(self, instance: CnfFormula | PartialMaxSatInstance | Graph):
        self.instance = instance
        self.hard: list[frozenset[int]] = []
        self.soft: list[frozenset[int]] = []
        self.adj: dict[int, set[int]] = {}
        if isinstance(instance, Graph):
            self.graph = instance
            self.adj = instance.adjacency()
            self.free = frozenset()
        else:
            if isinstance(instance, PartialMaxSatInstance):
                self.hard, self.soft = list(instance.hard.clauses), list(instance.soft)
            else:
                self.hard = list(instance.clauses)
            self.graph = primal_graph(instance)
            used = {abs(lit) for c in self.hard + self.soft for lit in c}
            self.free = frozenset(set(self.graph.vertices) - used)
        self._hard_idx = self._by_var(self.hard)
        self._soft_idx = self._by_var(self.soft)

    @staticmethod
    def _by_var(clauses):
        idx: dict[int, list[int]] = {}
        empty = []
        for i, c in enumerate(clauses):
            vs = {abs(lit) for lit in c}
            if not vs:
                empty.append(i)
            for v in vs:
                idx.setdefault(v, []).append(i)
        return idx, empty, [frozenset(abs(lit) for lit in c) for c in clauses]

    @staticmethod
    def _covered(index, within: set[int]) -> list[int]:
        by_var, empty, varsets = index
        cand = set(empty)
        for v in within:
            cand.update(by_var.get(v, ()))
        return sorted(i for i in cand if varsets[i] <= within)

    def local(self, ctx: NodeContext) -> LocalInstance:
        bag = set(ctx.bag)
        if isinstance(self.instance, Graph):
            edges = tuple((u, v) for u in sorted(bag) for v in sorted(self.adj[u]) if u < v and v in bag)
            fresh = tuple(e for e in edges if not any(e[0] in b and e[1] in b for b in ctx.child_bags))
            return LocalInstance(edges=edges, fresh_edges=fresh)
        _, _, hard_vars = self._hard_idx
        hard = self._covered(self._hard_idx, bag)
        fresh = [i for i in hard if not any(hard_vars[i] <= b for b in ctx.child_bags)]
        soft = self._covered(self._soft_idx, bag)
        work, scope = set(ctx.work), set(ctx.scope)
        _, _, soft_vars = self._soft_idx
        disposed = [i for i in self._covered(self._soft_idx, work) if soft_vars[i] and not soft_vars[i] <= scope]
        return LocalInstance(
            clauses=tuple(self.hard[i] for i in hard),
            fresh_clauses=tuple(self.hard[i] for i in fresh),
            soft=tuple(self.soft[i] for i in soft),
            disposed=tuple(self.soft[i] for i in disposed),
            free=frozenset(ctx.introduced) & self.free,
        )


class ProblemBundle:
    """Placeholder set of a table algorithm; defaults are the empty parts.

    Subclasses override what their problem needs. All methods must be pure
    functions of their arguments.
    """

    name = "abstract"

    def var_column(self, v: int) -> Column:
        raise NotImplementedError

    def aux_columns(self, scope: Sequence[int]) -> list[Column]:
        return []

    def columns_for(self, scope: Sequence[int]) -> list[Column]:
        return [self.var_column(v) for v in scope] + self.aux_columns(scope)

    def leaf_table(self) -> Table:
        raise NotImplementedError

    def intr_table(self, v: int, local: LocalInstance) -> Table:
        raise NotImplementedError

    def intr_filter(self, ctx: NodeContext, local: LocalInstance) -> Formula:
        return TRUE

    def intr_add_cols(self, ctx: NodeContext, local: LocalInstance) -> list[tuple[Column, ValueExpr]]:
        return []

    def rem_filter(self, ctx: NodeContext, local: LocalInstance) -> Formula:
        return TRUE

    def rem_cols(self, ctx: NodeContext) -> list[str]:
        return []

    def rem_group_cols(self, ctx: NodeContext) -> list[str]:
        return []

    def rem_scratch(self, ctx: NodeContext, local: LocalInstance) -> list[tuple[Column, ValueExpr]]:
        return []

    def rem_aggr(self, ctx: NodeContext, local: LocalInstance) -> list[tuple[Column, Aggregate]]:
        return []

    def join_add_filter(self, ctx: NodeContext) -> Formula:
        return TRUE

    def join_add_cols(self, ctx: NodeContext) -> list[tuple[Column, ValueExpr]]:
        return []

    def graph(self, instance) -> Graph:
        return instance if isinstance(instance, Graph) else primal_graph(instance)

    def finalize(self, root: Table, index: InstanceIndex) -> tuple[str, int | None]:
        raise NotImplementedError


@dataclass(frozen=True)
class EngineConfig:
    workers: int = 1
    row_cap: int | None = DEFAULT_ROW_CAP
    debug: bool = False
    parent_projection: bool | None = None  # default: on, except in debug mode
    validate: bool = True

    @property
    def project_to_parent(self) -> bool:
        return (not self.debug) if self.parent_projection is None else self.parent_projection


@dataclass
class NodeTrace:
    node: int
    bag: tuple[int, ...]
    local: str
    input_rows: int
    output_rows: int
    plan: list[str]
    table: Table

    def dump(self) -> str:
        head = " ".join(["node", str(self.node), "bag", *map(str, self.bag), "rows", str(self.output_rows)])
        lines = [head, f"local {self.local}", f"in {self.input_rows}", "plan " + " ; ".join(self.plan)]
        lines.append("cols " + " ".join(self.table.names))
        body = self.table.dump()
        if body:
            lines.append(body)
        return "\n".join(lines)


@dataclass
class RunStats:
    width: int
    nodes: int
    max_rows: int
    wall_seconds: float
    workers: int


@dataclass
class Solution:
    kind: str  # count | optimum | unsat
    value: int | None
    stats: RunStats | None = None
    trace: list[NodeTrace] = field(default_factory=list)

    def line(self) -> str:
        if self.kind == "unsat":
            return "s UNSAT"
        return f"{'s' if self.kind == 'count' else 'o'} {self.value}"

    def stats_record(self) -> dict:
        s = self.stats
        return {
            "width": s.width,
            "nodes": s.nodes,
            "maxRows": s.max_rows,
            "wallSeconds": s.wall_seconds,
            "solution": None if self.kind == "unsat" else self.value,
        }

    def trace_dump(self) -> str:
        return "\n".join(t.dump() for t in self.trace)


def node_contexts(td: TreeDecomposition, project_to_parent: bool = True) -> dict[int, NodeContext]:
    scope: dict[int, tuple[int, ...]] = {}
    for n in td.nodes:
        p = td.parent(n)
        if p is None:
            scope[n] = ()
        elif project_to_parent:
            scope[n] = tuple(sorted(td.bags[n] & td.bags[p]))
        else:
            scope[n] = tuple(sorted(td.bags[n]))
    out = {}
    for n in td.nodes:
        kids = td.children[n]
        child_scopes = tuple(scope[c] for c in kids)
        below = set().union(*child_scopes)
        work = set(td.bags[n]) | below
        out[n] = NodeContext(
            node=n,
            bag=tuple(sorted(td.bags[n])),
            children=kids,
            child_bags=tuple(td.bags[c] for c in kids),
            child_scopes=child_scopes,
            introduced=tuple(sorted(td.bags[n] - below)),
            removed=tuple(sorted(work - set(scope[n]))),
            scope=scope[n],
        )
    return out


def _apply_ready(tab: Table, pending: list[Formula], plan: list[str] | None):
    ready = [c for c in pending if c.columns() <= set(tab.names)]
    if ready:
        phi = conjoin(ready)
        tab = select(tab, phi)
        if plan is not None:
            plan.append(f"σ[{phi}]")
    return tab, [c for c in pending if c not in ready]


def _join_children(ctx, tables, bundle, cap, plan):
    renamed = [rename(t, {n: child_col(n, j) for n in t.names}) for j, t in enumerate(tables)]
    owner = {v: 0 for v in ctx.child_scopes[0]}
    acc = renamed[0]
    for j in range(1, len(renamed)):
        eqs = [
            EqCol(child_col(var_name(v), owner[v]), child_col(var_name(v), j))
            for v in ctx.child_scopes[j]
            if v in owner
        ]
        acc = theta_join(acc, renamed[j], conjoin(eqs), max_rows=cap)
        for v in ctx.child_scopes[j]:
            owner.setdefault(v, j)
    jf = bundle.join_add_filter(ctx)
    if jf != TRUE:
        acc = select(acc, jf)
    merge = [(bundle.var_column(v), Col(child_col(var_name(v), owner[v]))) for v in sorted(owner)]
    merge += bundle.join_add_cols(ctx)
    if plan is not None:
        shared = sorted(set().union(*[set(s) for s in ctx.child_scopes]))
        plan.append(f"⋈[children {','.join(map(str, ctx.children))} on {' '.join(map(var_name, shared)) or '-'}]")
        extra = ", ".join(f"{c.name}←{e}" for c, e in bundle.join_add_cols(ctx))
        if extra:
            plan.append(f"Π̇[{extra}]")
    return extended_project(acc, [], merge)


def compute_node_table(
    ctx: NodeContext,
    child_tables: Sequence[Table],
    bundle: ProblemBundle,
    local: LocalInstance,
    *,
    row_cap: int | None = DEFAULT_ROW_CAP,
    plan: list[str] | None = None,
) -> Table:
    """One node's table from its children's tables (see module docstring)."""
    for scope, t in zip(ctx.child_scopes, child_tables):
        expected = {c.name for c in bundle.columns_for(scope)}
        if set(t.names) != expected:
            raise SchemaError(f"node {ctx.node}: child table has columns {sorted(t.names)}, expected {sorted(expected)}")

    if child_tables:
        tab = _join_children(ctx, child_tables, bundle, row_cap, plan)
    else:
        tab = bundle.leaf_table()
        if plan is not None:
            plan.append("leaf")

    adds = bundle.intr_add_cols(ctx, local)
    redefined = {c.name for c, _ in adds}
    early, late = [], []
    for c in conjuncts(bundle.intr_filter(ctx, local)):
        (late if c.columns() & redefined else early).append(c)
    tab, early = _apply_ready(tab, early, plan)
    for v in ctx.introduced:
        intro = bundle.intr_table(v, local)
        tab = cross_join(tab, intro, max_rows=row_cap)
        if plan is not None:
            plan.append(f"× intr({var_name(v)})")
        tab, early = _apply_ready(tab, early, plan)
    if early:
        raise SchemaError(f"node {ctx.node}: filter references columns outside the bag: {early}")

    if adds:
        tab = extended_project(tab, [n for n in tab.names if n not in redefined], adds)
        if plan is not None:
            plan.append("Π̇[" + ", ".join(f"{c.name}←{e}" for c, e in adds) + "]")
    if late:
        tab = select(tab, conjoin(late))
        if plan is not None:
            plan.append(f"σ[{conjoin(late)}]")

    rf = bundle.rem_filter(ctx, local)
    if rf != TRUE:
        tab = select(tab, rf)
        if plan is not None:
            plan.append(f"σ[{rf}]")

    scratch = bundle.rem_scratch(ctx, local)
    if scratch:
        tab = extended_project(tab, tab.names, scratch)
    by = [var_name(v) for v in ctx.scope] + bundle.rem_group_cols(ctx)
    dropped = set(bundle.rem_cols(ctx)) & set(by)
    if dropped:
        raise SchemaError(f"node {ctx.node}: columns {sorted(dropped)} are both removed and grouped")
    aggr = bundle.rem_aggr(ctx, local)
    tab = group_aggregate(tab, by, aggr)
    if plan is not None:
        if scratch:
            plan.append("Π̇[" + ", ".join(f"{c.name}←{e}" for c, e in scratch) + "]")
        plan.append(f"G[{' '.join(by) or '∅'} | " + ", ".join(f"{c.name}←{a}" for c, a in aggr) + "]")
    return tab


def _schedule(td: TreeDecomposition, compute, workers: int) -> None:
    if workers <= 1:
        for n in td.postorder():
            compute(n)
        return
    waiting = {n: len(td.children[n]) for n in td.nodes}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        running = {pool.submit(compute, n): n for n in td.nodes if waiting[n] == 0}
        while running:
            done, _ = wait(running, return_when=FIRST_COMPLETED)
            for fut in done:
                n = running.pop(fut)
                fut.result()
                p = td.parent(n)
                if p is not None:
                    waiting[p] -= 1
                    if waiting[p] == 0:
                        running[pool.submit(compute, p)] = p


def run_dp(
    instance: CnfFormula | PartialMaxSatInstance | Graph,
    td: TreeDecomposition,
    bundle: ProblemBundle,
    config: EngineConfig | None = None,
) -> Solution:
    """Bottom-up dynamic programming; the root table is read by the bundle."""
    config = config or EngineConfig()
    start = time.perf_counter()
    if config.validate:
        bad = validate(td, bundle.graph(instance))
        if bad is not None:
            raise DecompositionError(str(bad))
    index = InstanceIndex(instance)
    ctxs = node_contexts(td, config.project_to_parent)
    tables: dict[int, Table] = {}
    traces: dict[int, NodeTrace] = {}
    sizes: dict[int, int] = {}

    def compute(n: int) -> None:
        ctx = ctxs[n]
        local = index.local(ctx)
        kids = [tables[c] for c in ctx.children]
        plan = [] if config.debug else None
        table = compute_node_table(ctx, kids, bundle, local, row_cap=config.row_cap, plan=plan)
        tables[n] = table
        sizes[n] = len(table)
        if config.debug:
            traces[n] = NodeTrace(n, ctx.bag, local.describe(), sum(map(len, kids)) if kids else len(bundle.leaf_table()), len(table), plan, table)
        else:
            for c in ctx.children:
                del tables[c]

    _schedule(td, compute, config.workers)
    kind, value = bundle.finalize(tables[td.root], index)
    stats = RunStats(
        width=td.width,
        nodes=len(td.bags),
        max_rows=max(sizes.values(), default=0),
        wall_seconds=time.perf_counter() - start,
        workers=config.workers,
    )
    order = td.postorder()
    return Solution(kind, value, stats, [traces[n] for n in order] if config.debug else [])
