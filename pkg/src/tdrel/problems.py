"""Table algorithms for #SAT, #o-COL, MinVC, partial MaxSAT and MinIDS,
with brute-force oracles for checking them."""

from __future__ import annotations

import numpy as np

from .engine import ProblemBundle, Solution, child_col, var_name
from .instance import CnfFormula, Graph, PartialMaxSatInstance
from .relalg import (
    COUNTER,
    MAX,
    MEASURE,
    MIN,
    SUM,
    Add,
    BoolOr,
    Col,
    Column,
    Formula,
    Indicator,
    Mul,
    EqCol,
    Not,
    Or,
    Table,
    bounded,
    conjoin,
    is_,
    not_,
)

CNT = Column("cnt", COUNTER)
CARD = Column("card", MEASURE)
SCRATCH = Column("_rem", MEASURE)

PROBLEMS = ("sharpsat", "col", "vc", "maxsat", "ids")


class UnsatError(Exception):
    """No feasible solution exists where the problem requires one."""


def clause_formula(clause) -> Formula:
    """Disjunction of literals over the variables' columns."""
    lits = sorted(clause, key=lambda x: (abs(x), x < 0))
    return Or(*[is_(var_name(x)) if x > 0 else not_(var_name(-x)) for x in lits])


def _boolean_intro(v: int) -> Table:
    return Table([Column(var_name(v))], {var_name(v): [0, 1]})


def _root_value(root: Table, col: str) -> int | None:
    if len(root) == 0:
        return None
    if len(root) != 1 or list(root.names) != [col]:
        raise ValueError(f"root table must be a single {col} row, got columns {root.names} and {len(root)} rows")
    return int(root.values(col)[0])


class SharpSatBundle(ProblemBundle):
    """Model counting: one counter per partial assignment."""

    name = "sharpsat"

    def __init__(self, free_vars: str = "count"):
        if free_vars not in ("count", "ignore"):
            raise ValueError("free_vars must be 'count' or 'ignore'")
        self.free_vars = free_vars

    def var_column(self, v):
        return Column(var_name(v))

    def aux_columns(self, scope):
        return [CNT]

    def leaf_table(self):
        return Table([CNT], {"cnt": [1]})

    def intr_table(self, v, local):
        # variables in no clause are fixed here and accounted for at the root
        if v in local.free:
            return Table([self.var_column(v)], {var_name(v): [0]})
        return _boolean_intro(v)

    def intr_filter(self, ctx, local):
        return conjoin(clause_formula(c) for c in local.fresh_clauses)

    def rem_aggr(self, ctx, local):
        return [(CNT, SUM("cnt"))]

    def join_add_cols(self, ctx):
        return [(CNT, Mul(*[Col(child_col("cnt", j)) for j in range(len(ctx.children))]))]

    def finalize(self, root, index):
        cnt = _root_value(root, "cnt") or 0
        if self.free_vars == "count":
            cnt *= 2 ** len(index.free)
        return "count", cnt


class ColBundle(ProblemBundle):
    """Counting proper colourings with ``o`` colours 0..o-1."""

    name = "col"

    def __init__(self, colors: int):
        if colors < 1:
            raise ValueError("need at least one colour")
        self.colors = colors
        self.domain = bounded(0, colors - 1)

    def var_column(self, v):
        return Column(var_name(v), self.domain)

    def aux_columns(self, scope):
        return [CNT]

    def leaf_table(self):
        return Table([CNT], {"cnt": [1]})

    def intr_table(self, v, local):
        return Table([self.var_column(v)], {var_name(v): list(range(self.colors))})

    def intr_filter(self, ctx, local):
        return conjoin(Not(EqCol(var_name(u), var_name(v))) for u, v in local.fresh_edges)

    def rem_aggr(self, ctx, local):
        return [(CNT, SUM("cnt"))]

    def join_add_cols(self, ctx):
        return [(CNT, Mul(*[Col(child_col("cnt", j)) for j in range(len(ctx.children))]))]

    def finalize(self, root, index):
        return "count", _root_value(root, "cnt") or 0


class _MeasureBundle(ProblemBundle):
    """Shared parts of the cardinality-optimizing bundles."""

    aggregate = staticmethod(MIN)

    def var_column(self, v):
        return Column(var_name(v))

    def aux_columns(self, scope):
        return [CARD]

    def leaf_table(self):
        return Table([CARD], {"card": [0]})

    def intr_table(self, v, local):
        return _boolean_intro(v)

    def rem_scratch(self, ctx, local):
        return [(SCRATCH, Add(Col("card"), *self.summands(ctx, local)))]

    def summands(self, ctx, local):
        return [Col(var_name(a)) for a in ctx.removed]

    def rem_aggr(self, ctx, local):
        return [(CARD, self.aggregate("_rem"))]

    def join_add_cols(self, ctx):
        return [(CARD, Add(*[Col(child_col("card", j)) for j in range(len(ctx.children))]))]

    def finalize(self, root, index):
        card = _root_value(root, "card")
        if card is None:
            raise UnsatError(f"{self.name}: empty root table")
        return "optimum", card


class VcBundle(_MeasureBundle):
    """Minimum vertex cover."""

    name = "vc"

    def intr_filter(self, ctx, local):
        return conjoin(Or(is_(var_name(u)), is_(var_name(v))) for u, v in local.fresh_edges)


class MaxSatBundle(_MeasureBundle):
    """Partial MaxSAT: hard clauses filter rows, soft ones are scored once."""

    name = "maxsat"
    aggregate = staticmethod(MAX)

    def intr_filter(self, ctx, local):
        return conjoin(clause_formula(c) for c in local.fresh_clauses)

    def summands(self, ctx, local):
        return [Indicator(clause_formula(c)) for c in local.disposed]

    def finalize(self, root, index):
        card = _root_value(root, "card")
        if card is None:
            return "unsat", None
        return "optimum", card


def dom(v: int) -> str:
    return f"d{v}"


class IdsBundle(_MeasureBundle):
    """Minimum independent dominating set; ``d{u}`` marks dominated vertices."""

    name = "ids"

    def aux_columns(self, scope):
        return [CARD] + [Column(dom(u)) for u in scope]

    def intr_table(self, v, local):
        return Table([self.var_column(v), Column(dom(v))], {var_name(v): [0, 1], dom(v): [0, 1]})

    def intr_filter(self, ctx, local):
        return conjoin(Or(not_(var_name(u)), not_(var_name(v))) for u, v in local.fresh_edges)

    def intr_add_cols(self, ctx, local):
        nbrs: dict[int, list[int]] = {}
        for u, v in local.fresh_edges:
            nbrs.setdefault(u, []).append(v)
            nbrs.setdefault(v, []).append(u)
        return [
            (Column(dom(u)), BoolOr(Col(dom(u)), *[Col(var_name(w)) for w in sorted(ws)]))
            for u, ws in sorted(nbrs.items())
        ]

    def rem_filter(self, ctx, local):
        return conjoin(is_(dom(a)) for a in ctx.removed)

    def rem_cols(self, ctx):
        return [dom(a) for a in ctx.removed]

    def rem_group_cols(self, ctx):
        return [dom(u) for u in ctx.scope]

    def join_add_cols(self, ctx):
        owners: dict[int, list[int]] = {}
        for j, scope in enumerate(ctx.child_scopes):
            for u in scope:
                owners.setdefault(u, []).append(j)
        flags = [
            (Column(dom(u)), BoolOr(*[Col(child_col(dom(u), j)) for j in js]))
            for u, js in sorted(owners.items())
        ]
        return super().join_add_cols(ctx) + flags


def sharpsat_bundle(free_vars: str = "count") -> SharpSatBundle:
    return SharpSatBundle(free_vars)


def col_bundle(colors: int) -> ColBundle:
    return ColBundle(colors)


def vc_bundle() -> VcBundle:
    return VcBundle()


def maxsat_bundle() -> MaxSatBundle:
    return MaxSatBundle()


def ids_bundle() -> IdsBundle:
    return IdsBundle()


def make_bundle(problem: str, *, colors: int | None = None, free_vars: str = "count") -> ProblemBundle:
    if problem == "sharpsat":
        return sharpsat_bundle(free_vars)
    if problem == "col":
        if colors is None:
            raise ValueError("colouring needs a colour count")
        return col_bundle(colors)
    if problem in ("vc", "maxsat", "ids"):
        return {"vc": vc_bundle, "maxsat": maxsat_bundle, "ids": ids_bundle}[problem]()
    raise ValueError(f"unknown problem {problem!r}")


# -- oracles -----------------------------------------------------------------

ORACLE_MAX_VARS = 20
_CHUNK = 1 << 16


def _assignments(n: int, base: int = 2):
    """All assignments in chunks; yields arrays of shape (rows, n+1) with a
    dummy column 0 so that variable v sits at index v."""
    total = base**n
    weights = base ** np.arange(n, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // weights[None, :]) % base
        yield np.concatenate([np.zeros((len(idx), 1), dtype=np.int64), digits], axis=1)


def _satisfied(assign: np.ndarray, clause) -> np.ndarray:
    out = np.zeros(len(assign), dtype=bool)
    for lit in clause:
        col = assign[:, abs(lit)]
        out |= (col == 1) if lit > 0 else (col == 0)
    return out


def oracle(problem: str, instance, *, colors: int | None = None, free_vars: str = "count") -> Solution:
    """Answer by exhaustive enumeration over at most 20 variables or vertices."""
    n = instance.num_vertices if isinstance(instance, Graph) else instance.num_vars
    if n > ORACLE_MAX_VARS:
        raise ValueError(f"oracle refuses {n} > {ORACLE_MAX_VARS} variables")
    if problem == "sharpsat":
        assert isinstance(instance, CnfFormula)
        count = 0
        for a in _assignments(n):
            ok = np.ones(len(a), dtype=bool)
            for c in instance.clauses:
                ok &= _satisfied(a, c)
            count += int(ok.sum())
        if free_vars == "ignore":
            count >>= n - len(instance.occurring())
        return Solution("count", count)
    if problem == "col":
        assert isinstance(instance, Graph)
        if colors is None or colors < 1:
            raise ValueError("colouring needs a colour count")
        if colors**n > 1 << 26:
            raise ValueError("oracle refuses more than 2^26 colourings")
        count = 0
        for a in _assignments(n, colors):
            ok = np.ones(len(a), dtype=bool)
            for u, v in instance.edges:
                ok &= a[:, u] != a[:, v]
            count += int(ok.sum())
        return Solution("count", count)
    if problem in ("vc", "ids"):
        assert isinstance(instance, Graph)
        best = None
        for a in _assignments(n):
            ok = np.ones(len(a), dtype=bool)
            if problem == "vc":
                for u, v in instance.edges:
                    ok &= (a[:, u] | a[:, v]).astype(bool)
            else:
                dominated = a.copy()
                for u, v in instance.edges:
                    ok &= ~(a[:, u] & a[:, v]).astype(bool)
                    dominated[:, u] |= a[:, v]
                    dominated[:, v] |= a[:, u]
                ok &= dominated[:, 1:].all(axis=1) if n else ok
            if ok.any():
                size = int(a[ok, 1:].sum(axis=1).min())
                best = size if best is None else min(best, size)
        if best is None:
            raise UnsatError(f"{problem}: no feasible set")
        return Solution("optimum", best)
    if problem == "maxsat":
        assert isinstance(instance, PartialMaxSatInstance)
        best = None
        for a in _assignments(n):
            ok = np.ones(len(a), dtype=bool)
            for c in instance.hard.clauses:
                ok &= _satisfied(a, c)
            if not ok.any():
                continue
            score = np.zeros(len(a), dtype=np.int64)
            for c in instance.soft:
                score += _satisfied(a, c)
            top = int(score[ok].max())
            best = top if best is None else max(best, top)
        return Solution("unsat", None) if best is None else Solution("optimum", best)
    raise ValueError(f"unknown problem {problem!r}")
