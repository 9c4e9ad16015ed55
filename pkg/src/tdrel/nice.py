"""Reference table algorithms on nice decompositions.

One function per node type and problem, written directly in relational
algebra without the placeholder machinery of `tdrel.engine`. Tables keep
every bag column (no projection towards the parent), so they can be
compared node by node with an engine run in debug mode.
"""

from __future__ import annotations

from .decomp import TreeDecomposition, node_type
from .engine import var_name
from .instance import Graph, PartialMaxSatInstance
from .problems import clause_formula, dom
from .relalg import (
    COUNTER,
    MEASURE,
    MAX,
    MIN,
    SUM,
    Add,
    BoolOr,
    Col,
    Column,
    EqCol,
    Indicator,
    Mul,
    Not,
    Or,
    Table,
    bounded,
    conjoin,
    cross_join,
    extended_project,
    group_aggregate,
    is_,
    not_,
    rename,
    select,
    theta_join,
)


def _clauses(instance):
    if isinstance(instance, PartialMaxSatInstance):
        return instance.hard.clauses, instance.soft
    return instance.clauses, ()


def _covered(clauses, bag):
    return [c for c in clauses if {abs(x) for x in c} <= bag]


def _edges(g: Graph, bag):
    return [(u, v) for u, v in sorted(g.edges) if u in bag and v in bag]


def _join_on_bag(left: Table, right: Table, bag) -> tuple[Table, list[str]]:
    """Join two tables over the same bag; right-hand columns get a prime."""
    names = [var_name(v) for v in sorted(bag)]
    right = rename(right, {n: n + "'" for n in right.names})
    phi = conjoin(EqCol(var_name(v), var_name(v) + "'") for v in sorted(bag))
    return theta_join(left, right, phi), names


def reference_tables(problem: str, instance, td: TreeDecomposition, *, colors: int | None = None) -> dict[int, Table]:
    """Node tables of the case-by-case algorithm; ``td`` must be nice."""
    hard, soft = ([], []) if isinstance(instance, Graph) else _clauses(instance)
    free = set()
    if problem == "sharpsat":
        free = set(range(1, instance.num_vars + 1)) - instance.occurring()
    val = bounded(0, colors - 1) if problem == "col" else None
    aux = "cnt" if problem in ("sharpsat", "col") else "card"
    aux_col = Column(aux, COUNTER if aux == "cnt" else MEASURE)

    def vcol(v):
        return Column(var_name(v), val) if val else Column(var_name(v))

    tables: dict[int, Table] = {}
    for n in td.postorder():
        bag = set(td.bags[n])
        kind = node_type(td, n)
        kids = td.children[n]
        if kind == "leaf":
            tab = Table([aux_col], {aux: [1 if aux == "cnt" else 0]})
        elif kind == "intr":
            (a,) = bag - td.bags[kids[0]]
            tab = tables[kids[0]]
            if problem == "col":
                new = Table([vcol(a)], {var_name(a): list(range(colors))})
            elif problem == "ids":
                new = Table([vcol(a), Column(dom(a))], {var_name(a): [0, 1], dom(a): [0, 1]})
            elif a in free:
                new = Table([vcol(a)], {var_name(a): [0]})
            else:
                new = Table([vcol(a)], {var_name(a): [0, 1]})
            tab = cross_join(tab, new)
            if problem in ("sharpsat", "maxsat"):
                tab = select(tab, conjoin(clause_formula(c) for c in _covered(hard, bag)))
            elif problem == "col":
                tab = select(tab, conjoin(Not(EqCol(var_name(u), var_name(v))) for u, v in _edges(instance, bag)))
            elif problem == "vc":
                tab = select(tab, conjoin(Or(is_(var_name(u)), is_(var_name(v))) for u, v in _edges(instance, bag)))
            else:
                es = _edges(instance, bag)
                tab = select(tab, conjoin(Or(not_(var_name(u)), not_(var_name(v))) for u, v in es))
                adds = []
                for u in sorted(bag):
                    nb = [w for e in es for w in e if u in e and w != u]
                    if nb:
                        adds.append((Column(dom(u)), BoolOr(Col(dom(u)), *[Col(var_name(w)) for w in nb])))
                changed = {c.name for c, _ in adds}
                tab = extended_project(tab, [x for x in tab.names if x not in changed], adds)
        elif kind == "rem":
            (a,) = td.bags[kids[0]] - bag
            tab = tables[kids[0]]
            by = [var_name(v) for v in sorted(bag)]
            if problem in ("sharpsat", "col"):
                tab = group_aggregate(tab, by, [(aux_col, SUM("cnt"))])
            elif problem == "vc":
                tab = group_aggregate(tab, by, [(aux_col, MIN(Add(Col("card"), Col(var_name(a)))))])
            elif problem == "maxsat":
                gone = [c for c in _covered(soft, td.bags[kids[0]]) if a in {abs(x) for x in c}]
                score = Add(Col("card"), *[Indicator(clause_formula(c)) for c in gone])
                tab = group_aggregate(tab, by, [(aux_col, MAX(score))])
            else:
                tab = select(tab, is_(dom(a)))
                by += [dom(v) for v in sorted(bag)]
                tab = group_aggregate(tab, by, [(aux_col, MIN(Add(Col("card"), Col(var_name(a)))))])
        elif kind == "join":
            left, right = tables[kids[0]], tables[kids[1]]
            extra = [dom(v) for v in sorted(bag)] if problem == "ids" else []
            joined, names = _join_on_bag(left, right, bag)
            combine = Mul if aux == "cnt" else Add
            adds = [(aux_col, combine(Col(aux), Col(aux + "'")))]
            adds += [(Column(d), BoolOr(Col(d), Col(d + "'"))) for d in extra]
            tab = extended_project(joined, names, adds)
        else:
            raise ValueError(f"node {n} is not a nice node")
        tables[n] = tab
    return tables
