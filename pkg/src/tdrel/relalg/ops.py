"""Relational-algebra operators over `Table` with set semantics.

Every operator is pure and returns a new table. Inputs are never
modified; results are deduplicated where the operator can create
duplicates (projections) and left alone where it cannot.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .expr import Aggregate, EqCol, Formula, ValueExpr, conjoin, conjuncts
from .table import (
    _INT_SAFE,
    CapacityError,
    Column,
    SchemaError,
    Table,
    group_ids,
    storage,
)


def _names(t: Table, cols: Iterable[str]) -> list[str]:
    out = list(dict.fromkeys(cols))
    for name in out:
        t.column(name)
    return out


def _check_cap(n: int, max_rows: int | None, what: str) -> None:
    if max_rows is not None and n > max_rows:
        raise CapacityError(f"{what} would produce {n} rows (cap {max_rows})")


def rename(t: Table, mapping: Mapping[str, str | Column]) -> Table:
    """Rename columns; names absent from ``mapping`` keep their name."""
    for old in mapping:
        t.column(old)
    cols, data = [], {}
    for col in t.columns:
        new = mapping.get(col.name, col.name)
        if isinstance(new, Column):
            if new.domain != col.domain:
                raise SchemaError(f"renaming {col.name} to {new.name} changes domain {col.domain} -> {new.domain}")
            new = new.name
        cols.append(Column(new, col.domain))
        data[new] = t.values(col.name)
    if len({c.name for c in cols}) != len(cols):
        raise SchemaError(f"renaming is not injective: {dict(mapping)}")
    return Table._raw(cols, data, len(t), unique=True)


def _take(t: Table, idx: np.ndarray, cols: Sequence[Column] | None = None, *, unique=True) -> Table:
    cols = t.columns if cols is None else cols
    return Table._raw(cols, {c.name: t.values(c.name)[idx] for c in cols}, len(idx), unique=unique)


def select(t: Table, phi: Formula) -> Table:
    """Rows satisfying ``phi``."""
    missing = phi.columns() - set(t.names)
    if missing:
        raise SchemaError(f"selection references unknown columns {sorted(missing)}")
    mask = phi.mask(t)
    if mask.all():
        return t
    return _take(t, np.flatnonzero(mask))


def cross_join(t1: Table, t2: Table, *, max_rows: int | None = None) -> Table:
    overlap = set(t1.names) & set(t2.names)
    if overlap:
        raise SchemaError(f"cross join over shared columns {sorted(overlap)}")
    n1, n2 = len(t1), len(t2)
    _check_cap(n1 * n2, max_rows, "cross join")
    data = {c.name: np.repeat(t1.values(c.name), n2) for c in t1.columns}
    data.update({c.name: np.tile(t2.values(c.name), n1) for c in t2.columns})
    return Table._raw(t1.columns + t2.columns, data, n1 * n2, unique=True)


def _equi_pairs(t1: Table, t2: Table, phi: Formula):
    left, right, rest = [], [], []
    n1, n2 = set(t1.names), set(t2.names)
    for c in conjuncts(phi):
        if isinstance(c, EqCol):
            if c.left in n1 and c.right in n2:
                left.append(c.left), right.append(c.right)
                continue
            if c.right in n1 and c.left in n2:
                left.append(c.right), right.append(c.left)
                continue
        rest.append(c)
    return left, right, conjoin(rest)


def theta_join(t1: Table, t2: Table, phi: Formula, *, max_rows: int | None = None) -> Table:
    """``select(cross_join(t1, t2), phi)``, evaluated as a sort-merge join on
    the equality conjuncts of ``phi`` that relate the two sides."""
    overlap = set(t1.names) & set(t2.names)
    if overlap:
        raise SchemaError(f"theta join over shared columns {sorted(overlap)}")
    missing = phi.columns() - set(t1.names) - set(t2.names)
    if missing:
        raise SchemaError(f"join predicate references unknown columns {sorted(missing)}")
    left, right, rest = _equi_pairs(t1, t2, phi)
    if not left:
        return select(cross_join(t1, t2, max_rows=max_rows), rest)

    n1, n2 = len(t1), len(t2)
    keys = []
    for a, b in zip(left, right):
        va, vb = t1.values(a), t2.values(b)
        if va.dtype == object or vb.dtype == object:
            keys.append(np.concatenate([va.astype(object), vb.astype(object)]))
        else:
            keys.append(np.concatenate([va.astype(np.int64), vb.astype(np.int64)]))
    ids, _ = group_ids(keys, [None] * len(keys), n1 + n2)
    lid, rid = ids[:n1], ids[n1:]

    order = np.argsort(rid, kind="stable")
    rsorted = rid[order]
    lo = np.searchsorted(rsorted, lid, side="left")
    hi = np.searchsorted(rsorted, lid, side="right")
    counts = hi - lo
    total = int(counts.sum())
    _check_cap(total, max_rows, "theta join")
    li = np.repeat(np.arange(n1), counts)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    ri = order[np.arange(total) + starts] if total else np.zeros(0, dtype=np.int64)

    data = {c.name: t1.values(c.name)[li] for c in t1.columns}
    data.update({c.name: t2.values(c.name)[ri] for c in t2.columns})
    out = Table._raw(t1.columns + t2.columns, data, total, unique=False)
    return select(out, rest)


def project(t: Table, cols: Iterable[str]) -> Table:
    """Restrict rows to ``cols``; duplicates collapse."""
    names = _names(t, cols)
    keep = [t.column(n) for n in names]
    return Table._raw(keep, {c.name: t.values(c.name) for c in keep}, len(t), unique=False)


def extended_project(
    t: Table,
    cols: Iterable[str],
    assignments: Sequence[tuple[Column, ValueExpr]] = (),
) -> Table:
    """Keep ``cols`` and add one computed column per ``(column, expr)``."""
    names = _names(t, cols)
    new = [c for c, _ in assignments]
    new_names = [c.name for c in new]
    if len(set(new_names)) != len(new_names):
        raise SchemaError(f"duplicate computed columns {new_names}")
    clash = set(new_names) & set(names)
    if clash:
        raise SchemaError(f"computed columns collide with kept columns {sorted(clash)}")
    data = {n: t.values(n) for n in names}
    for col, expr in assignments:
        arr = storage(col.domain, expr.evaluate(t))
        col.domain.check(arr)
        data[col.name] = arr
    out_cols = [t.column(n) for n in names] + new
    # a projection that keeps every input column cannot merge rows
    unique = set(names) == set(t.names)
    return Table._raw(out_cols, data, len(t), unique=unique)


def _reduce(kind: str, values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    if kind == "SUM":
        if values.dtype != object:
            values = values.astype(np.int64, copy=False)
            if len(values) and int(np.abs(values).max()) * len(values) >= _INT_SAFE:
                values = values.astype(object)
        return np.add.reduceat(values, starts)
    if kind == "MIN":
        return np.minimum.reduceat(values, starts)
    return np.maximum.reduceat(values, starts)


def group_aggregate(
    t: Table,
    by: Iterable[str],
    aggregates: Sequence[tuple[Column, Aggregate]],
) -> Table:
    """Group rows by ``by`` and add one aggregated column per entry.

    The result has exactly one row per distinct projection of ``t`` onto
    ``by``; columns outside ``by`` are dropped.
    """
    names = _names(t, by)
    out_names = [c.name for c, _ in aggregates]
    if set(out_names) & set(names) or len(set(out_names)) != len(out_names):
        raise SchemaError(f"aggregate outputs {out_names} collide with grouping columns")
    key_cols = [t.column(n) for n in names]
    out_cols = key_cols + [c for c, _ in aggregates]
    n = len(t)
    if n == 0:
        return Table._raw(out_cols, {c.name: storage(c.domain, np.zeros(0, dtype=np.int64)) for c in out_cols}, 0, unique=True)
    ids, g = group_ids([t.values(c) for c in names], [c.domain for c in key_cols], n)
    order = np.argsort(ids, kind="stable")
    sorted_ids = ids[order]
    starts = np.flatnonzero(np.concatenate([[True], sorted_ids[1:] != sorted_ids[:-1]]))
    first = order[starts]
    data = {c: t.values(c)[first] for c in names}
    for col, agg in aggregates:
        vals = agg.arg.evaluate(t)[order]
        arr = storage(col.domain, _reduce(agg.kind, vals, starts))
        col.domain.check(arr)
        data[col.name] = arr
    return Table._raw(out_cols, data, g, unique=True)
