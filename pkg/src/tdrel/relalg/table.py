"""Columns, domains and the immutable set-semantics `Table`."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

_INT_SAFE = 2**62


class RelAlgError(Exception):
    """Base error for the table engine."""


class SchemaError(RelAlgError):
    """Unknown, duplicate or incompatible columns."""


class DomainError(RelAlgError):
    """A value falls outside its column's domain."""


class CapacityError(RelAlgError):
    """An operation would produce more rows than the configured cap."""


@dataclass(frozen=True)
class Domain:
    """Value domain of a column.

    ``kind`` is one of ``boolean``, ``bounded``, ``counter`` (non-negative,
    unbounded) or ``measure`` (any integer, unbounded).
    """

    kind: str
    lo: int | None = None
    hi: int | None = None

    def __post_init__(self):
        if self.kind not in ("boolean", "bounded", "counter", "measure"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "bounded" and (self.lo is None or self.hi is None or self.lo > self.hi):
            raise ValueError("bounded domain needs lo <= hi")

    @property
    def finite(self) -> bool:
        return self.kind in ("boolean", "bounded")

    @property
    def size(self) -> int | None:
        return self.hi - self.lo + 1 if self.finite else None

    def check(self, values: np.ndarray) -> None:
        if len(values) == 0:
            return
        lo, hi = values.min(), values.max()
        if self.lo is not None and lo < self.lo:
            raise DomainError(f"value {lo} below {self}")
        if self.hi is not None and hi > self.hi:
            raise DomainError(f"value {hi} above {self}")

    def __str__(self):
        if self.kind == "bounded":
            return f"int[{self.lo}..{self.hi}]"
        return self.kind


BOOLEAN = Domain("boolean", 0, 1)
COUNTER = Domain("counter", 0, None)
MEASURE = Domain("measure", None, None)


def bounded(lo: int, hi: int) -> Domain:
    return Domain("bounded", lo, hi)


@dataclass(frozen=True)
class Column:
    name: str
    domain: Domain = BOOLEAN

    def __str__(self):
        return self.name


def storage(domain: Domain, values: Any) -> np.ndarray:
    """Coerce values into the array type used for ``domain``."""
    arr = np.asarray(values)
    if domain.finite:
        dtype = np.int8 if -128 <= domain.lo and domain.hi <= 127 else np.int64
        if arr.dtype == object:
            arr = arr.astype(np.int64)
        return arr.astype(dtype, copy=False)
    if arr.dtype == object:
        return arr
    if arr.dtype.kind == "b" or arr.dtype.kind in "iu":
        return arr.astype(np.int64, copy=False)
    raise DomainError(f"non-integer values for {domain}")


def codes(arr: np.ndarray, domain: Domain | None = None) -> tuple[np.ndarray, int]:
    """Dense order-preserving integer codes for one column plus their radix."""
    if domain is not None and domain.finite:
        return arr.astype(np.int64) - domain.lo, domain.size
    uniq, inv = np.unique(arr, return_inverse=True)
    return inv.astype(np.int64).reshape(-1), max(len(uniq), 1)


def group_ids(arrays: Sequence[np.ndarray], domains: Sequence[Domain | None], n: int) -> tuple[np.ndarray, int]:
    """Lexicographic dense ids for the rows spanned by ``arrays``.

    Ids are ordered like the rows under lexicographic comparison of the
    columns in the given order, so sorting by id is the canonical order.
    """
    if not arrays:
        return np.zeros(n, dtype=np.int64), 1 if n else 0
    key = np.zeros(n, dtype=np.int64)
    span = 1
    for arr, dom in zip(arrays, domains):
        c, radix = codes(arr, dom)
        if span * radix >= _INT_SAFE:
            uniq, key = np.unique(key, return_inverse=True)
            key = key.astype(np.int64).reshape(-1)
            span = max(len(uniq), 1)
        key = key * radix + c
        span *= radix
    uniq, inv = np.unique(key, return_inverse=True)
    return inv.astype(np.int64).reshape(-1), len(uniq)


class Table:
    """A finite set of rows over named, typed columns.

    Tables are immutable: operators never modify their inputs. Rows are
    stored column-wise and kept in canonical (lexicographic) order.
    """

    __slots__ = ("_columns", "_index", "_data", "_n")

    def __init__(self, columns: Sequence[Column], data: Mapping[str, Any] | None = None, nrows: int | None = None):
        cols = tuple(columns)
        arrays = {}
        for col in cols:
            values = [] if data is None else data[col.name]
            arr = storage(col.domain, values)
            col.domain.check(arr)
            arrays[col.name] = arr
        if nrows is None:
            nrows = len(next(iter(arrays.values()))) if arrays else 0
        self._init(cols, arrays, nrows)
        self._canonicalize()

    def _init(self, cols, arrays, n):
        self._columns = cols
        self._index = {c.name: c for c in cols}
        if len(self._index) != len(cols):
            raise SchemaError(f"duplicate column names in {[c.name for c in cols]}")
        for name, arr in arrays.items():
            if len(arr) != n:
                raise SchemaError(f"column {name} has {len(arr)} values, expected {n}")
        if not cols and n > 1:
            n = 1
        self._data = arrays
        self._n = n

    @classmethod
    def _raw(cls, columns, arrays, n, *, unique: bool) -> "Table":
        t = cls.__new__(cls)
        t._init(tuple(columns), dict(arrays), n)
        if not unique:
            t._canonicalize()
        return t

    def _canonicalize(self) -> None:
        if self._n <= 1 or not self._columns:
            return
        ids, g = group_ids(self.arrays(), [c.domain for c in self._columns], self._n)
        _, first = np.unique(ids, return_index=True)
        if g == self._n and np.all(first == np.arange(self._n)):
            return
        self._data = {k: v[first] for k, v in self._data.items()}
        self._n = len(first)

    @classmethod
    def from_rows(cls, columns: Sequence[Column], rows: Iterable[Sequence[Any] | Mapping[str, Any]]) -> "Table":
        """Build a table from tuples (in column order) or name-keyed mappings."""
        cols = tuple(columns)
        rows = list(rows)
        values: dict[str, list] = {c.name: [] for c in cols}
        for row in rows:
            if isinstance(row, Mapping):
                if set(row) != set(values):
                    raise SchemaError(f"row keys {sorted(row)} do not match columns")
                for c in cols:
                    values[c.name].append(row[c.name])
            else:
                row = tuple(row)
                if len(row) != len(cols):
                    raise SchemaError(f"row {row} has wrong arity")
                for c, v in zip(cols, row):
                    values[c.name].append(v)
        if not cols:
            return cls((), None, 1 if rows else 0)
        data = {k: np.array(v, dtype=object) if v else np.zeros(0, dtype=np.int64) for k, v in values.items()}
        for c in cols:
            arr = data[c.name]
            if arr.dtype == object and all(isinstance(x, (int, np.integer)) and abs(int(x)) < _INT_SAFE for x in arr):
                data[c.name] = arr.astype(np.int64)
        return cls(cols, data)

    @classmethod
    def unit(cls) -> "Table":
        """The one-row table over no columns."""
        return cls((), None, 1)

    @property
    def columns(self) -> tuple[Column, ...]:
        return self._columns

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self._columns)

    def column(self, name: str) -> Column:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown column {name!r}; have {list(self.names)}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def values(self, name: str) -> np.ndarray:
        self.column(name)
        return self._data[name]

    def arrays(self) -> list[np.ndarray]:
        return [self._data[c.name] for c in self._columns]

    def __len__(self) -> int:
        return self._n

    def rows(self) -> Iterator[dict[str, int]]:
        """Rows as dicts in canonical order."""
        cols = [(c.name, self._data[c.name].tolist()) for c in self._columns]
        for i in range(self._n):
            yield {name: vals[i] for name, vals in cols}

    def tuples(self) -> list[tuple]:
        lists = [self._data[c.name].tolist() for c in self._columns]
        return list(zip(*lists)) if lists else [()] * self._n

    def to_set(self) -> frozenset:
        """Order-insensitive content: a set of rows, each a frozenset of (column, value)."""
        names = self.names
        return frozenset(frozenset(zip(names, (int(v) for v in t))) for t in self.tuples())

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        if {c.name: c.domain for c in self._columns} != {c.name: c.domain for c in other._columns}:
            return False
        return len(self) == len(other) and self.to_set() == other.to_set()

    __hash__ = None

    def dump(self) -> str:
        """One row per line, values space-separated in declared column order."""
        return "\n".join(" ".join(str(v) for v in t) for t in self.tuples())

    def __repr__(self):
        head = ", ".join(f"{c.name}:{c.domain}" for c in self._columns)
        return f"<Table [{head}] rows={self._n}>"
