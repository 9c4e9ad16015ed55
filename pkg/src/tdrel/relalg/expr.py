"""Equality formulas, per-row value expressions and aggregates.

Formulas and expressions are small immutable trees evaluated column-wise
over a table: a formula yields a boolean mask, an expression an integer
array (promoted to Python integers when int64 could overflow).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import TYPE_CHECKING

import numpy as np

from .table import SchemaError, _INT_SAFE

if TYPE_CHECKING:
    from .table import Table


def _lookup(table: "Table", name: str) -> np.ndarray:
    if name not in table:
        raise SchemaError(f"expression references unknown column {name!r}")
    return table.values(name)


# -- equality formulas -------------------------------------------------------


class Formula:
    """Boolean combination of ``column = constant`` / ``column = column`` atoms."""

    def columns(self) -> frozenset[str]:
        raise NotImplementedError

    def mask(self, table: "Table") -> np.ndarray:
        raise NotImplementedError

    def holds(self, row: dict) -> bool:
        raise NotImplementedError

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def columns(self):
        return frozenset()

    def mask(self, table):
        return np.full(len(table), self.value, dtype=bool)

    def holds(self, row):
        return self.value

    def __str__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class EqConst(Formula):
    column: str
    value: int

    def columns(self):
        return frozenset((self.column,))

    def mask(self, table):
        return _lookup(table, self.column) == self.value

    def holds(self, row):
        return row[self.column] == self.value

    def __str__(self):
        return f"{self.column}={self.value}"


@dataclass(frozen=True)
class EqCol(Formula):
    left: str
    right: str

    def columns(self):
        return frozenset((self.left, self.right))

    def mask(self, table):
        return _lookup(table, self.left) == _lookup(table, self.right)

    def holds(self, row):
        return row[self.left] == row[self.right]

    def __str__(self):
        return f"{self.left}={self.right}"


@dataclass(frozen=True, init=False)
class And(Formula):
    args: tuple[Formula, ...]

    def __init__(self, *args: Formula):
        object.__setattr__(self, "args", tuple(args))

    def columns(self):
        return frozenset().union(*(a.columns() for a in self.args))

    def mask(self, table):
        if not self.args:
            return np.ones(len(table), dtype=bool)
        return reduce(np.logical_and, (a.mask(table) for a in self.args))

    def holds(self, row):
        return all(a.holds(row) for a in self.args)

    def __str__(self):
        return "(" + " AND ".join(map(str, self.args)) + ")" if self.args else "TRUE"


@dataclass(frozen=True, init=False)
class Or(Formula):
    args: tuple[Formula, ...]

    def __init__(self, *args: Formula):
        object.__setattr__(self, "args", tuple(args))

    def columns(self):
        return frozenset().union(*(a.columns() for a in self.args))

    def mask(self, table):
        if not self.args:
            return np.zeros(len(table), dtype=bool)
        return reduce(np.logical_or, (a.mask(table) for a in self.args))

    def holds(self, row):
        return any(a.holds(row) for a in self.args)

    def __str__(self):
        return "(" + " OR ".join(map(str, self.args)) + ")" if self.args else "FALSE"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def columns(self):
        return self.arg.columns()

    def mask(self, table):
        return ~self.arg.mask(table)

    def holds(self, row):
        return not self.arg.holds(row)

    def __str__(self):
        return f"NOT {self.arg}"


def is_(column: str) -> Formula:
    """Boolean shorthand ``v`` for ``v=1``."""
    return EqConst(column, 1)


def not_(column: str) -> Formula:
    """Boolean shorthand ``NOT v`` for ``v=0``."""
    return EqConst(column, 0)


def conjuncts(phi: Formula) -> list[Formula]:
    """Flatten nested top-level conjunctions; drops TRUE."""
    if isinstance(phi, And):
        return [c for a in phi.args for c in conjuncts(a)]
    if phi == TRUE:
        return []
    return [phi]


def conjoin(parts) -> Formula:
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(*parts)


# -- value expressions -------------------------------------------------------


def _promote(arrays):
    if any(a.dtype == object for a in arrays):
        return [a.astype(object) for a in arrays]
    return [a.astype(np.int64, copy=False) for a in arrays]


def _bound(a: np.ndarray) -> int:
    if len(a) == 0:
        return 0
    return max(abs(int(a.max())), abs(int(a.min())))


class ValueExpr:
    """Integer-valued expression over a row."""

    def columns(self) -> frozenset[str]:
        raise NotImplementedError

    def evaluate(self, table: "Table") -> np.ndarray:
        raise NotImplementedError

    def __add__(self, other):
        return Add(self, _wrap(other))

    def __mul__(self, other):
        return Mul(self, _wrap(other))


def _wrap(x) -> ValueExpr:
    return x if isinstance(x, ValueExpr) else Lit(int(x))


@dataclass(frozen=True)
class Lit(ValueExpr):
    value: int

    def columns(self):
        return frozenset()

    def evaluate(self, table):
        dtype = np.int64 if abs(self.value) < _INT_SAFE else object
        return np.full(len(table), self.value, dtype=dtype)

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Col(ValueExpr):
    name: str

    def columns(self):
        return frozenset((self.name,))

    def evaluate(self, table):
        return _lookup(table, self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True, init=False)
class Add(ValueExpr):
    args: tuple[ValueExpr, ...]

    def __init__(self, *args: ValueExpr):
        object.__setattr__(self, "args", tuple(_wrap(a) for a in args))

    def columns(self):
        return frozenset().union(*(a.columns() for a in self.args))

    def evaluate(self, table):
        if not self.args:
            return np.zeros(len(table), dtype=np.int64)
        arrays = _promote([a.evaluate(table) for a in self.args])
        if arrays[0].dtype != object and sum(_bound(a) for a in arrays) >= _INT_SAFE:
            arrays = [a.astype(object) for a in arrays]
        return reduce(np.add, arrays)

    def __str__(self):
        return "(" + " + ".join(map(str, self.args)) + ")" if self.args else "0"


@dataclass(frozen=True, init=False)
class Mul(ValueExpr):
    args: tuple[ValueExpr, ...]

    def __init__(self, *args: ValueExpr):
        object.__setattr__(self, "args", tuple(_wrap(a) for a in args))

    def columns(self):
        return frozenset().union(*(a.columns() for a in self.args))

    def evaluate(self, table):
        if not self.args:
            return np.ones(len(table), dtype=np.int64)
        arrays = _promote([a.evaluate(table) for a in self.args])
        if arrays[0].dtype != object:
            bound = 1
            for a in arrays:
                bound *= max(_bound(a), 1)
            if bound >= _INT_SAFE:
                arrays = [a.astype(object) for a in arrays]
        return reduce(np.multiply, arrays)

    def __str__(self):
        return " * ".join(map(str, self.args)) if self.args else "1"


@dataclass(frozen=True, init=False)
class BoolOr(ValueExpr):
    """Logical OR of 0/1-valued expressions."""

    args: tuple[ValueExpr, ...]

    def __init__(self, *args: ValueExpr):
        object.__setattr__(self, "args", tuple(args))

    def columns(self):
        return frozenset().union(*(a.columns() for a in self.args))

    def evaluate(self, table):
        if not self.args:
            return np.zeros(len(table), dtype=np.int8)
        return reduce(np.logical_or, (a.evaluate(table) != 0 for a in self.args)).astype(np.int8)

    def __str__(self):
        return "(" + " OR ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, init=False)
class BoolAnd(ValueExpr):
    args: tuple[ValueExpr, ...]

    def __init__(self, *args: ValueExpr):
        object.__setattr__(self, "args", tuple(args))

    def columns(self):
        return frozenset().union(*(a.columns() for a in self.args))

    def evaluate(self, table):
        if not self.args:
            return np.ones(len(table), dtype=np.int8)
        return reduce(np.logical_and, (a.evaluate(table) != 0 for a in self.args)).astype(np.int8)

    def __str__(self):
        return "(" + " AND ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class BoolNot(ValueExpr):
    arg: ValueExpr

    def columns(self):
        return self.arg.columns()

    def evaluate(self, table):
        return (self.arg.evaluate(table) == 0).astype(np.int8)

    def __str__(self):
        return f"NOT {self.arg}"


@dataclass(frozen=True)
class Indicator(ValueExpr):
    """1 where the embedded formula holds, else 0."""

    formula: Formula

    def columns(self):
        return self.formula.columns()

    def evaluate(self, table):
        return self.formula.mask(table).astype(np.int8)

    def __str__(self):
        return f"[{self.formula}]"


# -- aggregates --------------------------------------------------------------


@dataclass(frozen=True)
class Aggregate:
    kind: str
    arg: ValueExpr

    def __post_init__(self):
        if self.kind not in ("SUM", "MIN", "MAX"):
            raise ValueError(f"unsupported aggregate {self.kind}")

    def __str__(self):
        return f"{self.kind}({self.arg})"


def SUM(arg) -> Aggregate:
    return Aggregate("SUM", _col_or_expr(arg))


def MIN(arg) -> Aggregate:
    return Aggregate("MIN", _col_or_expr(arg))


def MAX(arg) -> Aggregate:
    return Aggregate("MAX", _col_or_expr(arg))


def _col_or_expr(arg) -> ValueExpr:
    return Col(arg) if isinstance(arg, str) else _wrap(arg)
