"""In-memory relational algebra with set semantics."""

from .expr import (
    FALSE,
    MAX,
    MIN,
    SUM,
    TRUE,
    Add,
    Aggregate,
    And,
    BoolAnd,
    BoolNot,
    BoolOr,
    Col,
    Const,
    EqCol,
    EqConst,
    Formula,
    Indicator,
    Lit,
    Mul,
    Not,
    Or,
    ValueExpr,
    conjoin,
    conjuncts,
    is_,
    not_,
)
from .ops import (
    cross_join,
    extended_project,
    group_aggregate,
    project,
    rename,
    select,
    theta_join,
)
from .table import (
    BOOLEAN,
    COUNTER,
    MEASURE,
    CapacityError,
    Column,
    Domain,
    DomainError,
    RelAlgError,
    SchemaError,
    Table,
    bounded,
)

__all__ = [
    "Add", "Aggregate", "And", "BOOLEAN", "BoolAnd", "BoolNot", "BoolOr", "COUNTER",
    "CapacityError", "Col", "Column", "Const", "Domain", "DomainError", "EqCol",
    "EqConst", "FALSE", "Formula", "Indicator", "Lit", "MAX", "MEASURE", "MIN", "Mul",
    "Not", "Or", "RelAlgError", "SUM", "SchemaError", "TRUE", "Table", "ValueExpr",
    "bounded", "conjoin", "conjuncts", "cross_join", "extended_project",
    "group_aggregate", "is_", "not_", "project", "rename", "select", "theta_join",
]
