"""Sparse MILP container shared by the model builder, solvers and writers.

Columns are declared one at a time and referred to by structured names
(e.g. "P[g2,3,1]"); rows hold sparse coefficient maps over column indices.
The container is deliberately dumb: validation, dense extraction and
bound overrides are the only behaviors, everything else lives in the
solver and writer modules.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

INFINITY = float("inf")


class Sense(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class VarKind(enum.Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lower: float
    upper: float


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: dict  # column index -> coefficient
    sense: Sense
    rhs: float


class ProblemError(ValueError):
    pass


@dataclass
class MilpProblem:
    """Minimization problem over named columns and sparse rows."""

    variables: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)  # column index -> cost
    index_map: dict = field(default_factory=dict)  # name -> column index

    # -- construction -----------------------------------------------------

    def add_variable(self, name: str, kind: VarKind, lower: float, upper: float) -> int:
        if name in self.index_map:
            raise ProblemError(f"duplicate variable name {name!r}")
        if not (lower <= upper):
            raise ProblemError(f"variable {name!r} has empty bound interval [{lower}, {upper}]")
        if kind is VarKind.BINARY and (lower < 0.0 or upper > 1.0):
            raise ProblemError(f"binary variable {name!r} must stay within [0, 1]")
        idx = len(self.variables)
        self.variables.append(Variable(name, kind, float(lower), float(upper)))
        self.index_map[name] = idx
        return idx

    def add_continuous(self, name: str, lower: float, upper: float) -> int:
        return self.add_variable(name, VarKind.CONTINUOUS, lower, upper)

    def add_binary(self, name: str) -> int:
        return self.add_variable(name, VarKind.BINARY, 0.0, 1.0)

    def add_constraint(self, name: str, coeffs: dict, sense: Sense, rhs: float) -> int:
        cleaned = {}
        for col, coef in coeffs.items():
            col = int(col)
            if col < 0 or col >= len(self.variables):
                raise ProblemError(f"constraint {name!r} references unknown column {col}")
            coef = float(coef)
            if coef != 0.0:
                cleaned[col] = coef
        if not np.isfinite(rhs):
            raise ProblemError(f"constraint {name!r} has non-finite right-hand side")
        self.constraints.append(Constraint(name, cleaned, sense, float(rhs)))
        return len(self.constraints) - 1

    def add_objective_term(self, col: int, coef: float) -> None:
        col = int(col)
        if col < 0 or col >= len(self.variables):
            raise ProblemError(f"objective references unknown column {col}")
        self.objective[col] = self.objective.get(col, 0.0) + float(coef)

    # -- queries -----------------------------------------------------------

    def column(self, name: str) -> int:
        try:
            return self.index_map[name]
        except KeyError:
            raise ProblemError(f"unknown variable name {name!r}") from None

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def binary_columns(self) -> list:
        return [i for i, v in enumerate(self.variables) if v.kind is VarKind.BINARY]

    def validate(self) -> None:
        seen = set()
        for row in self.constraints:
            if row.name in seen:
                raise ProblemError(f"duplicate constraint name {row.name!r}")
            seen.add(row.name)
        for v in self.variables:
            if np.isnan(v.lower) or np.isnan(v.upper):
                raise ProblemError(f"variable {v.name!r} has NaN bounds")

    # -- dense extraction for the solver ------------------------------------

    def dense_data(self, bound_overrides: dict | None = None):
        """(A, senses, b, c, lower, upper) with optional per-column bound
        overrides (used by branch and bound and by enumeration oracles)."""
        n = self.n_variables
        m = self.n_constraints
        A = np.zeros((m, n))
        b = np.zeros(m)
        senses = []
        for i, row in enumerate(self.constraints):
            for col, coef in row.coeffs.items():
                A[i, col] = coef
            b[i] = row.rhs
            senses.append(row.sense)
        c = np.zeros(n)
        for col, coef in self.objective.items():
            c[col] = coef
        lower = np.array([v.lower for v in self.variables])
        upper = np.array([v.upper for v in self.variables])
        if bound_overrides:
            for col, (lo, hi) in bound_overrides.items():
                lower[col] = lo
                upper[col] = hi
        return A, senses, b, c, lower, upper

    def objective_value(self, values: np.ndarray) -> float:
        return float(sum(coef * values[col] for col, coef in self.objective.items()))
