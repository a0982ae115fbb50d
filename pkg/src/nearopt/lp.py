"""Sparse LP container and solver front end.

Problems are stored in triplet form with per-row senses and per-variable
bounds, independent of any solver's matrix layout.  Solving delegates to
HiGHS dual simplex via scipy, which returns basic (vertex) solutions and is
deterministic for fixed input bytes; everything downstream (cost caps,
objective swaps, fixed bounds) builds new immutable problems rather than
mutating in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import ParameterError, SolverFailure

__all__ = [
    "LE",
    "EQ",
    "GE",
    "SparseLP",
    "LPSolution",
    "solve",
    "add_cost_cap",
    "with_objective",
    "with_fixed_variables",
]

# Row sense codes stored in SparseLP.senses.
LE = -1  # row · x <= rhs
EQ = 0  # row · x == rhs
GE = 1  # row · x >= rhs

_SENSE_ALIASES = {
    "<=": LE, "<": LE, LE: LE,
    "=": EQ, "==": EQ, EQ: EQ,
    ">=": GE, ">": GE, GE: GE,
}


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SparseLP:
    """min c·x  s.t.  A x (<=|==|>=) b,  lower <= x <= upper.

    A is given as (rows, cols, vals) triplets.  Construction canonicalizes:
    triplets are sorted by (row, col), duplicates summed, exact zeros dropped.
    column_labels names every variable; mga maps a short tag to the column
    index of each variable exposed to near-optimal exploration.
    """

    objective: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    senses: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    column_labels: tuple[str, ...]
    mga: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        obj = np.ascontiguousarray(self.objective, dtype=np.float64)
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        cols = np.ascontiguousarray(self.cols, dtype=np.int64)
        vals = np.ascontiguousarray(self.vals, dtype=np.float64)
        rhs = np.ascontiguousarray(self.rhs, dtype=np.float64)
        lower = np.ascontiguousarray(self.lower, dtype=np.float64)
        upper = np.ascontiguousarray(self.upper, dtype=np.float64)
        senses = np.ascontiguousarray(
            [_SENSE_ALIASES[s] for s in np.asarray(self.senses).tolist()],
            dtype=np.int8,
        )

        n, m = obj.size, rhs.size
        if not (rows.size == cols.size == vals.size):
            raise ParameterError("rows, cols, vals must have equal length")
        if senses.size != m:
            raise ParameterError("senses and rhs must have equal length")
        if lower.size != n or upper.size != n:
            raise ParameterError("bounds must match objective length")
        if len(self.column_labels) != n:
            raise ParameterError("column_labels must match objective length")
        if rows.size and (rows.min() < 0 or rows.max() >= m):
            raise ParameterError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= n):
            raise ParameterError("column index out of range")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("matrix values must be finite")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise ParameterError(
                f"lower > upper for column {bad} ({self.column_labels[bad]})"
            )
        for tag, col in self.mga.items():
            if not (0 <= col < n):
                raise ParameterError(f"mga tag {tag!r} points at bad column {col}")

        # Canonical triplet order, duplicates summed, zeros dropped.
        if rows.size:
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
            key_change = np.empty(rows.size, dtype=bool)
            key_change[0] = True
            key_change[1:] = (np.diff(rows) != 0) | (np.diff(cols) != 0)
            group = np.cumsum(key_change) - 1
            summed = np.zeros(group[-1] + 1, dtype=np.float64)
            np.add.at(summed, group, vals)
            rows, cols = rows[key_change], cols[key_change]
            keep = summed != 0.0
            rows, cols, vals = rows[keep], cols[keep], summed[keep]

        object.__setattr__(self, "objective", _freeze(obj))
        object.__setattr__(self, "rows", _freeze(rows))
        object.__setattr__(self, "cols", _freeze(cols))
        object.__setattr__(self, "vals", _freeze(vals))
        object.__setattr__(self, "senses", _freeze(senses))
        object.__setattr__(self, "rhs", _freeze(rhs))
        object.__setattr__(self, "lower", _freeze(lower))
        object.__setattr__(self, "upper", _freeze(upper))
        object.__setattr__(self, "column_labels", tuple(self.column_labels))
        object.__setattr__(self, "mga", dict(self.mga))

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    def matrix(self) -> sp.csr_matrix:
        """Constraint matrix as CSR."""
        return sp.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.n_rows, self.n_vars)
        )


@dataclass(frozen=True)
class LPSolution:
    """Result of one solve.

    status is "optimal", "infeasible", or "unbounded"; x and objective_value
    are None unless optimal.  column_labels is carried over from the problem
    so metrics can be read off the solution alone.
    """

    status: str
    x: np.ndarray | None
    objective_value: float | None
    iterations: int
    column_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.x is not None:
            object.__setattr__(
                self, "x", _freeze(np.ascontiguousarray(self.x, dtype=np.float64))
            )

    def canonical_bytes(self) -> bytes:
        """Stable byte encoding used by determinism checks."""
        parts = [self.status.encode(), str(self.iterations).encode()]
        if self.x is not None:
            parts.append(self.x.astype("<f8").tobytes())
            parts.append(np.float64(self.objective_value).astype("<f8").tobytes())
        return b"|".join(parts)

    def value(self, label_to_index: dict[str, int], label: str) -> float:
        if self.x is None:
            raise ParameterError(f"solution has status {self.status}, no values")
        return float(self.x[label_to_index[label]])


def solve(
    lp: SparseLP, feas_tol: float = 1e-7, opt_tol: float = 1e-9
) -> LPSolution:
    """Minimize lp.objective subject to lp's constraints and bounds.

    Uses dual simplex so optimal solutions are vertices of the feasible
    polytope.  Raises SolverFailure (with the iteration count) if the solver
    stalls or reports numerical trouble; infeasible and unbounded are normal
    statuses, not exceptions.
    """
    A = lp.matrix().tocsc()
    is_eq = lp.senses == EQ
    is_le = lp.senses == LE
    is_ge = lp.senses == GE

    A_ub = None
    b_ub = None
    if is_le.any() or is_ge.any():
        sign = np.where(is_ge, -1.0, 1.0)[~is_eq]
        A_ub = sp.diags(sign) @ A[~is_eq]
        b_ub = sign * lp.rhs[~is_eq]
    A_eq = A[is_eq] if is_eq.any() else None
    b_eq = lp.rhs[is_eq] if is_eq.any() else None

    def run(presolve: bool):
        return linprog(
            c=lp.objective,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=np.column_stack([lp.lower, lp.upper]),
            method="highs-ds",
            options={
                "presolve": presolve,
                "primal_feasibility_tolerance": feas_tol,
                "dual_feasibility_tolerance": opt_tol,
            },
        )

    res = run(presolve=True)
    if res.status not in (0, 2, 3):
        # HiGHS postsolve can fail to restore a point solved at tight dual
        # tolerance and reports the model status as unknown; the unreduced
        # problem skips postsolve entirely, so retry once without presolve.
        res = run(presolve=False)
    nit = int(getattr(res, "nit", 0) or 0)
    if res.status == 0:
        return LPSolution(
            status="optimal",
            x=np.asarray(res.x, dtype=np.float64),
            objective_value=float(res.fun),
            iterations=nit,
            column_labels=lp.column_labels,
        )
    if res.status == 2:
        return LPSolution("infeasible", None, None, nit, lp.column_labels)
    if res.status == 3:
        return LPSolution("unbounded", None, None, nit, lp.column_labels)
    raise SolverFailure(
        f"solver failed after {nit} iterations: {res.message}", iterations=nit
    )


def add_cost_cap(lp: SparseLP, cap: float) -> SparseLP:
    """Append the row  c·x <= cap  built from lp's current objective.

    The original problem is unchanged; exploration objectives can then be
    swapped in with with_objective while total cost stays capped.
    """
    if not np.isfinite(cap):
        raise ParameterError(f"cap must be finite, got {cap}")
    nz = np.nonzero(lp.objective)[0]
    if nz.size == 0:
        raise ParameterError("cannot cap an all-zero objective")
    row_idx = np.full(nz.size, lp.n_rows, dtype=np.int64)
    return replace(
        lp,
        rows=np.concatenate([lp.rows, row_idx]),
        cols=np.concatenate([lp.cols, nz]),
        vals=np.concatenate([lp.vals, lp.objective[nz]]),
        senses=np.concatenate([lp.senses, np.array([LE], dtype=np.int8)]),
        rhs=np.concatenate([lp.rhs, [cap]]),
    )


def with_objective(lp: SparseLP, weights: dict[str, float]) -> SparseLP:
    """Replace the objective with sum(weights[tag] * x[tag]) over MGA tags.

    Every key must be a tag in lp.mga; unknown tags raise ParameterError
    naming the known ones.  Constraints (including any cost cap) are kept.
    """
    unknown = set(weights) - set(lp.mga)
    if unknown:
        raise ParameterError(
            f"unknown MGA tags {sorted(unknown)}; known: {sorted(lp.mga)}"
        )
    c = np.zeros(lp.n_vars, dtype=np.float64)
    for tag, w in weights.items():
        if not np.isfinite(w):
            raise ParameterError(f"weight for {tag!r} must be finite")
        c[lp.mga[tag]] = w
    return replace(lp, objective=c)


def with_fixed_variables(lp: SparseLP, values: dict[str, float]) -> SparseLP:
    """Pin MGA-tagged variables to exact values via equal bounds."""
    unknown = set(values) - set(lp.mga)
    if unknown:
        raise ParameterError(
            f"unknown MGA tags {sorted(unknown)}; known: {sorted(lp.mga)}"
        )
    lower = lp.lower.copy()
    upper = lp.upper.copy()
    for tag, v in values.items():
        if not np.isfinite(v):
            raise ParameterError(f"value for {tag!r} must be finite")
        col = lp.mga[tag]
        lower[col] = v
        upper[col] = v
    return replace(lp, lower=lower, upper=upper)
