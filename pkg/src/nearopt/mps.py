"""Fixed-format MPS export for SparseLP problems.

Intended for debugging against external solvers.  Row and column names are
positional (R0000001, C0000001, ...) because MPS names are capped at eight
characters; the original column labels are emitted as comment lines.  Values
are written with 10 significant digits when they fit the 12-character value
field, falling back to exponent form, which bounds the round-trip error.
Output is deterministic for a given problem.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .lp import EQ, GE, LE, SparseLP

__all__ = ["to_mps", "write_mps"]

_SENSE_CHAR = {LE: "L", EQ: "E", GE: "G"}


def _num(v: float) -> str:
    s = f"{v:.10g}"
    if len(s) > 12:
        s = f"{v:.5e}"
    return s


def _row_name(i: int) -> str:
    return f"R{i + 1:07d}"


def _col_name(j: int) -> str:
    return f"C{j + 1:07d}"


def to_mps(lp: SparseLP, name: str = "NEAROPT") -> str:
    lines = [f"NAME          {name}"]
    for j, label in enumerate(lp.column_labels):
        lines.append(f"* {_col_name(j)} = {label}")

    lines.append("ROWS")
    lines.append(" N  OBJ")
    for i in range(lp.n_rows):
        lines.append(f" {_SENSE_CHAR[int(lp.senses[i])]}  {_row_name(i)}")

    # Column-major entries: objective first, then constraint rows in order.
    by_col: dict[int, list[tuple[str, float]]] = {}
    for j in np.nonzero(lp.objective)[0]:
        by_col.setdefault(int(j), []).append(("OBJ", float(lp.objective[j])))
    order = np.lexsort((lp.rows, lp.cols))
    for k in order:
        j = int(lp.cols[k])
        by_col.setdefault(j, []).append(
            (_row_name(int(lp.rows[k])), float(lp.vals[k]))
        )

    lines.append("COLUMNS")
    for j in sorted(by_col):
        cname = _col_name(j)
        for rname, val in by_col[j]:
            lines.append(f"    {cname:<10}{rname:<10}{_num(val)}")

    lines.append("RHS")
    for i in range(lp.n_rows):
        if lp.rhs[i] != 0.0:
            lines.append(f"    RHS       {_row_name(i):<10}{_num(float(lp.rhs[i]))}")

    lines.append("BOUNDS")
    for j in range(lp.n_vars):
        lo, hi = float(lp.lower[j]), float(lp.upper[j])
        cname = _col_name(j)
        if lo == 0.0 and np.isposinf(hi):
            continue
        if lo == hi:
            lines.append(f" FX BND       {cname:<10}{_num(lo)}")
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            lines.append(f" FR BND       {cname}")
            continue
        if np.isneginf(lo):
            lines.append(f" MI BND       {cname}")
        elif lo != 0.0:
            lines.append(f" LO BND       {cname:<10}{_num(lo)}")
        if not np.isposinf(hi):
            lines.append(f" UP BND       {cname:<10}{_num(hi)}")

    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def write_mps(lp: SparseLP, path: str | Path, name: str = "NEAROPT") -> None:
    Path(path).write_text(to_mps(lp, name))
