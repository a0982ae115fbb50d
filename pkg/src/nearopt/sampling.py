"""Uniform sampling of a convex hull's interior.

The hull is cut into simplices by fanning from the vertex centroid (one
simplex per facet), a simplex is picked with probability proportional to its
volume, and the point is a convex combination of the simplex corners with
flat-Dirichlet weights.  Flat Dirichlet over the corners is the Bayesian
bootstrap weight law and gives exactly uniform density inside each simplex,
so the two stages together are uniform over the hull.

Draws are organized in fixed-size blocks, each with its own seed derived
from (seed, block index).  The blocks make the stream splittable across
workers while keeping the output bytes a function of (hull, n, seed) alone.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParameterError
from .hull import Hull, hull_to_jsonable
from .lp import SparseLP, solve, with_fixed_variables
from .util import canonical_json, sha256_bytes, worker_count

__all__ = [
    "SampleSet",
    "VerificationReport",
    "hull_digest",
    "triangulate",
    "simplex_volumes",
    "sample",
    "write_samples",
    "read_samples",
    "verify_near_optimal",
]

# Samples per RNG block; fixed so the byte stream never depends on worker
# count or batching.
_BLOCK = 65536

_SCHEMA = "nearopt-samples/1"


@dataclass(frozen=True)
class SampleSet:
    """A matrix of near-optimal design points plus provenance.

    matrix rows are points over `variables` in physical capacity units.
    carrier_tag, when present, holds per-row integer codes into
    carrier_levels (used for pooled cross-pathway sets); cost holds the
    re-optimized minimum total cost per row when it has been evaluated.
    """

    matrix: np.ndarray
    variables: tuple[str, ...]
    seed: int
    hull_id: str
    units: tuple[str, ...] = ()
    carrier_tag: np.ndarray | None = None
    carrier_levels: tuple[str, ...] = ()
    cost: np.ndarray | None = None
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ParameterError(f"matrix must be 2-D and non-empty, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ParameterError("matrix values must be finite")
        if len(self.variables) != m.shape[1]:
            raise ParameterError(
                f"{len(self.variables)} variable names for {m.shape[1]} columns"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "units", tuple(self.units))
        if self.units and len(self.units) != len(self.variables):
            raise ParameterError("units must match variables")
        if self.carrier_tag is not None:
            tags = np.ascontiguousarray(self.carrier_tag, dtype=np.int16)
            if tags.shape != (m.shape[0],):
                raise ParameterError("carrier_tag must have one code per row")
            if not self.carrier_levels:
                raise ParameterError("carrier_tag needs carrier_levels")
            if tags.size and (tags.min() < 0 or tags.max() >= len(self.carrier_levels)):
                raise ParameterError("carrier_tag code outside carrier_levels")
            object.__setattr__(self, "carrier_tag", tags)
        object.__setattr__(self, "carrier_levels", tuple(self.carrier_levels))
        if self.cost is not None:
            cost = np.ascontiguousarray(self.cost, dtype=np.float64)
            if cost.shape != (m.shape[0],):
                raise ParameterError("cost must have one value per row")
            object.__setattr__(self, "cost", cost)

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])


def hull_digest(hull: Hull) -> str:
    """Content hash of a hull, used to tie sample files to their hull."""
    return sha256_bytes(canonical_json(hull_to_jsonable(hull)).encode("utf-8"))


def triangulate(hull: Hull) -> np.ndarray:
    """Cut the hull into simplices fanned from the vertex centroid.

    Returns an (m, d+1, d) array in physical units; corner 0 of every
    simplex is the centroid, the rest are the facet's vertices in stored
    order.  The simplices partition the hull, so their volumes sum to the
    hull volume.
    """
    verts = np.asarray(hull.vertices, dtype=np.float64)
    if hull.dim == 1:
        centroid = verts.mean(axis=0)
        out = np.empty((2, 2, 1), dtype=np.float64)
        out[0, 0], out[0, 1] = centroid, verts[0]
        out[1, 0], out[1, 1] = centroid, verts[1]
        return out
    centroid = verts.mean(axis=0)
    m = len(hull.facets)
    out = np.empty((m, hull.dim + 1, hull.dim), dtype=np.float64)
    for i, facet in enumerate(hull.facets):
        out[i, 0] = centroid
        out[i, 1:] = verts[list(facet.vertex_ids)]
    return out


def simplex_volumes(simplices: np.ndarray) -> np.ndarray:
    """|det| / d! volume of each (d+1)-corner simplex."""
    s = np.asarray(simplices, dtype=np.float64)
    if s.ndim != 3 or s.shape[1] != s.shape[2] + 1:
        raise ParameterError(f"expected (m, d+1, d) simplices, got {s.shape}")
    d = s.shape[2]
    edges = s[:, 1:, :] - s[:, :1, :]
    if d == 1:
        dets = edges[:, 0, 0]
    else:
        dets = np.linalg.det(edges)
    factorial = float(np.prod(np.arange(1, d + 1, dtype=np.float64)))
    return np.abs(dets) / factorial


def sample(
    hull: Hull,
    n: int,
    seed: int,
    variables: tuple[str, ...] | None = None,
    units: tuple[str, ...] = (),
) -> SampleSet:
    """Draw n points uniformly from the hull, reproducibly from seed."""
    if n < 1:
        raise ParameterError(f"need n >= 1 samples, got {n}")
    if not 0 <= int(seed) < 2**64:
        raise ParameterError(f"seed must fit in 64 bits, got {seed!r}")
    if variables is None:
        variables = tuple(f"x{i}" for i in range(hull.dim))
    if len(variables) != hull.dim:
        raise ParameterError(
            f"{len(variables)} variable names for a {hull.dim}-D hull"
        )

    simplices = triangulate(hull)
    vols = simplex_volumes(simplices)
    total = float(vols.sum())
    if total <= 0.0:
        raise ParameterError("hull has zero volume; nothing to sample")
    cum = np.cumsum(vols / total)
    cum[-1] = 1.0  # guard the running sum against roundoff

    blocks = [
        (j, min(_BLOCK, n - j * _BLOCK)) for j in range((n + _BLOCK - 1) // _BLOCK)
    ]

    def draw(block: tuple[int, int]) -> np.ndarray:
        j, nb = block
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(j,)))
        picks = np.searchsorted(cum, rng.random(nb), side="right")
        picks = np.minimum(picks, len(vols) - 1)
        gamma = rng.standard_exponential((nb, hull.dim + 1))
        lam = gamma / gamma.sum(axis=1, keepdims=True)
        return np.einsum("bi,bij->bj", lam, simplices[picks])

    workers = min(worker_count(), len(blocks))
    if workers <= 1 or len(blocks) == 1:
        parts = [draw(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, blocks))

    return SampleSet(
        matrix=np.vstack(parts),
        variables=variables,
        seed=int(seed),
        hull_id=hull_digest(hull),
        units=units,
    )


def write_samples(samples: SampleSet, path: str | Path) -> Path:
    """Write the matrix as little-endian float64 rows plus a JSON sidecar.

    Optional per-row fields (cost, carrier codes, extras) are stored as
    additional float64 columns after the variable columns; the sidecar's
    column list names everything in order.  Returns the binary path; the
    sidecar sits next to it with ".json" appended.
    """
    path = Path(path)
    columns = list(samples.variables)
    blocks = [samples.matrix]
    if samples.cost is not None:
        columns.append("cost")
        blocks.append(samples.cost[:, None])
    if samples.carrier_tag is not None:
        columns.append("carrier")
        blocks.append(samples.carrier_tag.astype(np.float64)[:, None])
    for name in sorted(samples.extras):
        col = np.ascontiguousarray(samples.extras[name], dtype=np.float64)
        if col.shape != (samples.n,):
            raise ParameterError(f"extra column {name!r} must have one value per row")
        columns.append(name)
        blocks.append(col[:, None])
    if len(set(columns)) != len(columns):
        raise ParameterError(f"duplicate column names: {columns}")

    wide = np.hstack(blocks).astype("<f8")
    path.write_bytes(np.ascontiguousarray(wide).tobytes(order="C"))
    sidecar = {
        "schema": _SCHEMA,
        "n": samples.n,
        "columns": columns,
        "variables": list(samples.variables),
        "units": list(samples.units),
        "dtype": "<f8",
        "order": "C",
        "seed": samples.seed,
        "hull_id": samples.hull_id,
    }
    if samples.carrier_levels:
        sidecar["carrier_levels"] = list(samples.carrier_levels)
    Path(str(path) + ".json").write_text(canonical_json(sidecar), encoding="utf-8")
    return path


def read_samples(path: str | Path) -> SampleSet:
    """Read a .samples binary written by write_samples."""
    path = Path(path)
    sidecar_path = Path(str(path) + ".json")
    if not sidecar_path.exists():
        raise ConfigurationError(f"missing sidecar {sidecar_path}")
    meta = json.loads(sidecar_path.read_text(encoding="utf-8"))
    if meta.get("schema") != _SCHEMA:
        raise ConfigurationError(
            f"unsupported samples schema {meta.get('schema')!r} in {sidecar_path}"
        )
    n, columns = int(meta["n"]), list(meta["columns"])
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    if raw.size != n * len(columns):
        raise ConfigurationError(
            f"{path} holds {raw.size} values, expected {n}x{len(columns)}"
        )
    wide = raw.reshape(n, len(columns))
    variables = tuple(meta["variables"])
    d = len(variables)
    if list(columns[:d]) != list(variables):
        raise ConfigurationError(f"{sidecar_path}: variables must lead the columns")
    cost = None
    carrier = None
    extras: dict[str, np.ndarray] = {}
    for k, name in enumerate(columns[d:], start=d):
        col = np.ascontiguousarray(wide[:, k])
        if name == "cost":
            cost = col
        elif name == "carrier":
            carrier = col.astype(np.int16)
        else:
            extras[name] = col
    return SampleSet(
        matrix=np.ascontiguousarray(wide[:, :d]),
        variables=variables,
        seed=int(meta["seed"]),
        hull_id=str(meta["hull_id"]),
        units=tuple(meta.get("units", ())),
        carrier_tag=carrier,
        carrier_levels=tuple(meta.get("carrier_levels", ())),
        cost=cost,
        extras=extras,
    )


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of re-optimizing samples with their coordinates fixed."""

    n_checked: int
    n_verified: int
    n_indeterminate: int
    violations: tuple[tuple[int, float, float], ...]  # (row, cost, rel excess)
    costs: dict[int, float]

    @property
    def n_violations(self) -> int:
        return len(self.violations)

    @property
    def all_verified(self) -> bool:
        return self.n_verified == self.n_checked

    @property
    def max_excess(self) -> float:
        return max((v[2] for v in self.violations), default=0.0)


def verify_near_optimal(
    samples: SampleSet,
    lp: SparseLP,
    f_star: float,
    epsilon: float,
    fraction: float = 1.0,
    seed: int = 0,
) -> VerificationReport:
    """Re-minimize cost with each checked sample's coordinates pinned.

    A row passes when its re-optimized cost is at most (1+epsilon) f* plus
    a 1e-6 relative numerics allowance.  fraction < 1 checks a seeded
    random subset; solver failures are recorded as indeterminate.
    """
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must be in (0, 1], got {fraction}")
    if not np.isfinite(f_star):
        raise ParameterError(f"f_star must be finite, got {f_star!r}")
    unknown = set(samples.variables) - set(lp.mga)
    if unknown:
        raise ParameterError(
            f"sample variables {sorted(unknown)} not tagged in the LP; "
            f"known: {sorted(lp.mga)}"
        )

    n = samples.n
    if fraction >= 1.0:
        rows = np.arange(n)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
        k = max(1, int(round(fraction * n)))
        rows = np.sort(rng.choice(n, size=k, replace=False))

    budget = (1.0 + epsilon) * f_star + 1e-6 * abs(f_star)

    def check(row: int) -> tuple[int, str, float]:
        values = dict(zip(samples.variables, samples.matrix[row].tolist()))
        sol = solve(with_fixed_variables(lp, values))
        if sol.status != "optimal":
            return row, "indeterminate", float("nan")
        return row, "solved", float(sol.objective_value)

    workers = min(worker_count(), len(rows))
    if workers <= 1:
        outcomes = [check(int(r)) for r in rows]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(check, [int(r) for r in rows]))

    costs: dict[int, float] = {}
    violations: list[tuple[int, float, float]] = []
    n_indeterminate = 0
    for row, status, cost in outcomes:
        if status == "indeterminate":
            n_indeterminate += 1
            continue
        costs[row] = cost
        if cost > budget:
            denom = abs(f_star) if f_star != 0.0 else 1.0
            violations.append((row, cost, (cost - budget) / denom))

    n_checked = len(rows)
    return VerificationReport(
        n_checked=n_checked,
        n_verified=n_checked - n_indeterminate - len(violations),
        n_indeterminate=n_indeterminate,
        violations=tuple(violations),
        costs=costs,
    )
