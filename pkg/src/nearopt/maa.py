"""Mapping the near-optimal design space by iterated convex hulls.

The region mapped is {x feasible : c.x <= (1+eps) f*} projected onto a small
set of tagged capacity variables.  Each iteration probes the LP along
directions normal to the current hull's facets, so the hull only ever gains
points; its volume is therefore non-decreasing and the loop stops once the
relative gain drops below a threshold.

Collapsed dimensions are handled twice over.  Axes the region does not span
at all (a capacity pinned to one value by the cost cap) are detected after
the initial axis probes, dropped, and reported with their pinned value.  If
the remaining cloud is still affinely rank-deficient, the hull is built
inside the affine span and the flat directions are reported; later probes
can grow the rank back, in which case the mapping returns to full
coordinates.  Volume-trace entries are measures in the dimension the hull
had at that iteration, so monotonicity is only meaningful between entries
of equal rank.

Direction solves within one iteration are independent; they run on a thread
pool when NEAROPT_THREADS allows and are merged in direction order, so the
result never depends on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHullError, ParameterError, StateError
from .hull import (
    Facet,
    Hull,
    affine_subspace,
    convex_hull,
    hull_to_jsonable,
    hull_volume,
)
from .lp import LPSolution, SparseLP, add_cost_cap, solve, with_objective
from .util import worker_count

__all__ = [
    "MAAConfig",
    "MAAResult",
    "find_optimum",
    "initial_directions",
    "direction_solve",
    "run_maa",
    "result_to_jsonable",
    "convex_hull",
    "hull_volume",
]

# Two probe directions closer than this chord distance count as the same
# direction and the second is skipped (for unit vectors the chord equals the
# angle at this scale).
_DIRECTION_TOL = 1e-6

# Axis extent below this (relative to the axis magnitude) marks the axis as
# pinned; keep it above the solver's primal feasibility tolerance.
_PINNED_REL_TOL = 1e-6


@dataclass(frozen=True)
class MAAConfig:
    """Knobs for one near-optimal mapping run.

    epsilon is the relative cost slack; mga_variables names the tagged
    capacity axes spanning the mapped space, in axis order.
    """

    epsilon: float
    mga_variables: tuple[str, ...]
    volume_rel_tol: float = 1e-2
    max_iterations: int = 20
    max_directions_per_iter: int = 64
    geom_tol: float = 1e-9

    def __post_init__(self) -> None:
        object.__setattr__(self, "mga_variables", tuple(self.mga_variables))
        if not np.isfinite(self.epsilon) or self.epsilon <= 0.0:
            raise ParameterError(
                f"slack epsilon must be > 0, got {self.epsilon!r}; with zero "
                "slack the near-optimal region collapses to the optimal face "
                "and has no volume to map"
            )
        d = len(self.mga_variables)
        if not 2 <= d <= 8:
            raise ParameterError(f"need between 2 and 8 mapped variables, got {d}")
        if len(set(self.mga_variables)) != d:
            raise ParameterError(
                f"mapped variables contain duplicates: {self.mga_variables}"
            )
        if not np.isfinite(self.volume_rel_tol) or self.volume_rel_tol <= 0.0:
            raise ParameterError(
                f"volume_rel_tol must be > 0, got {self.volume_rel_tol!r}"
            )
        if self.max_iterations < 1:
            raise ParameterError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        if self.max_directions_per_iter < 1:
            raise ParameterError(
                f"max_directions_per_iter must be >= 1, got {self.max_directions_per_iter}"
            )
        if not np.isfinite(self.geom_tol) or self.geom_tol <= 0.0:
            raise ParameterError(f"geom_tol must be > 0, got {self.geom_tol!r}")


@dataclass(frozen=True)
class MAAResult:
    """Hull, probe points, and volume trace of one mapping run.

    vertices holds every probe point accumulated over the run in solve
    order, in physical units over `variables` (the hull's own vertex list
    is a subset).  When affine_origin/affine_basis are set the hull lives
    in subspace coordinates y with x = origin + y @ basis.T; otherwise it
    is directly over `variables`.
    """

    hull: Hull
    vertices: np.ndarray
    volume_trace: tuple[float, ...]
    variables: tuple[str, ...]
    pinned: dict[str, float] = field(default_factory=dict)
    affine_origin: tuple[float, ...] | None = None
    affine_basis: tuple[tuple[float, ...], ...] | None = None
    flat_directions: tuple[tuple[float, ...], ...] = ()
    epsilon: float = 0.0
    optimum: tuple[float, ...] = ()
    f_star: float = 0.0
    n_lp_solves: int = 0
    n_iterations: int = 0
    converged: bool = False


def find_optimum(lp: SparseLP) -> tuple[np.ndarray, float]:
    """Solve the unmodified LP and return (x*, f*)."""
    sol = solve(lp)
    _require_optimal(sol, "baseline optimization")
    return sol.x, sol.objective_value


def initial_directions(d: int) -> np.ndarray:
    """The 2d axis probes +e1, -e1, ..., +ed, -ed, in that order."""
    if d < 2:
        raise ParameterError(f"need at least 2 dimensions, got {d}")
    dirs = np.zeros((2 * d, d), dtype=np.float64)
    for i in range(d):
        dirs[2 * i, i] = 1.0
        dirs[2 * i + 1, i] = -1.0
    return dirs


def direction_solve(
    capped_lp: SparseLP,
    w: np.ndarray,
    variables: tuple[str, ...] | None = None,
) -> np.ndarray:
    """Minimize w over the tagged variables inside the cost cap.

    Returns the tagged coordinates of the optimal point, in the order of
    `variables` (defaults to the LP's own tag order).
    """
    if variables is None:
        variables = tuple(capped_lp.mga)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (len(variables),):
        raise ParameterError(
            f"weight vector has shape {w.shape}, expected ({len(variables)},)"
        )
    sol = solve(with_objective(capped_lp, dict(zip(variables, w.tolist()))))
    if sol.status != "optimal":
        raise StateError(
            f"direction solve came back {sol.status}; the cost cap should "
            "keep every probe feasible and bounded"
        )
    cols = [capped_lp.mga[tag] for tag in variables]
    return sol.x[cols]


def run_maa(lp: SparseLP, config: MAAConfig) -> MAAResult:
    """Map the near-optimal region of lp over config.mga_variables."""
    unknown = set(config.mga_variables) - set(lp.mga)
    if unknown:
        raise ParameterError(
            f"unknown MGA tags {sorted(unknown)}; known: {sorted(lp.mga)}"
        )
    tags = config.mga_variables
    d_full = len(tags)
    cols = [lp.mga[tag] for tag in tags]

    x_star, f_star = find_optimum(lp)
    n_solves = 1
    capped = add_cost_cap(lp, (1.0 + config.epsilon) * f_star)
    opt_coords = x_star[cols].copy()

    # Axis probes: min and max of every mapped variable inside the cap.
    points: list[np.ndarray] = [opt_coords]
    points.extend(_probe(capped, initial_directions(d_full), tags))
    n_solves += 2 * d_full

    pts = np.asarray(points, dtype=np.float64)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    spans = hi - lo > _PINNED_REL_TOL * np.maximum(1.0, np.abs(hi))
    keep = [i for i in range(d_full) if spans[i]]
    pinned = {
        tags[i]: float(0.5 * (lo[i] + hi[i])) for i in range(d_full) if not spans[i]
    }
    if len(keep) < 2:
        raise DegenerateHullError(
            "near-optimal region spans fewer than 2 of the mapped axes; "
            f"pinned: {sorted(pinned)}",
            rank=len(keep),
        )
    kept_tags = tuple(tags[i] for i in keep)
    d = len(keep)

    hull, origin, basis = _hull_in_span(pts[:, keep], config.geom_tol)
    trace = [hull_volume(hull)]

    # Directions already probed, as unit vectors in the kept coordinates.
    used: list[np.ndarray] = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        used.extend([e, -e])

    converged = False
    iterations = 0
    for _ in range(config.max_iterations):
        fresh = _facet_directions(
            hull, basis, used, config.max_directions_per_iter
        )
        if not fresh:
            converged = True
            break
        iterations += 1
        weights = np.zeros((len(fresh), d_full))
        for row, n_kept in enumerate(fresh):
            # Minimizing -n.x pushes the probe out past the facet.
            weights[row, keep] = -n_kept
            used.append(n_kept)
        points.extend(_probe(capped, weights, tags))
        n_solves += len(fresh)

        prev_dim, prev_vol = hull.dim, trace[-1]
        pts = np.asarray(points, dtype=np.float64)
        hull, origin, basis = _hull_in_span(pts[:, keep], config.geom_tol)
        trace.append(hull_volume(hull))
        if hull.dim == prev_dim:
            gain = trace[-1] - prev_vol
            if gain < config.volume_rel_tol * max(trace[-1], 1e-300):
                converged = True
                break

    flat: tuple[tuple[float, ...], ...] = ()
    if basis is not None:
        flat = _flat_directions(pts[:, keep], basis)

    return MAAResult(
        hull=hull,
        vertices=np.asarray(points, dtype=np.float64)[:, keep],
        volume_trace=tuple(trace),
        variables=kept_tags,
        pinned=pinned,
        affine_origin=None if origin is None else tuple(float(v) for v in origin),
        affine_basis=None
        if basis is None
        else tuple(tuple(float(v) for v in col) for col in basis.T),
        flat_directions=flat,
        epsilon=config.epsilon,
        optimum=tuple(float(v) for v in opt_coords),
        f_star=float(f_star),
        n_lp_solves=n_solves,
        n_iterations=iterations,
        converged=converged,
    )


def result_to_jsonable(result: MAAResult, config: MAAConfig | None = None) -> dict:
    """JSON-ready view of a mapping run, stable across repeat runs."""
    hull = result.hull
    out: dict = {
        "schema": "nearopt-hull/1",
        "variables": list(result.variables),
        "epsilon": result.epsilon,
        "f_star": result.f_star,
        "optimum": list(result.optimum),
        "pinned": {k: v for k, v in sorted(result.pinned.items())},
        "space": "variables" if result.affine_basis is None else "affine",
        "hull": hull_to_jsonable(hull),
        "points": [list(map(float, p)) for p in result.vertices],
        "volume_trace": list(result.volume_trace),
        "n_lp_solves": result.n_lp_solves,
        "n_iterations": result.n_iterations,
        "converged": result.converged,
    }
    if result.affine_basis is not None:
        out["affine"] = {
            "origin": list(result.affine_origin),
            "basis": [list(col) for col in result.affine_basis],
            "flat_directions": [list(v) for v in result.flat_directions],
        }
    if config is not None:
        out["config"] = {
            "epsilon": config.epsilon,
            "mga_variables": list(config.mga_variables),
            "volume_rel_tol": config.volume_rel_tol,
            "max_iterations": config.max_iterations,
            "max_directions_per_iter": config.max_directions_per_iter,
            "geom_tol": config.geom_tol,
        }
    return out


def _probe(
    capped: SparseLP, weights: np.ndarray, tags: tuple[str, ...]
) -> list[np.ndarray]:
    """direction_solve for each weight row, merged in row order."""
    rows = [np.asarray(w, dtype=np.float64) for w in weights]
    workers = min(worker_count(), len(rows))
    if workers <= 1:
        return [direction_solve(capped, w, tags) for w in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda w: direction_solve(capped, w, tags), rows))


def _hull_in_span(
    pts: np.ndarray, geom_tol: float
) -> tuple[Hull, np.ndarray | None, np.ndarray | None]:
    """Hull of pts, dropping into the affine span when the cloud is flat.

    Returns (hull, origin, basis); origin/basis are None at full rank,
    otherwise the hull is over y = (x - origin) @ basis.
    """
    try:
        return convex_hull(pts, geom_tol), None, None
    except DegenerateHullError as err:
        if err.rank < 2:
            raise
        origin, basis, _ = affine_subspace(pts, geom_tol)
        y = (pts - origin) @ basis
        return convex_hull(y, geom_tol), origin, basis


def _facet_directions(
    hull: Hull,
    basis: np.ndarray | None,
    used: list[np.ndarray],
    limit: int,
) -> list[np.ndarray]:
    """Outward facet normals not probed yet, largest facet first.

    Normals are returned in kept-variable coordinates: hull-space normals
    are mapped through the affine basis when the hull lives in a subspace.
    """
    verts_norm = hull.normalize(hull.vertices)
    order = sorted(
        range(len(hull.facets)),
        key=lambda i: (
            -_facet_measure(hull.facets[i], verts_norm),
            hull.facets[i].vertex_ids,
        ),
    )
    fresh: list[np.ndarray] = []
    seen = list(used)
    for i in order:
        if len(fresh) >= limit:
            break
        n_out = np.asarray(hull.facets[i].normal, dtype=np.float64)
        if basis is not None:
            n_out = basis @ n_out
        if any(np.linalg.norm(n_out - u) < _DIRECTION_TOL for u in seen):
            continue
        fresh.append(n_out)
        seen.append(n_out)
    return fresh


def _facet_measure(facet: Facet, verts_norm: np.ndarray) -> float:
    """(d-1)-measure of a simplicial facet in normalized coordinates."""
    corners = verts_norm[list(facet.vertex_ids)]
    edges = corners[1:] - corners[0]
    gram = edges @ edges.T
    det = float(np.linalg.det(gram))
    if det <= 0.0:
        return 0.0
    k = edges.shape[0]
    return float(np.sqrt(det) / np.prod(np.arange(1, k + 1, dtype=np.float64)))


def _flat_directions(pts: np.ndarray, basis: np.ndarray) -> tuple[tuple[float, ...], ...]:
    """Orthonormal directions the cloud does not span, sign-canonicalized."""
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    comp = vt[basis.shape[1] :]
    out = []
    for row in comp:
        lead = row[np.argmax(np.abs(row))]
        if lead < 0:
            row = -row
        out.append(tuple(float(v) for v in row))
    return tuple(out)


def _require_optimal(sol: LPSolution, what: str) -> None:
    if sol.status != "optimal":
        raise StateError(f"{what} came back {sol.status}")
