"""Convex hulls of design-space point clouds.

Points live in physical capacity units whose axes differ by orders of
magnitude, so each axis is normalized to [0, 1] before the hull is built and
facet planes are transformed back to physical units afterwards.  Degenerate
clouds (affine rank below the ambient dimension) raise DegenerateHullError
carrying the detected rank plus the affine subspace, so callers can rebuild
the hull in reduced coordinates.

Vertices and facets are put into a canonical order so repeated runs on the
same input produce byte-identical exports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull as _QhullConvexHull
from scipy.spatial import QhullError

from .errors import DegenerateHullError, ParameterError

__all__ = [
    "Facet",
    "Hull",
    "affine_subspace",
    "convex_hull",
    "hull_from_jsonable",
    "hull_to_jsonable",
    "hull_volume",
]


@dataclass(frozen=True)
class Facet:
    """One simplicial facet: the half-space normal . x <= offset.

    Normals are outward unit vectors; vertex_ids index into Hull.vertices.
    The normalized-space form is kept alongside the physical one because
    containment tests are much better conditioned in the unit box.
    """

    vertex_ids: tuple[int, ...]
    normal: tuple[float, ...]
    offset: float
    normal_norm: tuple[float, ...]
    offset_norm: float


@dataclass(frozen=True)
class Hull:
    """Convex hull in physical units with its normalization retained."""

    dim: int
    vertices: np.ndarray
    facets: tuple[Facet, ...]
    volume: float
    lo: np.ndarray
    scale: np.ndarray

    def normalize(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - self.lo) / self.scale

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Vectorized membership test, tolerance in normalized units."""
        pts = np.atleast_2d(self.normalize(points))
        ok = np.ones(len(pts), dtype=bool)
        for f in self.facets:
            ok &= pts @ np.asarray(f.normal_norm) <= f.offset_norm + tol
        return ok


def _rank_from_singular_values(s: np.ndarray, geom_tol: float) -> int:
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > geom_tol * max(1.0, float(s[0]))))


def affine_subspace(
    points: np.ndarray, geom_tol: float = 1e-9
) -> tuple[np.ndarray, np.ndarray, int]:
    """Detect the affine subspace spanned by a point cloud.

    Returns (origin, basis, rank) with basis orthonormal in physical units,
    shape (d, rank), so reduced coordinates are basis.T @ (x - origin).
    Rank is judged on axis-normalized coordinates at geom_tol.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise ParameterError("points must be a non-empty (n, d) array")
    lo = pts.min(axis=0)
    rng = pts.max(axis=0) - lo
    scale = np.where(rng > 0.0, rng, 1.0)
    norm = (pts - lo) / scale
    center = norm.mean(axis=0)
    u, s, vt = np.linalg.svd(norm - center, full_matrices=False)
    rank = _rank_from_singular_values(s, geom_tol)
    basis_norm = vt[:rank].T  # (d, rank), orthonormal in normalized space
    basis_phys = scale[:, None] * basis_norm
    if rank:
        basis_phys, _ = np.linalg.qr(basis_phys)
        # Fix sign so the largest-magnitude entry of each column is positive;
        # QR sign conventions otherwise depend on the input ordering.
        for j in range(rank):
            col = basis_phys[:, j]
            k = int(np.argmax(np.abs(col)))
            if col[k] < 0:
                basis_phys[:, j] = -col
    origin = lo + scale * center
    return origin, basis_phys, rank


def _canonical_vertex_order(coords: np.ndarray) -> np.ndarray:
    # lexsort keys are last-significant-first
    return np.lexsort(tuple(coords[:, j] for j in reversed(range(coords.shape[1]))))


def _fan_volume_normalized(
    vertices_norm: np.ndarray, facets: list[tuple[tuple[int, ...], np.ndarray, float]]
) -> float:
    d = vertices_norm.shape[1]
    centroid = vertices_norm.mean(axis=0)
    total = 0.0
    fact = math.factorial(d)
    for ids, _n, _o in facets:
        edges = vertices_norm[list(ids)] - centroid
        total += abs(float(np.linalg.det(edges))) / fact
    return total


def convex_hull(points: np.ndarray, geom_tol: float = 1e-9) -> Hull:
    """Build the convex hull of a full-rank point cloud.

    Facets are simplicial.  Raises DegenerateHullError (with rank and the
    affine subspace attached) when the cloud does not span the ambient
    dimension at geom_tol resolution.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ParameterError("points must be a non-empty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise ParameterError("points must be finite")
    d = pts.shape[1]

    origin, basis, rank = affine_subspace(pts, geom_tol)
    if rank < d:
        err = DegenerateHullError(
            f"point cloud has affine rank {rank} < dimension {d}", rank=rank
        )
        err.origin = origin
        err.basis = basis
        raise err

    lo = pts.min(axis=0)
    scale = pts.max(axis=0) - lo  # all > 0 given full rank
    norm = (pts - lo) / scale

    if d == 1:
        verts = np.array([[float(lo[0])], [float(pts[:, 0].max())]])
        facets = (
            Facet((0,), (-1.0,), -float(verts[0, 0]), (-1.0,), 0.0),
            Facet((1,), (1.0,), float(verts[1, 0]), (1.0,), 1.0),
        )
        return Hull(
            dim=1,
            vertices=verts,
            facets=facets,
            volume=float(verts[1, 0] - verts[0, 0]),
            lo=lo,
            scale=scale,
        )

    opts = "Qt" + (" Qx" if d > 4 else "")
    try:
        qh = _QhullConvexHull(norm, qhull_options=opts)
    except QhullError:
        qh = _QhullConvexHull(norm, qhull_options=opts + " QJ")

    vert_input_ids = np.asarray(qh.vertices, dtype=np.int64)
    vert_coords_norm = norm[vert_input_ids]
    order = _canonical_vertex_order(pts[vert_input_ids])
    vert_input_ids = vert_input_ids[order]
    vert_coords_norm = vert_coords_norm[order]
    vertices_phys = pts[vert_input_ids]
    pos_of_input = {int(i): k for k, i in enumerate(vert_input_ids)}

    raw_facets: list[tuple[tuple[int, ...], np.ndarray, float]] = []
    for simplex, eq in zip(qh.simplices, qh.equations):
        ids = tuple(sorted(pos_of_input[int(i)] for i in simplex))
        n_norm = np.asarray(eq[:d], dtype=np.float64)
        off_norm = -float(eq[d])
        raw_facets.append((ids, n_norm, off_norm))
    raw_facets.sort(key=lambda f: f[0])

    facets = []
    for ids, n_norm, off_norm in raw_facets:
        m = n_norm / scale
        c = off_norm + float(np.dot(n_norm, lo / scale))
        mag = float(np.linalg.norm(m))
        facets.append(
            Facet(
                vertex_ids=ids,
                normal=tuple((m / mag).tolist()),
                offset=c / mag,
                normal_norm=tuple(n_norm.tolist()),
                offset_norm=off_norm,
            )
        )

    vol_norm = _fan_volume_normalized(vert_coords_norm, raw_facets)
    volume = vol_norm * float(np.prod(scale))

    return Hull(
        dim=d,
        vertices=vertices_phys,
        facets=tuple(facets),
        volume=volume,
        lo=lo,
        scale=scale,
    )


def hull_volume(hull: Hull) -> float:
    """Fan volume from the vertex centroid, in physical units.

    Recomputed from the stored vertices and facets; convex_hull's .volume
    field is this same quantity.
    """
    if hull.dim == 1:
        return float(hull.vertices[1, 0] - hull.vertices[0, 0])
    verts_norm = hull.normalize(hull.vertices)
    raw = [(f.vertex_ids, None, None) for f in hull.facets]
    return _fan_volume_normalized(verts_norm, raw) * float(np.prod(hull.scale))


def hull_to_jsonable(hull: Hull) -> dict:
    """JSON-ready view of a hull; identical hulls give identical output."""
    return {
        "dim": hull.dim,
        "vertices": [[float(v) for v in row] for row in hull.vertices],
        "facets": [
            {
                "vertices": list(f.vertex_ids),
                "normal": list(f.normal),
                "offset": f.offset,
            }
            for f in hull.facets
        ],
        "volume": hull.volume,
        "lo": [float(v) for v in hull.lo],
        "scale": [float(v) for v in hull.scale],
    }


def hull_from_jsonable(data: dict) -> Hull:
    """Rebuild a hull from its hull_to_jsonable form.

    Vertices, physical facet planes, volume, and normalization survive the
    round trip exactly (floats are serialized with full precision); the
    normalized-space facet forms are recomputed from them.
    """
    try:
        dim = int(data["dim"])
        vertices = np.asarray(data["vertices"], dtype=np.float64)
        lo = np.asarray(data["lo"], dtype=np.float64)
        scale = np.asarray(data["scale"], dtype=np.float64)
        volume = float(data["volume"])
        raw = data["facets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed hull data: {exc}") from exc
    if vertices.ndim != 2 or vertices.shape[1] != dim:
        raise ParameterError("hull vertices do not match the stated dimension")
    facets = []
    for f in raw:
        normal = np.asarray(f["normal"], dtype=np.float64)
        offset = float(f["offset"])
        n_norm = normal * scale
        off_norm = offset - float(normal @ lo)
        mag = float(np.linalg.norm(n_norm))
        if mag <= 0.0:
            raise ParameterError("facet normal has zero length")
        facets.append(
            Facet(
                vertex_ids=tuple(int(i) for i in f["vertices"]),
                normal=tuple(normal.tolist()),
                offset=offset,
                normal_norm=tuple((n_norm / mag).tolist()),
                offset_norm=off_norm / mag,
            )
        )
    return Hull(
        dim=dim,
        vertices=vertices,
        facets=tuple(facets),
        volume=volume,
        lo=lo,
        scale=scale,
    )
