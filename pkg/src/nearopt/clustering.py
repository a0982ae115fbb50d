"""Archetype clustering over near-optimal design samples.

Continuous features are min-max normalized to [0,1] (bounds retained so
centroids and tree thresholds can be reported in physical units); an
optional categorical column set enters the dissimilarity through simple
matching scaled by gamma.  Pure continuous data uses k-means, mixed data
k-prototypes; both run Lloyd iterations from a greedy farthest-point start
with several seeded restarts, keeping the lowest-inertia model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .sampling import SampleSet

__all__ = [
    "Dataset",
    "ClusterModel",
    "dissimilarity",
    "kmeans",
    "kprototypes",
    "auto_gamma",
    "select_k",
    "dataset_from_samples",
    "model_to_jsonable",
]

_MAX_SWEEPS = 300


@dataclass(frozen=True)
class Dataset:
    """Normalized feature matrix with its normalization kept around.

    continuous holds min-max normalized values; lo/hi are the physical
    bounds used, so lo + continuous * (hi - lo) recovers physical units.
    Constant physical columns cannot be normalized and are dropped at
    construction; their names and values are recorded in dropped.
    categorical holds small-int codes into category_levels per column.
    """

    continuous: np.ndarray
    feature_names: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    categorical: np.ndarray | None = None
    categorical_names: tuple[str, ...] = ()
    category_levels: tuple[tuple[str, ...], ...] = ()
    dropped: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.continuous, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ParameterError(f"continuous must be 2-D and non-empty, got {c.shape}")
        if c.shape[1] != len(self.feature_names):
            raise ParameterError("feature_names must match continuous columns")
        if c.size and (c.min() < -1e-12 or c.max() > 1.0 + 1e-12):
            raise ParameterError("continuous values must be normalized to [0, 1]")
        lo = np.ascontiguousarray(self.lo, dtype=np.float64)
        hi = np.ascontiguousarray(self.hi, dtype=np.float64)
        if lo.shape != (c.shape[1],) or hi.shape != (c.shape[1],):
            raise ParameterError("lo/hi must have one bound per feature")
        if np.any(hi <= lo):
            raise ParameterError("normalization bounds must satisfy hi > lo")
        object.__setattr__(self, "continuous", c)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "categorical_names", tuple(self.categorical_names))
        object.__setattr__(
            self, "category_levels", tuple(tuple(lv) for lv in self.category_levels)
        )
        if self.categorical is not None:
            cat = np.ascontiguousarray(self.categorical, dtype=np.int16)
            if cat.ndim != 2 or cat.shape[0] != c.shape[0]:
                raise ParameterError("categorical must align with continuous rows")
            if cat.shape[1] != len(self.categorical_names) or cat.shape[1] != len(
                self.category_levels
            ):
                raise ParameterError(
                    "categorical_names and category_levels must match columns"
                )
            for j, levels in enumerate(self.category_levels):
                if cat.shape[0] and (
                    cat[:, j].min() < 0 or cat[:, j].max() >= len(levels)
                ):
                    raise ParameterError(
                        f"categorical column {self.categorical_names[j]!r} has "
                        "codes outside its levels"
                    )
            object.__setattr__(self, "categorical", cat)

    @property
    def n(self) -> int:
        return int(self.continuous.shape[0])

    @property
    def n_continuous(self) -> int:
        return int(self.continuous.shape[1])

    @property
    def n_categorical(self) -> int:
        return 0 if self.categorical is None else int(self.categorical.shape[1])

    @classmethod
    def from_physical(
        cls,
        matrix: np.ndarray,
        feature_names: tuple[str, ...],
        categorical: np.ndarray | None = None,
        categorical_names: tuple[str, ...] = (),
        category_levels: tuple[tuple[str, ...], ...] = (),
    ) -> "Dataset":
        """Min-max normalize a physical-unit matrix, dropping constants."""
        m = np.ascontiguousarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ParameterError(f"matrix must be 2-D and non-empty, got {m.shape}")
        if m.shape[1] != len(feature_names):
            raise ParameterError("feature_names must match matrix columns")
        if not np.all(np.isfinite(m)):
            raise ParameterError("matrix values must be finite")
        lo, hi = m.min(axis=0), m.max(axis=0)
        keep = hi > lo
        dropped = {
            str(feature_names[j]): float(lo[j])
            for j in range(m.shape[1])
            if not keep[j]
        }
        if not keep.any():
            raise ParameterError("all features are constant; nothing to cluster")
        kept = np.flatnonzero(keep)
        norm = (m[:, kept] - lo[kept]) / (hi[kept] - lo[kept])
        return cls(
            continuous=norm,
            feature_names=tuple(str(feature_names[j]) for j in kept),
            lo=lo[kept],
            hi=hi[kept],
            categorical=categorical,
            categorical_names=categorical_names,
            category_levels=category_levels,
            dropped=dropped,
        )

    def denormalize(self, rows: np.ndarray) -> np.ndarray:
        """Map normalized feature rows back to physical units."""
        return self.lo + np.asarray(rows, dtype=np.float64) * (self.hi - self.lo)


def dataset_from_samples(samples: SampleSet, include_carrier: bool = False) -> Dataset:
    """Build a clustering dataset from a sample set's capacity columns."""
    categorical = None
    categorical_names: tuple[str, ...] = ()
    category_levels: tuple[tuple[str, ...], ...] = ()
    if include_carrier:
        if samples.carrier_tag is None:
            raise ParameterError("sample set carries no carrier tags")
        categorical = samples.carrier_tag[:, None]
        categorical_names = ("carrier",)
        category_levels = (tuple(samples.carrier_levels),)
    return Dataset.from_physical(
        samples.matrix,
        samples.variables,
        categorical=categorical,
        categorical_names=categorical_names,
        category_levels=category_levels,
    )


@dataclass(frozen=True)
class ClusterModel:
    """Fitted centroids/modes with the assignments that produced them.

    centroids are in normalized coordinates; modes are category codes.
    inertia is the summed dissimilarity of every row to its assigned
    centroid; reseeds counts empty-cluster rescues during the winning
    restart.
    """

    k: int
    centroids: np.ndarray
    modes: np.ndarray | None
    gamma: float
    labels: np.ndarray
    inertia: float
    reseeds: int = 0

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.centroids, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if c.shape[0] != self.k:
            raise ParameterError("centroids must have k rows")
        if c.size and (c.min() < -1e-9 or c.max() > 1.0 + 1e-9):
            raise ParameterError("centroids must stay inside the unit box")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ParameterError("labels must index clusters")
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "labels", labels)
        if self.modes is not None:
            object.__setattr__(
                self, "modes", np.ascontiguousarray(self.modes, dtype=np.int16)
            )


def dissimilarity(x, c, gamma: float = 0.0) -> float:
    """Squared Euclidean distance plus gamma per categorical mismatch.

    x and c are either plain continuous vectors or (continuous,
    categorical) pairs; the categorical part counts simple mismatches.
    """
    xc, xd = x if isinstance(x, tuple) else (x, None)
    cc, cd = c if isinstance(c, tuple) else (c, None)
    xc = np.asarray(xc, dtype=np.float64)
    cc = np.asarray(cc, dtype=np.float64)
    if xc.shape != cc.shape:
        raise ParameterError(f"continuous parts differ in shape: {xc.shape} vs {cc.shape}")
    if (xd is None) != (cd is None):
        raise ParameterError("categorical parts must be both present or both absent")
    out = float(np.sum((xc - cc) ** 2))
    if xd is not None:
        xd = np.asarray(xd)
        cd = np.asarray(cd)
        if xd.shape != cd.shape:
            raise ParameterError(
                f"categorical parts differ in shape: {xd.shape} vs {cd.shape}"
            )
        out += gamma * int(np.count_nonzero(xd != cd))
    return out


def auto_gamma(data: Dataset) -> float:
    """Mean standard deviation of the normalized continuous columns."""
    if data.n_continuous < 1:
        raise ParameterError("need at least one continuous column")
    sigma = data.continuous.std(axis=0, ddof=0)
    if np.all(sigma <= 0.0):
        raise ParameterError("all continuous columns have zero variance")
    return float(sigma.mean())


def kmeans(data: Dataset, k: int, seed: int = 0, restarts: int = 10) -> ClusterModel:
    """Best-of-restarts Lloyd k-means on continuous-only data."""
    if data.n_categorical:
        raise ParameterError(
            "dataset has categorical columns; use kprototypes with a gamma"
        )
    return _lloyd_best(data, k, 0.0, seed, restarts)


def kprototypes(
    data: Dataset, k: int, gamma: float, seed: int = 0, restarts: int = 10
) -> ClusterModel:
    """Best-of-restarts Lloyd k-prototypes on mixed data."""
    if data.n_categorical < 1:
        raise ParameterError("dataset has no categorical columns; use kmeans")
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise ParameterError(f"gamma must be > 0, got {gamma!r}")
    return _lloyd_best(data, k, gamma, seed, restarts)


def select_k(
    data: Dataset,
    k_range,
    seed: int = 0,
    gamma: float | None = None,
    tree_depth: int = 3,
    silhouette_cap: int = 2000,
) -> list[dict]:
    """Fit each k and report inertia, silhouette, and post-tree accuracy.

    Pure diagnostics: the choice of k stays with the caller.  Silhouette
    uses the clustering dissimilarity and is evaluated on a seeded
    subsample when the dataset is large; it is absent (None) at k=1.
    """
    from .cart import fit_cart  # local import to keep module load cycle-free

    ks = [int(k) for k in k_range]
    if not ks:
        raise ParameterError("k_range must be non-empty")
    if gamma is None and data.n_categorical:
        gamma = auto_gamma(data)
    out = []
    for k in ks:
        if data.n_categorical:
            model = kprototypes(data, k, float(gamma), seed=seed)
        else:
            model = kmeans(data, k, seed=seed)
        tree = fit_cart(data, model.labels, max_depth=tree_depth)
        row = {
            "k": k,
            "inertia": float(model.inertia),
            "silhouette": _silhouette(data, model, seed, silhouette_cap),
            "tree_accuracy": float(tree.training_accuracy),
            "tree_depth": int(tree_depth),
        }
        out.append(row)
    return out


def model_to_jsonable(model: ClusterModel, data: Dataset) -> dict:
    """JSON-ready cluster model with centroids in physical units."""
    phys = data.denormalize(model.centroids)
    sizes = np.bincount(model.labels, minlength=model.k)
    out: dict = {
        "schema": "nearopt-clusters/1",
        "k": model.k,
        "gamma": model.gamma,
        "inertia": model.inertia,
        "reseeds": model.reseeds,
        "feature_names": list(data.feature_names),
        "centroids": [[float(v) for v in row] for row in phys],
        "centroids_normalized": [[float(v) for v in row] for row in model.centroids],
        "cluster_sizes": [int(s) for s in sizes],
    }
    if model.modes is not None:
        out["categorical_names"] = list(data.categorical_names)
        out["modes"] = [
            [data.category_levels[j][code] for j, code in enumerate(row)]
            for row in model.modes
        ]
    return out


def _lloyd_best(
    data: Dataset, k: int, gamma: float, seed: int, restarts: int
) -> ClusterModel:
    n = data.n
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    best: ClusterModel | None = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(r,)))
        model = _lloyd_once(data, k, gamma, rng)
        if best is None or model.inertia < best.inertia - 1e-15:
            best = model
    return best


def _lloyd_once(
    data: Dataset, k: int, gamma: float, rng: np.random.Generator
) -> ClusterModel:
    x = data.continuous
    cat = data.categorical
    n = data.n

    # Greedy farthest-point start: random first pick, then max-min distance.
    first = int(rng.integers(n))
    chosen = [first]
    dmin = _dissim_rows(x, cat, x[first], None if cat is None else cat[first], gamma)
    while len(chosen) < k:
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        d_new = _dissim_rows(x, cat, x[nxt], None if cat is None else cat[nxt], gamma)
        dmin = np.minimum(dmin, d_new)
    centroids = x[chosen].copy()
    modes = None if cat is None else cat[chosen].copy()

    labels = np.full(n, -1, dtype=np.int32)
    reseeds = 0
    for _ in range(_MAX_SWEEPS):
        dists = _dissim_matrix(x, cat, centroids, modes, gamma)
        new_labels = np.argmin(dists, axis=1).astype(np.int32)

        # Rescue empty clusters with the point farthest from its centroid.
        assigned = dists[np.arange(n), new_labels]
        for j in range(k):
            if not np.any(new_labels == j):
                far = int(np.argmax(assigned))
                new_labels[far] = j
                assigned[far] = 0.0
                reseeds += 1

        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = labels == j
            centroids[j] = x[members].mean(axis=0)
            if cat is not None:
                modes[j] = _column_modes(cat[members])

    dists = _dissim_matrix(x, cat, centroids, modes, gamma)
    inertia = float(dists[np.arange(n), labels].sum())
    return ClusterModel(
        k=k,
        centroids=np.clip(centroids, 0.0, 1.0),
        modes=modes,
        gamma=gamma,
        labels=labels,
        inertia=inertia,
        reseeds=reseeds,
    )


def _dissim_rows(x, cat, c_cont, c_cat, gamma: float) -> np.ndarray:
    d = ((x - c_cont) ** 2).sum(axis=1)
    if cat is not None:
        d = d + gamma * (cat != c_cat).sum(axis=1)
    return d


def _dissim_matrix(x, cat, centroids, modes, gamma: float) -> np.ndarray:
    d = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    if cat is not None:
        d = d + gamma * (cat[:, None, :] != modes[None, :, :]).sum(axis=2)
    return d


def _column_modes(rows: np.ndarray) -> np.ndarray:
    """Most frequent code per column; ties go to the lowest code."""
    out = np.empty(rows.shape[1], dtype=np.int16)
    for j in range(rows.shape[1]):
        counts = np.bincount(rows[:, j])
        out[j] = int(np.argmax(counts))
    return out


def _silhouette(
    data: Dataset, model: ClusterModel, seed: int, cap: int
) -> float | None:
    if model.k < 2:
        return None
    n = data.n
    if n > cap:
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(10_000,)))
        idx = np.sort(rng.choice(n, size=cap, replace=False))
    else:
        idx = np.arange(n)
    x = data.continuous[idx]
    cat = None if data.categorical is None else data.categorical[idx]
    labels = model.labels[idx]

    # Pairwise dissimilarity on the (sub)sample.
    d = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    if cat is not None:
        d = d + model.gamma * (cat[:, None, :] != cat[None, :, :]).sum(axis=2)

    m = len(idx)
    scores = np.zeros(m)
    for i in range(m):
        same = labels == labels[i]
        same[i] = False
        if not same.any():
            scores[i] = 0.0
            continue
        a = d[i, same].mean()
        b = np.inf
        for j in range(model.k):
            if j == labels[i]:
                continue
            others = labels == j
            if others.any():
                b = min(b, d[i, others].mean())
        if not np.isfinite(b):
            scores[i] = 0.0
            continue
        scores[i] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return float(scores.mean())
