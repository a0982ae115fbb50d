"""Dataset normalization and the k-means / k-prototypes distillation step."""

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from nearopt.clustering import (
    ClusterModel,
    Dataset,
    auto_gamma,
    dataset_from_samples,
    dissimilarity,
    kmeans,
    kprototypes,
    model_to_jsonable,
    select_k,
)
from nearopt.errors import ParameterError
from nearopt.sampling import SampleSet

from toys import mixed_carrier_synthetic

LEVELS = ("hydrogen", "ammonia", "methanol")


def _blobs(seed=42, n_per=200, scale=0.04):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.15, 0.2], [0.8, 0.3], [0.45, 0.85]])
    truth = np.repeat(np.arange(3), n_per)
    pts = np.clip(centers[truth] + rng.normal(scale=scale, size=(3 * n_per, 2)), 0, 1)
    data = Dataset(
        continuous=pts, feature_names=("x", "y"), lo=np.zeros(2), hi=np.ones(2)
    )
    return data, truth


def _mixed_dataset():
    cont, cats, truth = mixed_carrier_synthetic()
    data = Dataset(
        continuous=cont,
        feature_names=("u", "v"),
        lo=np.zeros(2),
        hi=np.ones(2),
        categorical=cats[:, None],
        categorical_names=("carrier",),
        category_levels=(LEVELS,),
    )
    return data, truth


# ----------------------------------------------------------------------
# Dataset


def test_from_physical_round_trips_units():
    rng = np.random.default_rng(1)
    phys = rng.normal(size=(50, 3)) * [1000.0, 0.01, 5.0] + [2e4, -3.0, 0.0]
    data = Dataset.from_physical(phys, ("wind", "pv", "battery"))
    assert data.continuous.min() >= 0.0 and data.continuous.max() <= 1.0
    np.testing.assert_allclose(data.denormalize(data.continuous), phys, rtol=1e-12)
    assert data.feature_names == ("wind", "pv", "battery")
    assert data.dropped == {}


def test_from_physical_drops_constant_columns():
    rng = np.random.default_rng(2)
    phys = np.column_stack([rng.normal(size=20), np.full(20, 7.25), rng.normal(size=20)])
    data = Dataset.from_physical(phys, ("a", "fixed", "b"))
    assert data.feature_names == ("a", "b")
    assert data.dropped == {"fixed": 7.25}
    with pytest.raises(ParameterError, match="constant"):
        Dataset.from_physical(np.full((5, 2), 3.0), ("a", "b"))


def test_dataset_validation():
    ok = np.random.default_rng(0).uniform(size=(10, 2))
    with pytest.raises(ParameterError, match="normalized"):
        Dataset(continuous=ok + 5.0, feature_names=("a", "b"), lo=np.zeros(2), hi=np.ones(2))
    with pytest.raises(ParameterError, match="hi > lo"):
        Dataset(continuous=ok, feature_names=("a", "b"), lo=np.ones(2), hi=np.ones(2))
    with pytest.raises(ParameterError):
        Dataset(continuous=ok, feature_names=("a",), lo=np.zeros(2), hi=np.ones(2))
    with pytest.raises(ParameterError, match="codes outside"):
        Dataset(
            continuous=ok, feature_names=("a", "b"), lo=np.zeros(2), hi=np.ones(2),
            categorical=np.full((10, 1), 3), categorical_names=("c",),
            category_levels=(("x", "y"),),
        )
    with pytest.raises(ParameterError, match="align"):
        Dataset(
            continuous=ok, feature_names=("a", "b"), lo=np.zeros(2), hi=np.ones(2),
            categorical=np.zeros((4, 1), dtype=np.int16), categorical_names=("c",),
            category_levels=(("x", "y"),),
        )


def test_dataset_from_samples_carrier_handling():
    rng = np.random.default_rng(3)
    s = SampleSet(
        matrix=rng.uniform(1.0, 2.0, size=(30, 2)),
        variables=("wind", "pv"),
        seed=0,
        hull_id="h",
        carrier_tag=rng.integers(0, 3, size=30),
        carrier_levels=LEVELS,
    )
    plain = dataset_from_samples(s)
    assert plain.n_categorical == 0
    assert plain.feature_names == ("wind", "pv")
    mixed = dataset_from_samples(s, include_carrier=True)
    assert mixed.n_categorical == 1
    assert mixed.categorical_names == ("carrier",)
    assert mixed.category_levels == (LEVELS,)
    untagged = SampleSet(matrix=s.matrix, variables=s.variables, seed=0, hull_id="h")
    with pytest.raises(ParameterError, match="carrier"):
        dataset_from_samples(untagged, include_carrier=True)


# ----------------------------------------------------------------------
# Dissimilarity and gamma


def test_dissimilarity_hand_values():
    assert dissimilarity(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 25.0
    x = (np.array([0.5]), np.array([0, 1]))
    c = (np.array([0.25]), np.array([0, 2]))
    assert dissimilarity(x, c, gamma=0.1) == pytest.approx(0.0625 + 0.1)
    with pytest.raises(ParameterError):
        dissimilarity(np.zeros(2), np.zeros(3))
    with pytest.raises(ParameterError, match="both"):
        dissimilarity(x, np.array([0.25]), gamma=0.1)


def test_auto_gamma_is_mean_column_std():
    a = np.tile([0.0, 1.0], 8)
    b = np.tile([0.35, 0.65], 8)
    data = Dataset(
        continuous=np.column_stack([a, b]),
        feature_names=("a", "b"),
        lo=np.zeros(2),
        hi=np.ones(2),
    )
    assert auto_gamma(data) == pytest.approx((0.5 + 0.15) / 2.0, abs=1e-15)


# ----------------------------------------------------------------------
# k-means


def test_kmeans_separates_blobs():
    data, truth = _blobs()
    model = kmeans(data, 3, seed=0)
    assert adjusted_rand_score(truth, model.labels) >= 0.99
    assert model.k == 3
    assert model.inertia > 0.0
    assert model.modes is None
    sizes = np.bincount(model.labels, minlength=3)
    assert (sizes > 0).all()


def test_kmeans_trivial_split():
    pts = np.array([[0.0, 0.0], [0.05, 0.0], [1.0, 1.0], [0.95, 1.0]])
    data = Dataset(continuous=pts, feature_names=("x", "y"), lo=np.zeros(2), hi=np.ones(2))
    model = kmeans(data, 2, seed=1)
    assert model.labels[0] == model.labels[1]
    assert model.labels[2] == model.labels[3]
    assert model.labels[0] != model.labels[2]


def test_kmeans_determinism_and_edges():
    data, _ = _blobs(n_per=30)
    a = kmeans(data, 3, seed=5)
    b = kmeans(data, 3, seed=5)
    assert a.labels.tobytes() == b.labels.tobytes()
    assert a.centroids.tobytes() == b.centroids.tobytes()
    assert a.inertia == b.inertia
    one = kmeans(data, 1, seed=0)
    assert (one.labels == 0).all()
    np.testing.assert_allclose(one.centroids[0], data.continuous.mean(axis=0), atol=1e-12)
    full = kmeans(data, data.n, seed=0, restarts=1)
    assert full.inertia == pytest.approx(0.0, abs=1e-12)


def test_kmeans_parameter_errors():
    data, _ = _blobs(n_per=5)
    with pytest.raises(ParameterError):
        kmeans(data, 0)
    with pytest.raises(ParameterError):
        kmeans(data, data.n + 1)
    with pytest.raises(ParameterError):
        kmeans(data, 2, restarts=0)
    mixed, _ = _mixed_dataset()
    with pytest.raises(ParameterError, match="kprototypes"):
        kmeans(mixed, 2)


# ----------------------------------------------------------------------
# k-prototypes


def test_kprototypes_recovers_mixed_carriers():
    data, truth = _mixed_dataset()
    model = kprototypes(data, 3, gamma=0.02, seed=0)
    assert adjusted_rand_score(truth, model.labels) >= 0.9
    assert model.modes is not None and model.modes.shape == (3, 1)


def test_gamma_balance_tips_the_split():
    """Continuous and categorical structure disagree; gamma arbitrates."""
    rng = np.random.default_rng(9)
    n = 80
    cont = np.concatenate([np.full(n // 2, 0.1), np.full(n // 2, 0.9)])
    cont = np.clip(cont + rng.normal(scale=0.01, size=n), 0, 1)[:, None]
    by_position = (np.arange(n) >= n // 2).astype(int)
    by_parity = (np.arange(n) % 2).astype(np.int16)
    data = Dataset(
        continuous=cont, feature_names=("x",), lo=np.zeros(1), hi=np.ones(1),
        categorical=by_parity[:, None], categorical_names=("c",),
        category_levels=(("even", "odd"),),
    )
    numeric_led = kprototypes(data, 2, gamma=1e-9, seed=0)
    assert adjusted_rand_score(by_position, numeric_led.labels) == 1.0
    category_led = kprototypes(data, 2, gamma=100.0, seed=0)
    assert adjusted_rand_score(by_parity, category_led.labels) == 1.0


def test_kprototypes_parameter_errors():
    mixed, _ = _mixed_dataset()
    with pytest.raises(ParameterError, match="gamma"):
        kprototypes(mixed, 2, gamma=0.0)
    with pytest.raises(ParameterError, match="gamma"):
        kprototypes(mixed, 2, gamma=float("nan"))
    plain, _ = _blobs(n_per=5)
    with pytest.raises(ParameterError, match="kmeans"):
        kprototypes(plain, 2, gamma=0.1)


def test_mode_ties_take_the_lowest_code():
    cont = np.linspace(0, 1, 8)[:, None]
    cats = np.array([1, 1, 0, 0, 2, 2, 1, 0], dtype=np.int16)[:, None]  # 3x0, 3x1, 2x2
    data = Dataset(
        continuous=cont, feature_names=("x",), lo=np.zeros(1), hi=np.ones(1),
        categorical=cats, categorical_names=("c",), category_levels=(LEVELS,),
    )
    model = kprototypes(data, 1, gamma=0.5, seed=0, restarts=1)
    assert model.modes[0, 0] == 0


# ----------------------------------------------------------------------
# Diagnostics and export


def test_select_k_reports_diagnostics():
    data, _ = _blobs(n_per=40)
    rows = select_k(data, [1, 2, 3], seed=0)
    assert [r["k"] for r in rows] == [1, 2, 3]
    inertias = [r["inertia"] for r in rows]
    assert inertias[0] >= inertias[1] >= inertias[2]
    assert rows[0]["silhouette"] is None
    for r in rows[1:]:
        assert -1.0 <= r["silhouette"] <= 1.0
    for r in rows:
        assert 0.0 < r["tree_accuracy"] <= 1.0
        assert r["tree_depth"] == 3
    with pytest.raises(ParameterError):
        select_k(data, [])


def test_model_jsonable_uses_physical_units():
    rng = np.random.default_rng(4)
    phys = np.column_stack([
        rng.uniform(100, 200, size=40),
        rng.uniform(0.0, 1e-3, size=40),
    ])
    data = Dataset.from_physical(phys, ("wind", "leak"))
    model = kmeans(data, 2, seed=0)
    doc = model_to_jsonable(model, data)
    assert doc["schema"] == "nearopt-clusters/1"
    assert doc["k"] == 2
    assert sum(doc["cluster_sizes"]) == data.n
    np.testing.assert_allclose(
        np.array(doc["centroids"]), data.denormalize(model.centroids), rtol=1e-12
    )
    lo, hi = phys.min(axis=0), phys.max(axis=0)
    for row in doc["centroids"]:
        assert lo[0] <= row[0] <= hi[0]
        assert lo[1] <= row[1] <= hi[1]
    mixed, _ = _mixed_dataset()
    mm = kprototypes(mixed, 3, gamma=0.02, seed=0)
    mdoc = model_to_jsonable(mm, mixed)
    assert mdoc["categorical_names"] == ["carrier"]
    assert all(row[0] in LEVELS for row in mdoc["modes"])


def test_cluster_model_validation():
    with pytest.raises(ParameterError, match="k rows"):
        ClusterModel(
            k=3, centroids=np.zeros((2, 2)), modes=None, gamma=0.0,
            labels=np.zeros(4, dtype=np.int32), inertia=0.0,
        )
    with pytest.raises(ParameterError, match="unit box"):
        ClusterModel(
            k=1, centroids=np.array([[2.0, 0.0]]), modes=None, gamma=0.0,
            labels=np.zeros(4, dtype=np.int32), inertia=0.0,
        )
    with pytest.raises(ParameterError, match="index"):
        ClusterModel(
            k=2, centroids=np.zeros((2, 2)), modes=None, gamma=0.0,
            labels=np.array([0, 5], dtype=np.int32), inertia=0.0,
        )
