"""CART decision trees over physical-unit design features.

Trees are grown greedily on Gini impurity.  Split candidates are the
midpoints between consecutive distinct values of each feature; the scan
works on presorted per-feature row orders filtered down each branch, so a
depth-3 fit stays fast on million-row inputs.  Thresholds are kept in
physical units (features are denormalized from the dataset's retained
bounds) so a node renders directly as e.g. "wind <= 7300 MW".

Ties between candidate splits go to the lowest feature index, then the
lowest threshold; rows with feature value equal to the threshold go left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import Dataset
from .errors import ParameterError

__all__ = [
    "TreeNode",
    "DecisionTreeModel",
    "fit_cart",
    "predict",
    "reassign",
    "tree_to_jsonable",
    "tree_to_dot",
]


@dataclass(frozen=True)
class TreeNode:
    """One tree node; feature < 0 marks a leaf (threshold meaningless)."""

    feature: int
    threshold: float
    left: int
    right: int
    histogram: tuple[int, ...]
    predicted: int

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class DecisionTreeModel:
    """Fitted tree: nodes[0] is the root; children reference node indices."""

    nodes: tuple[TreeNode, ...]
    feature_names: tuple[str, ...]
    n_classes: int
    max_depth: int
    min_leaf: int
    training_accuracy: float
    class_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ParameterError("a tree needs at least a root node")
        for i, node in enumerate(self.nodes):
            if not node.is_leaf:
                if not (0 <= node.left < len(self.nodes)) or not (
                    0 <= node.right < len(self.nodes)
                ):
                    raise ParameterError(f"node {i} child index out of range")
                if node.feature >= len(self.feature_names):
                    raise ParameterError(f"node {i} feature index out of range")

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    @property
    def depth(self) -> int:
        def walk(i: int) -> int:
            node = self.nodes[i]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)


def fit_cart(
    features: Dataset,
    labels: np.ndarray,
    max_depth: int,
    min_leaf: int | None = None,
    class_names: tuple[str, ...] = (),
    presorted: list[np.ndarray] | None = None,
) -> DecisionTreeModel:
    """Grow a Gini CART on the dataset's continuous features.

    Features are taken in physical units via the dataset's retained
    normalization bounds; categorical dataset columns are not split on.
    min_leaf defaults to 1% of the row count.  presorted, when given, must
    hold one ascending row order per feature; callers that fit repeatedly
    over the same rows can compute these once.
    """
    if max_depth < 1:
        raise ParameterError(f"max_depth must be >= 1, got {max_depth}")
    y = np.ascontiguousarray(labels, dtype=np.int32)
    n = features.n
    if y.shape != (n,):
        raise ParameterError(f"labels must have shape ({n},), got {y.shape}")
    if y.size and y.min() < 0:
        raise ParameterError("labels must be non-negative class indices")
    if min_leaf is None:
        min_leaf = max(1, int(round(0.01 * n)))
    if min_leaf < 1:
        raise ParameterError(f"min_leaf must be >= 1, got {min_leaf}")

    x = features.denormalize(features.continuous)
    n_classes = int(y.max()) + 1 if y.size else 1
    if class_names and len(class_names) != n_classes:
        raise ParameterError(
            f"{len(class_names)} class names for {n_classes} classes"
        )

    # Per feature: row order, values in that order, labels in that order.
    # Children filter all three with boolean masks, which keeps the order,
    # so the sort happens exactly once.
    if presorted is None:
        order = [np.argsort(x[:, f]) for f in range(x.shape[1])]
    else:
        if len(presorted) != x.shape[1]:
            raise ParameterError(
                f"{len(presorted)} presorted orders for {x.shape[1]} features"
            )
        order = [np.ascontiguousarray(o, dtype=np.int64) for o in presorted]
        for o in order:
            if o.shape != (n,):
                raise ParameterError("each presorted order must index every row")
    vals0 = [np.ascontiguousarray(x[o, f]) for f, o in enumerate(order)]
    labs0 = [y[o] for o in order]

    nodes: list[dict] = []

    def grow(
        order: list[np.ndarray],
        vals: list[np.ndarray],
        labs: list[np.ndarray],
        depth: int,
    ) -> int:
        hist = np.bincount(labs[0], minlength=n_classes)
        node_id = len(nodes)
        nodes.append(
            {
                "feature": -1,
                "threshold": 0.0,
                "left": -1,
                "right": -1,
                "histogram": hist,
                "predicted": int(np.argmax(hist)),
            }
        )
        n_node = len(labs[0])
        if (
            depth >= max_depth
            or n_node < 2 * min_leaf
            or np.count_nonzero(hist) <= 1
        ):
            return node_id

        best = _best_split(vals, labs, hist, n_classes, min_leaf)
        if best is None:
            return node_id
        feature, threshold = best

        go_left = np.zeros(n, dtype=bool)
        go_left[order[feature]] = vals[feature] <= threshold
        lo_, lv, ll, ro_, rv, rl = [], [], [], [], [], []
        for f in range(x.shape[1]):
            m = go_left[order[f]]
            lo_.append(order[f][m])
            lv.append(vals[f][m])
            ll.append(labs[f][m])
            m = ~m
            ro_.append(order[f][m])
            rv.append(vals[f][m])
            rl.append(labs[f][m])

        node = nodes[node_id]
        node["feature"] = feature
        node["threshold"] = float(threshold)
        node["left"] = grow(lo_, lv, ll, depth + 1)
        node["right"] = grow(ro_, rv, rl, depth + 1)
        return node_id

    grow(order, vals0, labs0, 0)

    model_nodes = tuple(
        TreeNode(
            feature=d["feature"],
            threshold=d["threshold"],
            left=d["left"],
            right=d["right"],
            histogram=tuple(int(v) for v in d["histogram"]),
            predicted=d["predicted"],
        )
        for d in nodes
    )
    model = DecisionTreeModel(
        nodes=model_nodes,
        feature_names=features.feature_names,
        n_classes=n_classes,
        max_depth=max_depth,
        min_leaf=min_leaf,
        training_accuracy=0.0,
        class_names=tuple(class_names),
    )
    accuracy = float(np.mean(predict(model, x) == y)) if n else 0.0
    return DecisionTreeModel(
        nodes=model_nodes,
        feature_names=features.feature_names,
        n_classes=n_classes,
        max_depth=max_depth,
        min_leaf=min_leaf,
        training_accuracy=accuracy,
        class_names=tuple(class_names),
    )


def _best_split(
    vals: list[np.ndarray],
    labs: list[np.ndarray],
    hist: np.ndarray,
    n_classes: int,
    min_leaf: int,
) -> tuple[int, float] | None:
    """Lowest weighted child Gini over all features and midpoints.

    Weighted Gini equals n - sum_child (sum_c count_c^2)/n_child up to the
    1/n factor, so the scan maximizes the per-child sums of squared class
    counts instead of forming both gini vectors, and score ties keep the
    lowest feature, then the lowest threshold.
    """
    n_node = len(labs[0])
    total = hist.astype(np.float64)
    tt = float(total @ total)
    left_n = np.arange(1, n_node, dtype=np.float64)
    sizes_ok = (left_n >= min_leaf) & (n_node - left_n >= min_leaf)
    best_score = np.inf
    best: tuple[int, float] | None = None
    for f in range(len(vals)):
        v = vals[f]
        valid = (v[1:] > v[:-1]) & sizes_ok
        if not valid.any():
            continue
        onehot = np.zeros((n_node, n_classes))
        onehot[np.arange(n_node), labs[f]] = 1.0
        lc = np.cumsum(onehot, axis=0)[:-1]
        ss_l = np.einsum("ij,ij->i", lc, lc)
        ss_r = tt - 2.0 * (lc @ total) + ss_l
        # Larger q means purer children; counts up to ~2^26 keep q exact
        # enough that equal splits tie exactly.
        q = ss_l / left_n + ss_r / (n_node - left_n)
        q[~valid] = -np.inf
        i = int(np.argmax(q))
        score = (n_node - q[i]) / n_node
        if score < best_score:
            best_score = score
            best = (f, float(0.5 * (v[i] + v[i + 1])))
    return best


def predict(model: DecisionTreeModel, x: np.ndarray) -> np.ndarray:
    """Class per row of a physical-unit feature matrix."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != len(model.feature_names):
        raise ParameterError(
            f"{x.shape[1]} feature columns, model expects {len(model.feature_names)}"
        )
    feat = np.array([n.feature for n in model.nodes], dtype=np.int64)
    thr = np.array([n.threshold for n in model.nodes])
    left = np.array([n.left for n in model.nodes], dtype=np.int64)
    right = np.array([n.right for n in model.nodes], dtype=np.int64)
    pred = np.array([n.predicted for n in model.nodes], dtype=np.int32)

    at = np.zeros(x.shape[0], dtype=np.int64)
    while True:
        internal = feat[at] >= 0
        if not internal.any():
            break
        rows = np.flatnonzero(internal)
        f = feat[at[rows]]
        goes_left = x[rows, f] <= thr[at[rows]]
        at[rows] = np.where(goes_left, left[at[rows]], right[at[rows]])
    return pred[at]


def reassign(data: Dataset, tree: DecisionTreeModel) -> np.ndarray:
    """Labels per dataset row as the tree predicts them."""
    if tuple(data.feature_names) != tuple(tree.feature_names):
        raise ParameterError(
            "dataset features do not match the tree: "
            f"{data.feature_names} vs {tree.feature_names}"
        )
    return predict(tree, data.denormalize(data.continuous))


def _class_label(model: DecisionTreeModel, idx: int) -> str:
    if model.class_names:
        return model.class_names[idx]
    return str(idx)


def tree_to_jsonable(model: DecisionTreeModel) -> dict:
    """JSON-ready view: node list with physical thresholds."""
    return {
        "schema": "nearopt-tree/1",
        "feature_names": list(model.feature_names),
        "n_classes": model.n_classes,
        "class_names": [
            _class_label(model, i) for i in range(model.n_classes)
        ],
        "max_depth": model.max_depth,
        "min_leaf": model.min_leaf,
        "training_accuracy": model.training_accuracy,
        "nodes": [
            {
                "id": i,
                "feature": None if n.is_leaf else model.feature_names[n.feature],
                "feature_index": None if n.is_leaf else n.feature,
                "threshold": None if n.is_leaf else n.threshold,
                "left": None if n.is_leaf else n.left,
                "right": None if n.is_leaf else n.right,
                "histogram": list(n.histogram),
                "n": int(sum(n.histogram)),
                "class": n.predicted,
                "class_name": _class_label(model, n.predicted),
            }
            for i, n in enumerate(model.nodes)
        ],
    }


def tree_to_dot(model: DecisionTreeModel) -> str:
    """Graphviz text for the tree; left edges are the <= branch."""
    lines = [
        "digraph cart {",
        '  node [shape=box, fontname="Helvetica"];',
    ]
    for i, n in enumerate(model.nodes):
        total = sum(n.histogram)
        if n.is_leaf:
            label = f"{_class_label(model, n.predicted)}\\nn={total}"
        else:
            label = (
                f"{model.feature_names[n.feature]} <= {n.threshold:g}\\nn={total}"
            )
        lines.append(f'  n{i} [label="{label}"];')
    for i, n in enumerate(model.nodes):
        if not n.is_leaf:
            lines.append(f'  n{i} -> n{n.left} [label="yes"];')
            lines.append(f'  n{i} -> n{n.right} [label="no"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
