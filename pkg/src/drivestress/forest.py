"""Random forest of Gini-split CART trees with bootstrap resampling.

Every random draw comes from a per-tree generator seeded by
``(rng_seed, tree_index)``, and every tie is broken by a fixed rule, so the
same data, config and seed always give the same model.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import ArityMismatch, EmptyNode, InvariantViolation, MalformedFile, SingleClassTrainingSet

FORMAT = "drivestress-forest"
FORMAT_VERSION = 1
# decreases at or below this are rounding noise, not a split
MIN_DECREASE = 1e-12


def gini(class_counts) -> float:
    counts = [int(c) for c in class_counts]
    if any(c < 0 for c in counts):
        raise ValueError("class counts must be non-negative")
    total = sum(counts)
    if total < 1:
        raise EmptyNode("Gini impurity of an empty node")
    s = 0.0
    for c in counts:
        p = c / total
        s += p * p
    return 1.0 - s


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple[int, ...]

    @property
    def majority(self) -> int:
        # argmax keeps the first maximum: ties go to the lowest class index
        return int(np.argmax(self.class_counts))


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 30
    min_samples_split: int = 2
    features_per_split: int | None = None  # None: ceil(sqrt(n_features))
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "min_samples_split"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")

    def resolved_features(self, n_features: int) -> int:
        k = self.features_per_split or math.ceil(math.sqrt(n_features))
        if k > n_features:
            raise ValueError(f"features_per_split={k} exceeds {n_features} features")
        return k


def best_split(X, y, candidate_features, n_classes: int = 2):
    """``(feature, threshold, impurity_decrease)`` or ``None``.

    Thresholds are midpoints between consecutive distinct values; samples
    with ``x <= threshold`` go left. Ties prefer the lower feature index,
    then the lower threshold.
    """
    cand = sorted(int(f) for f in candidate_features)
    if not cand:
        raise ValueError("no candidate features")
    X = np.asarray(X, dtype=np.float64)
    f, t, d = kernels.best_split(X, np.asarray(y, dtype=np.intp), n_classes, cand, MIN_DECREASE)
    if f < 0:
        return None
    return int(f), float(t), float(d)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(tree_index,))))


def grow_tree(X, y, config: ForestConfig, rng: np.random.Generator, n_classes: int = 2) -> TreeNode:
    """Recursive CART, depth-first, left subtree before right."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if len(y) < 1:
        raise EmptyNode("cannot grow a tree from no samples")
    k = config.resolved_features(X.shape[1])

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(y[idx], minlength=n_classes)
        pure = np.count_nonzero(counts) <= 1
        if depth >= config.max_depth or pure or len(idx) < config.min_samples_split:
            return Leaf(tuple(int(c) for c in counts))
        feats = np.sort(rng.choice(X.shape[1], size=k, replace=False))
        split = best_split(X[idx], y[idx], feats, n_classes)
        if split is None:
            return Leaf(tuple(int(c) for c in counts))
        f, thr, _ = split
        go_left = X[idx, f] <= thr
        return Split(f, thr, build(idx[go_left], depth + 1), build(idx[~go_left], depth + 1))

    return build(np.arange(len(y)), 0)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def iter_nodes(node: TreeNode):
    yield node
    if isinstance(node, Split):
        yield from iter_nodes(node.left)
        yield from iter_nodes(node.right)


def route(node: TreeNode, x) -> Leaf:
    while isinstance(node, Split):
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    config: ForestConfig
    feature_names: tuple[str, ...]
    class_order: tuple[str, ...] = ("low(=highway)", "high(=city)")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def votes(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise ArityMismatch(f"sample has {x.size} values, model expects {self.n_features}")
        v = np.zeros(len(self.class_order), dtype=np.int64)
        for t in self.trees:
            v[route(t, x).majority] += 1
        return v

    def predict(self, x) -> tuple[int, float]:
        """``(class index, winning vote fraction)``; vote ties go to class 0."""
        v = self.votes(x)
        winner = int(np.argmax(v))
        return winner, v[winner] / len(self.trees)

    def predict_many(self, X) -> np.ndarray:
        return np.array([self.predict(x)[0] for x in np.asarray(X, dtype=np.float64)], dtype=np.intp)

    def audit(self) -> None:
        """Raise InvariantViolation if any structural invariant is broken."""
        if len(self.trees) != self.config.n_trees:
            raise InvariantViolation(f"{len(self.trees)} trees, config says {self.config.n_trees}")
        for i, t in enumerate(self.trees):
            if tree_depth(t) > self.config.max_depth:
                raise InvariantViolation(f"tree {i} deeper than {self.config.max_depth}")
            for node in iter_nodes(t):
                if isinstance(node, Split) and not 0 <= node.feature_index < self.n_features:
                    raise InvariantViolation(f"tree {i} splits on feature {node.feature_index}")
                if isinstance(node, Leaf) and sum(node.class_counts) < 1:
                    raise InvariantViolation(f"tree {i} has an empty leaf")


def fit_arrays(
    X,
    y,
    config: ForestConfig,
    feature_names: Sequence[str] | None = None,
    class_order: Sequence[str] = ("low(=highway)", "high(=city)"),
) -> ForestModel:
    """Fit on arrays whose row order is already canonical."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    n_classes = len(class_order)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise SingleClassTrainingSet(f"training set has classes {sorted(set(y.tolist()))}; need two")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise ArityMismatch(f"{len(names)} feature names for {X.shape[1]} columns")
    trees = []
    n = len(y)
    for i in range(config.n_trees):
        rng = tree_rng(config.rng_seed, i)
        boot = rng.integers(0, n, size=n)
        trees.append(grow_tree(X[boot], y[boot], config, rng, n_classes))
    model = ForestModel(tuple(trees), config, names, tuple(class_order))
    model.audit()
    return model


def fit_forest(train, config: ForestConfig) -> ForestModel:
    """Fit on ExpandedSamples.

    Rows are sorted by ``(drive_id, section_index)`` before bootstrapping, so
    the caller's ordering has no effect on the model.
    """
    from .dataset import CLASS_ORDER, EXPANDED_NAMES, to_arrays

    ordered = sorted(train, key=lambda s: s.sample_id)
    X, y = to_arrays(ordered)
    return fit_arrays(X, y, config, EXPANDED_NAMES, tuple(c.tag for c in CLASS_ORDER))


# --- serialization --------------------------------------------------------------


def _encode(node: TreeNode, out: list) -> None:
    if isinstance(node, Leaf):
        out.append(["L", *node.class_counts])
    else:
        out.append(["S", node.feature_index, node.threshold])
        _encode(node.left, out)
        _encode(node.right, out)


def _decode(items: list, pos: int) -> tuple[TreeNode, int]:
    item = items[pos]
    if item[0] == "L":
        return Leaf(tuple(int(c) for c in item[1:])), pos + 1
    if item[0] != "S":
        raise MalformedFile(f"unknown node tag {item[0]!r}")
    left, pos = _decode(items, pos + 1)
    right, pos = _decode(items, pos)
    return Split(int(item[1]), float(item[2]), left, right), pos


def dumps(model: ForestModel) -> str:
    """Versioned JSON; trees in preorder. Floats round-trip exactly."""
    trees = []
    for t in model.trees:
        nodes: list = []
        _encode(t, nodes)
        trees.append(nodes)
    doc = {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "config": asdict(model.config),
        "class_order": list(model.class_order),
        "feature_names": list(model.feature_names),
        "trees": trees,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def loads(text: str) -> ForestModel:
    doc = json.loads(text)
    if doc.get("format") != FORMAT or doc.get("version") != FORMAT_VERSION:
        raise MalformedFile(f"not a {FORMAT} v{FORMAT_VERSION} document")
    trees = []
    for nodes in doc["trees"]:
        tree, end = _decode(nodes, 0)
        if end != len(nodes):
            raise MalformedFile("trailing nodes after tree")
        trees.append(tree)
    return ForestModel(tuple(trees), ForestConfig(**doc["config"]), tuple(doc["feature_names"]), tuple(doc["class_order"]))
