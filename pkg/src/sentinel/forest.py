"""Portable tree-ensemble classifier: file format, desk-scale trainer, inference.

Trees are array-encoded (children strictly after parents, root at 0) so the
format is cycle-free by construction. Routing rule, frozen in the format:
go left iff x[feature] <= threshold.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyData, IntegrityError, ParseError, SchemaMismatch
from .schema import FeatureSchema, TransformedVector

FORMAT_VERSION = 1
_DIST_TOL = 1e-9


class DegenerateDataWarning(UserWarning):
    """All training labels identical; a constant single-leaf model was returned."""


@dataclass(frozen=True)
class Tree:
    """One decision tree, struct-of-arrays. feature[i] == -1 marks a leaf."""

    feature: np.ndarray    # int32, -1 at leaves
    threshold: np.ndarray  # float64
    left: np.ndarray       # int32, -1 at leaves
    right: np.ndarray      # int32, -1 at leaves
    leaf: np.ndarray       # float64 (n_nodes, n_classes); rows valid only at leaves

    def __len__(self) -> int:
        return len(self.feature)

    def route(self, X: np.ndarray) -> np.ndarray:
        """Leaf distributions reached by each row of X, shape (n, n_classes)."""
        idx = np.zeros(len(X), dtype=np.int32)
        while True:
            cur = self.feature[idx]
            internal = cur >= 0
            if not internal.any():
                break
            rows = np.nonzero(internal)[0]
            at = idx[rows]
            go_left = X[rows, cur[rows]] <= self.threshold[at]
            idx[rows] = np.where(go_left, self.left[at], self.right[at])
        return self.leaf[idx]

    def _scalar_tables(self):
        # plain-Python copies for the one-row hot path; built once per tree
        tables = getattr(self, "_tables", None)
        if tables is None:
            tables = (
                self.feature.tolist(),
                self.threshold.tolist(),
                self.left.tolist(),
                self.right.tolist(),
                [tuple(row) for row in self.leaf],
            )
            object.__setattr__(self, "_tables", tables)
        return tables

    def route_one(self, values: list[float]) -> tuple[float, ...]:
        feature, threshold, left, right, leaf = self._scalar_tables()
        i = 0
        f = feature[0]
        while f >= 0:
            i = left[i] if values[f] <= threshold[i] else right[i]
            f = feature[i]
        return leaf[i]

    def to_nodes(self) -> list[dict]:
        nodes = []
        for i in range(len(self)):
            if self.feature[i] < 0:
                nodes.append({"leaf": [float(v) for v in self.leaf[i]]})
            else:
                nodes.append(
                    {
                        "f": int(self.feature[i]),
                        "t": float(self.threshold[i]),
                        "l": int(self.left[i]),
                        "r": int(self.right[i]),
                    }
                )
        return nodes


@dataclass(frozen=True)
class Prediction:
    probabilities: tuple[float, ...]
    predicted_class: str
    predicted_index: int


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    class_labels: tuple[str, ...]
    base_values: tuple[float, ...]
    schema_version: int
    model_id: str = field(default="", compare=False)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Mean of per-tree leaf distributions, shape (n, n_classes)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        acc = np.zeros((len(X), self.n_classes), dtype=np.float64)
        for tree in self.trees:
            acc += tree.route(X)
        return acc / len(self.trees)


def _tree_from_nodes(nodes: list[dict], n_classes: int, tree_no: int) -> Tree:
    n = len(nodes)
    if n == 0:
        raise IntegrityError(f"tree {tree_no} is empty")
    feature = np.full(n, -1, dtype=np.int32)
    threshold = np.zeros(n, dtype=np.float64)
    left = np.full(n, -1, dtype=np.int32)
    right = np.full(n, -1, dtype=np.int32)
    leaf = np.zeros((n, n_classes), dtype=np.float64)

    for i, node in enumerate(nodes):
        is_leaf = "leaf" in node
        is_internal = all(k in node for k in ("f", "t", "l", "r"))
        if is_leaf == is_internal:
            raise IntegrityError(
                f"tree {tree_no} node {i}: must be exactly one of internal {{f,t,l,r}} or leaf"
            )
        if is_leaf:
            dist = node["leaf"]
            if len(dist) != n_classes:
                raise IntegrityError(f"tree {tree_no} node {i}: leaf has {len(dist)} classes")
            d = np.asarray(dist, dtype=np.float64)
            if (d < 0).any() or abs(d.sum() - 1.0) > _DIST_TOL:
                raise IntegrityError(
                    f"tree {tree_no} node {i}: leaf distribution not a probability vector"
                )
            leaf[i] = d
        else:
            fi, l, r = int(node["f"]), int(node["l"]), int(node["r"])
            if fi < 0:
                raise IntegrityError(f"tree {tree_no} node {i}: negative feature index")
            if not (i < l < n and i < r < n):
                raise IntegrityError(
                    f"tree {tree_no} node {i}: children must be in (node, {n}) range, got {l}, {r}"
                )
            feature[i] = fi
            threshold[i] = float(node["t"])
            left[i] = l
            right[i] = r

    # Reachability: every node must sit on some root-to-leaf path.
    seen = set()
    stack = [0]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        if feature[i] >= 0:
            stack.extend((int(left[i]), int(right[i])))
    if len(seen) != n:
        raise IntegrityError(f"tree {tree_no}: {n - len(seen)} unreachable node(s)")

    return Tree(feature=feature, threshold=threshold, left=left, right=right, leaf=leaf)


def _canonical_payload(model: ForestModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "schema_version": model.schema_version,
        "class_labels": list(model.class_labels),
        "base_values": [float(v) for v in model.base_values],
        "trees": [t.to_nodes() for t in model.trees],
    }


def serialize_model(model: ForestModel) -> bytes:
    """Canonical bytes: UTF-8, sorted keys, shortest round-trip floats."""
    return json.dumps(
        _canonical_payload(model), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def model_hash(model: ForestModel) -> str:
    return hashlib.sha256(serialize_model(model)).hexdigest()


def _finish(trees, class_labels, base_values, schema_version) -> ForestModel:
    base = np.asarray(base_values, dtype=np.float64)
    if (base < 0).any() or abs(base.sum() - 1.0) > _DIST_TOL:
        raise IntegrityError("base_values is not a probability vector")
    model = ForestModel(
        trees=tuple(trees),
        class_labels=tuple(class_labels),
        base_values=tuple(float(v) for v in base),
        schema_version=int(schema_version),
    )
    return ForestModel(
        trees=model.trees,
        class_labels=model.class_labels,
        base_values=model.base_values,
        schema_version=model.schema_version,
        model_id=model_hash(model),
    )


def parse_model(data: bytes | str) -> ForestModel:
    """Parse and integrity-check a model file. Round-trips serialize_model."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"model file is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("model file must be a JSON object")
    missing = [k for k in ("format_version", "schema_version", "class_labels", "base_values", "trees") if k not in doc]
    if missing:
        raise ParseError(f"model file missing keys: {', '.join(missing)}")
    if doc["format_version"] != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version: {doc['format_version']!r}")
    class_labels = [str(c) for c in doc["class_labels"]]
    if not class_labels:
        raise ParseError("class_labels must be non-empty")
    raw_trees = doc["trees"]
    if not isinstance(raw_trees, list) or not raw_trees:
        raise ParseError("trees must be a non-empty array")
    trees = [_tree_from_nodes(nodes, len(class_labels), i) for i, nodes in enumerate(raw_trees)]
    return _finish(trees, class_labels, doc["base_values"], doc["schema_version"])


def deploy_model(artifact: bytes | str, schema: FeatureSchema) -> ForestModel:
    """Parse a model file and validate it against the active schema."""
    model = parse_model(artifact)
    if tuple(model.class_labels) != tuple(schema.class_labels):
        raise SchemaMismatch(
            f"model classes {list(model.class_labels)} != schema classes {list(schema.class_labels)}"
        )
    d = len(schema.features)
    for tn, tree in enumerate(model.trees):
        used = tree.feature[tree.feature >= 0]
        if used.size and used.max() >= d:
            raise SchemaMismatch(
                f"tree {tn} references feature index {int(used.max())} but schema has {d} features"
            )
    if model.schema_version != schema.version:
        raise SchemaMismatch(
            f"model schema_version {model.schema_version} != active schema version {schema.version}"
        )
    return model


def predict(model: ForestModel, x: TransformedVector) -> Prediction:
    if x.schema_version != model.schema_version:
        raise SchemaMismatch(
            f"vector schema_version {x.schema_version} != model schema_version {model.schema_version}"
        )
    # scalar routing: far cheaper than the batch path for one row
    values = list(x.values)
    totals = [0.0] * model.n_classes
    for tree in model.trees:
        dist = tree.route_one(values)
        for c in range(len(totals)):
            totals[c] += dist[c]
    n = len(model.trees)
    probs = tuple(t / n for t in totals)
    idx = max(range(len(probs)), key=lambda c: (probs[c], -c))  # ties: lowest index
    return Prediction(
        probabilities=probs,
        predicted_class=model.class_labels[idx],
        predicted_index=idx,
    )


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 1
    feature_subsample: int | None = None  # None -> ceil(sqrt(d))
    seed: int = 0


def _gini_best_split(Xf: np.ndarray, y_idx: np.ndarray, n_classes: int, min_leaf: int):
    """Best (threshold, impurity_decrease) for one feature column, or None."""
    order = np.argsort(Xf, kind="stable")
    xs = Xf[order]
    ys = y_idx[order]
    n = len(xs)
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), ys] = 1.0
    left_counts = np.cumsum(onehot, axis=0)  # counts after taking first k+1 rows left
    total = left_counts[-1]

    # Split after position k (left = first k+1 rows). Valid only between distinct values.
    ks = np.arange(n - 1)
    valid = xs[ks] < xs[ks + 1]
    n_left = ks + 1.0
    n_right = n - n_left
    valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None

    lc = left_counts[ks]
    rc = total - lc
    gini_left = 1.0 - np.sum((lc / n_left[:, None]) ** 2, axis=1)
    gini_right = 1.0 - np.sum((rc / n_right[:, None]) ** 2, axis=1)
    parent = 1.0 - np.sum((total / n) ** 2)
    decrease = parent - (n_left / n) * gini_left - (n_right / n) * gini_right
    decrease[~valid] = -np.inf
    best = int(np.argmax(decrease))
    if not np.isfinite(decrease[best]) or decrease[best] <= 0:
        return None
    thr = (xs[best] + xs[best + 1]) / 2.0
    return float(thr), float(decrease[best])


def _grow_tree(X, y_idx, n_classes, config: TrainConfig, rng: np.random.Generator) -> list[dict]:
    d = X.shape[1]
    k = config.feature_subsample or int(np.ceil(np.sqrt(d)))
    k = min(k, d)
    nodes: list[dict] = []

    def leaf_node(idx) -> dict:
        counts = np.bincount(y_idx[idx], minlength=n_classes).astype(np.float64)
        return {"leaf": [float(v) for v in counts / counts.sum()]}

    def build(idx, depth) -> int:
        pos = len(nodes)
        nodes.append({})  # placeholder; children get higher indices
        pure = len(np.unique(y_idx[idx])) == 1
        if depth >= config.max_depth or len(idx) < 2 * config.min_leaf or pure:
            nodes[pos] = leaf_node(idx)
            return pos
        feats = rng.choice(d, size=k, replace=False)
        best = None
        for f in feats:
            found = _gini_best_split(X[idx, f], y_idx[idx], n_classes, config.min_leaf)
            if found is not None and (best is None or found[1] > best[2]):
                best = (int(f), found[0], found[1])
        if best is None:
            nodes[pos] = leaf_node(idx)
            return pos
        f, thr, _ = best
        mask = X[idx, f] <= thr
        l = build(idx[mask], depth + 1)
        r = build(idx[~mask], depth + 1)
        nodes[pos] = {"f": f, "t": thr, "l": l, "r": r}
        return pos

    build(np.arange(len(X)), 0)
    return nodes


def fit_forest(
    X: np.ndarray,
    labels: list[str] | np.ndarray,
    config: TrainConfig = TrainConfig(),
    class_labels: tuple[str, ...] | None = None,
    schema_version: int = 1,
) -> ForestModel:
    """Bagged CART with Gini splits. Fully deterministic given config.seed.

    base_values are the training class frequencies, which doubles as the
    additive baseline the attribution layer expects.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0 or len(X) == 0:
        raise EmptyData("no training samples")
    if X.ndim != 2 or X.shape[1] < 1:
        raise EmptyData("training data needs at least one feature")
    labels = [str(v) for v in labels]
    if len(labels) != len(X):
        raise EmptyData(f"{len(X)} samples but {len(labels)} labels")
    if len(X) < 2:
        raise EmptyData("need at least 2 samples")

    vocab = tuple(class_labels) if class_labels else tuple(sorted(set(labels)))
    unknown = sorted(set(labels) - set(vocab))
    if unknown:
        raise EmptyData(f"labels not in class vocabulary: {', '.join(unknown)}")
    label_to_idx = {c: i for i, c in enumerate(vocab)}
    y_idx = np.asarray([label_to_idx[v] for v in labels], dtype=np.int64)

    counts = np.bincount(y_idx, minlength=len(vocab)).astype(np.float64)
    base_values = counts / counts.sum()

    if len(np.unique(y_idx)) == 1:
        warnings.warn(
            "all training labels identical; returning a constant single-leaf model",
            DegenerateDataWarning,
            stacklevel=2,
        )
        only = np.zeros(len(vocab))
        only[y_idx[0]] = 1.0
        tree = _tree_from_nodes([{"leaf": [float(v) for v in only]}], len(vocab), 0)
        return _finish([tree], vocab, base_values, schema_version)

    rng = np.random.default_rng(config.seed)
    trees = []
    n = len(X)
    for _ in range(config.n_trees):
        boot = rng.integers(0, n, size=n)
        nodes = _grow_tree(X[boot], y_idx[boot], len(vocab), config, rng)
        trees.append(_tree_from_nodes(nodes, len(vocab), len(trees)))
    return _finish(trees, vocab, base_values, schema_version)
