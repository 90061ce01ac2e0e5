"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's vectorized code paths:
naive powerset enumeration for Shapley, a direct matrix formula for the
weighted ridge, and a literal threshold rule for blob accuracy. They are
the reference the implementation is checked against.
"""

from __future__ import annotations

import json
from itertools import chain, combinations
from math import factorial

import numpy as np

from sentinel.forest import ForestModel, parse_model

# Table-derived 21-feature list (dataset spellings preserved, e.g. "Magnitue";
# "Protocol Type" is treated as a single feature).
TABLE1_FEATURES = [
    "Header_Length",
    "DNS",
    "syn_flag_number",
    "Rate",
    "ece_flag_number",
    "Protocol Type",
    "Number",
    "ICMP",
    "Weight",
    "fin_count",
    "psh_flag_number",
    "Srate",
    "fin_flag_number",
    "syn_count",
    "Drate",
    "ack_count",
    "rst_flag_number",
    "HTTPS",
    "HTTP",
    "Magnitue",
    "AVG",
]

ATTACK_CLASSES = [
    "Benign",
    "DDoS-ICMP_Flood",
    "DDoS-UDP_Flood",
    "DDoS-TCP_Flood",
    "DDoS-PSHACK_Flood",
    "DDoS-SYN_Flood",
    "DDoS-RSTFINFlood",
    "DDoS-SynonymousIP_Flood",
    "DoS-UDP_Flood",
    "DoS-TCP_Flood",
]


def table1_schema_doc() -> dict:
    return {
        "features": [{"name": n, "kind": "numeric"} for n in TABLE1_FEATURES],
        "class_labels": ATTACK_CLASSES,
    }


def model_from_trees(
    trees_nodes: list[list[dict]],
    class_labels: list[str],
    base_values: list[float] | None = None,
    schema_version: int = 1,
) -> ForestModel:
    """Build a model through the public file format (parse path included)."""
    if base_values is None:
        base_values = [1.0 / len(class_labels)] * len(class_labels)
    doc = {
        "format_version": 1,
        "schema_version": schema_version,
        "class_labels": class_labels,
        "base_values": base_values,
        "trees": trees_nodes,
    }
    return parse_model(json.dumps(doc))


def leaf(*dist: float) -> dict:
    return {"leaf": list(dist)}


def split(f: int, t: float, l: int, r: int) -> dict:
    return {"f": f, "t": t, "l": l, "r": r}


def random_model(rng: np.random.Generator, d: int, n_classes: int = 2,
                 n_trees: int = 2, max_depth: int = 3) -> ForestModel:
    """Random well-formed forest for property tests."""

    def random_nodes() -> list[dict]:
        nodes: list[dict] = []

        def grow(depth: int) -> int:
            pos = len(nodes)
            nodes.append({})
            if depth >= max_depth or rng.random() < 0.3:
                dist = rng.dirichlet(np.ones(n_classes))
                nodes[pos] = {"leaf": [float(v) for v in dist]}
                return pos
            f = int(rng.integers(0, d))
            t = float(np.round(rng.uniform(-1, 1), 6))
            l = grow(depth + 1)
            r = grow(depth + 1)
            nodes[pos] = {"f": f, "t": t, "l": l, "r": r}
            return pos

        grow(0)
        return nodes

    labels = [f"c{i}" for i in range(n_classes)]
    base = rng.dirichlet(np.ones(n_classes))
    return model_from_trees([random_nodes() for _ in range(n_trees)], labels, [float(v) for v in base])


class LinearProbModel:
    """Two-class model whose class-1 probability is clip(w.x + b, 0, 1)."""

    def __init__(self, w, b: float = 0.0):
        self.w = np.asarray(w, dtype=np.float64)
        self.b = b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        p1 = np.clip(X @ self.w + self.b, 0.0, 1.0)
        return np.column_stack([1.0 - p1, p1])


class ConstantModel:
    def __init__(self, dist):
        self.dist = np.asarray(dist, dtype=np.float64)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.tile(self.dist, (len(np.atleast_2d(X)), 1))


def powerset(items):
    items = list(items)
    return chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))


def shapley_oracle(model, x, background, class_index: int) -> np.ndarray:
    """Naive interventional Shapley: per-feature powerset loop, scalar math."""
    x = np.asarray(x, dtype=np.float64)
    background = np.asarray(background, dtype=np.float64)
    d = len(x)

    def value(subset: tuple[int, ...]) -> float:
        total = 0.0
        for b in background:
            z = b.copy()
            for i in subset:
                z[i] = x[i]
            total += float(model.predict_proba(z[None, :])[0, class_index])
        return total / len(background)

    phi = np.zeros(d)
    for i in range(d):
        others = [j for j in range(d) if j != i]
        for subset in powerset(others):
            weight = factorial(len(subset)) * factorial(d - len(subset) - 1) / factorial(d)
            phi[i] += weight * (value(subset + (i,)) - value(tuple(subset)))
    return phi


def weighted_ridge_oracle(Z, y, w, lam: float, mean, std):
    """Closed-form (X^T W X + lam I)^-1 X^T W y on standardized features,
    intercept unpenalized, coefficients mapped back to raw units."""
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    std = np.where(np.asarray(std) > 0, std, 1.0)
    Xs = (Z - mean) / std
    n, d = Xs.shape
    A = np.hstack([Xs, np.ones((n, 1))])
    W = np.diag(w)
    reg = lam * np.eye(d + 1)
    reg[d, d] = 0.0
    beta = np.linalg.inv(A.T @ W @ A + reg) @ (A.T @ W @ y)
    coef = beta[:d] / std
    intercept = beta[d] - float(np.sum(beta[:d] * np.asarray(mean) / std))
    return coef, intercept


def two_blob_data(n: int, d: int = 6, seed: int = 7, separation: float = 10.0):
    """Two spherical Gaussian blobs separated along every axis.

    The linear-threshold oracle (feature 0 vs the midpoint) classifies this
    perfectly, so any reasonable forest must too.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(0.0, 1.0, size=(half, d))
    b = rng.normal(separation, 1.0, size=(n - half, d))
    X = np.vstack([a, b])
    labels = np.array(["Benign"] * half + ["DoS-TCP_Flood"] * (n - half))
    order = rng.permutation(n)
    return X[order], labels[order]


def threshold_oracle_accuracy(X, labels, midpoint: float = 5.0) -> float:
    predicted = np.where(X[:, 0] <= midpoint, "Benign", "DoS-TCP_Flood")
    return float(np.mean(predicted == np.asarray(labels)))
