"""Interventional Shapley values: exact coalition enumeration and a
permutation-sampling estimator.

Coalition value v(S) is the mean, over background vectors b, of the model
output with features in S taken from x and the rest from b. Both routes
return attributions for one class and satisfy local accuracy:
base_value + sum(phi) == model output at x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..errors import EmptyBackground, TooManyFeatures
from .background import BackgroundSet

EXACT_FEATURE_GUARD = 20
_EVAL_CHUNK_ROWS = 1 << 18


class ProbModel(Protocol):
    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ShapResult:
    phi: tuple[float, ...]
    base_value: float
    predicted_output: float
    method: str  # "exact" | "sampled"
    n_samples: int = 0
    seed: int = 0
    repair: float = 0.0  # additivity residual folded back into phi (sampled only)

    def local_accuracy_error(self) -> float:
        return abs(self.base_value + math.fsum(self.phi) - self.predicted_output)


def _bg_matrix(background: BackgroundSet | np.ndarray) -> np.ndarray:
    vectors = getattr(background, "vectors", background)
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or len(vectors) == 0:
        raise EmptyBackground("background set must hold at least one vector")
    return vectors


def _coalition_values(
    model: ProbModel, x: np.ndarray, bg: np.ndarray, class_index: int, masks: np.ndarray
) -> np.ndarray:
    """v(S) for every mask row: mean over background of f(x_S, b_rest)."""
    n_bg = len(bg)
    chunk = max(1, _EVAL_CHUNK_ROWS // n_bg)
    out = np.empty(len(masks), dtype=np.float64)
    for start in range(0, len(masks), chunk):
        m = masks[start : start + chunk]
        composite = np.where(m[:, None, :], x[None, None, :], bg[None, :, :])
        probs = model.predict_proba(composite.reshape(-1, x.size))[:, class_index]
        out[start : start + chunk] = probs.reshape(len(m), n_bg).mean(axis=1)
    return out


def shapley_exact(
    model: ProbModel,
    x: np.ndarray,
    background: BackgroundSet | np.ndarray,
    class_index: int,
) -> ShapResult:
    """Exact Shapley weighting over all 2^d coalitions."""
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    if d > EXACT_FEATURE_GUARD:
        raise TooManyFeatures(f"exact enumeration capped at {EXACT_FEATURE_GUARD} features, got {d}")
    bg = _bg_matrix(background)

    subset_ids = np.arange(1 << d, dtype=np.int64)
    bits = (subset_ids[:, None] >> np.arange(d)) & 1
    masks = bits.astype(bool)
    v = _coalition_values(model, x, bg, class_index, masks)

    sizes = bits.sum(axis=1)
    fact = [math.factorial(k) for k in range(d + 1)]
    weight_by_size = np.array(
        [fact[k] * fact[d - k - 1] / fact[d] for k in range(d)], dtype=np.float64
    )

    phi = np.zeros(d, dtype=np.float64)
    for i in range(d):
        without = subset_ids[bits[:, i] == 0]
        with_i = without | (1 << i)
        w = weight_by_size[sizes[without]]
        phi[i] = float(np.sum(w * (v[with_i] - v[without])))

    predicted = float(model.predict_proba(x[None, :])[0, class_index])
    return ShapResult(
        phi=tuple(float(p) for p in phi),
        base_value=float(v[0]),
        predicted_output=predicted,
        method="exact",
    )


def shapley_sampled(
    model: ProbModel,
    x: np.ndarray,
    background: BackgroundSet | np.ndarray,
    class_index: int,
    n_samples: int = 2000,
    seed: int = 0,
) -> ShapResult:
    """Permutation-sampling estimator with exact additivity repair.

    Each sample draws a feature permutation and one background vector, then
    accumulates marginal contributions as features flip background -> x in
    permutation order. The Monte-Carlo residual is redistributed over phi
    proportionally to |phi| so local accuracy holds exactly.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    bg = _bg_matrix(background)

    rng = np.random.default_rng(seed)
    perms = rng.permuted(np.tile(np.arange(d), (n_samples, 1)), axis=1)
    bg_rows = bg[rng.integers(0, len(bg), size=n_samples)]

    # prefix membership: feature k is already flipped to x at step j iff its
    # position in the permutation is < j
    inv = np.argsort(perms, axis=1)
    member = inv[:, None, :] < np.arange(d + 1)[None, :, None]  # (n, d+1, d)
    Z = np.where(member, x[None, None, :], bg_rows[:, None, :]).reshape(-1, d)
    vals = model.predict_proba(Z)[:, class_index].reshape(n_samples, d + 1)
    marginals = vals[:, 1:] - vals[:, :-1]  # step j flips feature perms[:, j]

    phi = np.zeros(d, dtype=np.float64)
    np.add.at(phi, perms.ravel(), marginals.ravel())
    phi /= n_samples

    base_value = float(model.predict_proba(bg)[:, class_index].mean())
    predicted = float(model.predict_proba(x[None, :])[0, class_index])

    residual = predicted - base_value - float(phi.sum())
    magnitude = np.abs(phi).sum()
    if magnitude > 0:
        phi += residual * np.abs(phi) / magnitude
    else:
        phi += residual / d

    return ShapResult(
        phi=tuple(float(p) for p in phi),
        base_value=base_value,
        predicted_output=predicted,
        method="sampled",
        n_samples=n_samples,
        seed=seed,
        repair=residual,
    )
