"""Local surrogate explanations: weighted ridge fit on Gaussian perturbations.

The surrogate approximates the classifier's predicted-class probability in a
neighborhood of one instance; kernel width controls how local that
neighborhood is. Coefficients are reported in original feature units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import SingularFit
from .background import BackgroundSet
from .shapley import ProbModel, _bg_matrix


@dataclass(frozen=True)
class LimeConfig:
    n_perturbations: int = 500
    kernel_width: float | None = None  # None -> 0.75 * sqrt(d)
    ridge_lambda: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class LimeResult:
    coefficients: tuple[float, ...]
    intercept: float
    kernel_width: float
    n_perturbations: int
    seed: int
    surrogate_r2: float
    ridge_lambda: float


def _perturb(
    rng: np.random.Generator,
    x: np.ndarray,
    bg: np.ndarray,
    std: np.ndarray,
    n: int,
    discrete: tuple[int, ...],
) -> np.ndarray:
    Z = x[None, :] + rng.normal(0.0, 1.0, size=(n, x.size)) * std[None, :]
    # discrete features: keep x or resample from the background marginal, 50/50
    for j in sorted(discrete):
        Z[:, j] = x[j]
        flip = rng.random(n) < 0.5
        k = int(flip.sum())
        if k:
            Z[flip, j] = bg[rng.integers(0, len(bg), size=k), j]
    return Z


def lime_explain(
    model: ProbModel,
    x: np.ndarray,
    background: BackgroundSet | np.ndarray,
    class_index: int,
    config: LimeConfig = LimeConfig(),
    discrete_features: tuple[int, ...] = (),
    perturbations: np.ndarray | None = None,
) -> LimeResult:
    """Fit the weighted ridge surrogate around x.

    `perturbations` is a test seam: when given, the sample is used verbatim
    and no randomness is consumed.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    bg = _bg_matrix(background)
    kernel_width = config.kernel_width if config.kernel_width is not None else 0.75 * math.sqrt(d)
    if kernel_width <= 0:
        raise ValueError("kernel_width must be > 0")

    mean = bg.mean(axis=0)
    std = bg.std(axis=0)
    safe_std = np.where(std > 0, std, 1.0)

    if perturbations is not None:
        Z = np.asarray(perturbations, dtype=np.float64)
        if Z.ndim != 2 or Z.shape[1] != d:
            raise ValueError(f"perturbations must be (n, {d})")
    else:
        if config.n_perturbations < d + 2:
            raise ValueError(f"need at least d + 2 = {d + 2} perturbations")
        rng = np.random.default_rng(config.seed)
        Z = _perturb(rng, x, bg, std, config.n_perturbations, discrete_features)

    y = model.predict_proba(Z)[:, class_index]
    dist_sq = np.sum(((Z - x[None, :]) / safe_std[None, :]) ** 2, axis=1)
    w = np.exp(-dist_sq / kernel_width**2)

    # standardized design with unpenalized intercept column
    Xs = (Z - mean[None, :]) / safe_std[None, :]
    A = np.hstack([Xs, np.ones((len(Z), 1))])
    penalty = np.eye(d + 1) * config.ridge_lambda
    penalty[d, d] = 0.0
    lhs = A.T @ (A * w[:, None]) + penalty
    rhs = A.T @ (w * y)
    try:
        beta = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        raise SingularFit(
            "weighted design matrix is rank-deficient and ridge_lambda is 0"
        ) from None

    coef = beta[:d] / safe_std
    intercept = float(beta[d] - np.sum(beta[:d] * mean / safe_std))

    y_hat = A @ beta
    w_sum = w.sum()
    if w_sum > 0:
        y_bar = float(np.sum(w * y) / w_sum)
        ss_tot = float(np.sum(w * (y - y_bar) ** 2))
        ss_res = float(np.sum(w * (y - y_hat) ** 2))
        # a numerically-zero ss_tot means a constant target: intercept-only is exact
        r2 = 1.0 if ss_tot <= 1e-18 else 1.0 - ss_res / ss_tot
    else:
        r2 = 0.0
    r2 = min(1.0, max(0.0, r2))

    return LimeResult(
        coefficients=tuple(float(c) for c in coef),
        intercept=intercept,
        kernel_width=float(kernel_width),
        n_perturbations=len(Z),
        seed=config.seed,
        surrogate_r2=r2,
        ridge_lambda=config.ridge_lambda,
    )
