import numpy as np
import pytest

from sentinel.attribution import LimeConfig, lime_explain
from sentinel.attribution.background import BackgroundSet
from sentinel.errors import SingularFit

from helpers import ConstantModel, LinearProbModel, weighted_ridge_oracle

# Injected 6-point perturbation fixture; expected values computed with the
# closed-form (X^T W X + lam I)^-1 X^T W y oracle and frozen here.
FIXED_Z = np.array(
    [[2.0, 1.0], [2.5, 1.2], [1.5, 0.8], [2.2, 1.4], [1.8, 0.6], [2.1, 1.1]]
)
FIXED_BG = np.array([[0.0, 0.0], [2.0, 1.0], [4.0, 3.0], [1.0, 2.0]])
FIXED_X = np.array([2.0, 1.0])
FIXED_CONFIG = LimeConfig(n_perturbations=6, kernel_width=1.5, ridge_lambda=0.7, seed=9)
FROZEN_COEF = (0.016932243086459825, 0.0075934021538412826)
FROZEN_INTERCEPT = 0.6089832402267069


@pytest.fixture
def linear_model():
    return LinearProbModel([0.1, -0.05], b=0.5)


def test_injected_perturbations_match_frozen_closed_form(linear_model):
    res = lime_explain(
        linear_model, FIXED_X, FIXED_BG, class_index=1,
        config=FIXED_CONFIG, perturbations=FIXED_Z,
    )
    assert res.coefficients == pytest.approx(FROZEN_COEF, abs=1e-9)
    assert res.intercept == pytest.approx(FROZEN_INTERCEPT, abs=1e-9)
    assert res.n_perturbations == 6
    assert res.ridge_lambda == 0.7 and res.kernel_width == 1.5


def test_oracle_agrees_with_frozen_values(linear_model):
    y = linear_model.predict_proba(FIXED_Z)[:, 1]
    std = FIXED_BG.std(axis=0)
    mean = FIXED_BG.mean(axis=0)
    safe = np.where(std > 0, std, 1.0)
    w = np.exp(-np.sum(((FIXED_Z - FIXED_X) / safe) ** 2, axis=1) / 1.5**2)
    coef, intercept = weighted_ridge_oracle(FIXED_Z, y, w, 0.7, mean, std)
    assert coef == pytest.approx(FROZEN_COEF, abs=1e-12)
    assert intercept == pytest.approx(FROZEN_INTERCEPT, abs=1e-12)


def test_driver_feature_ranks_first():
    # class-1 probability is 0.1*x0 + 0.5 locally; other features irrelevant
    model = LinearProbModel([0.1, 0.0, 0.0, 0.0], b=0.5)
    bg = np.random.default_rng(5).normal(0, 1, size=(50, 4))
    x = np.zeros(4)
    res = lime_explain(model, x, bg, class_index=1, config=LimeConfig(n_perturbations=400, seed=2))
    coefs = np.abs(res.coefficients)
    assert np.argmax(coefs) == 0
    assert res.coefficients[0] > 0


def test_driver_ranks_first_across_seeds():
    model = LinearProbModel([0.1, 0.0, 0.0], b=0.5)
    bg = np.random.default_rng(8).normal(0, 1, size=(40, 3))
    x = np.zeros(3)
    wins = sum(
        int(np.argmax(np.abs(lime_explain(
            model, x, bg, 1, config=LimeConfig(n_perturbations=200, seed=s)
        ).coefficients)) == 0)
        for s in range(20)
    )
    assert wins >= 19


def test_constant_model_zero_coefficients():
    model = ConstantModel([0.4, 0.6])
    bg = np.random.default_rng(0).normal(0, 1, size=(20, 3))
    res = lime_explain(model, np.zeros(3), bg, class_index=1,
                       config=LimeConfig(n_perturbations=50, seed=1))
    assert np.max(np.abs(res.coefficients)) <= 1e-9
    assert res.intercept == pytest.approx(0.6, abs=1e-9)
    assert res.surrogate_r2 == 1.0  # constant target; intercept-only fit is exact


def test_deterministic_given_seed(linear_model):
    bg = np.random.default_rng(1).normal(0, 1, size=(30, 2))
    cfg = LimeConfig(n_perturbations=64, seed=7)
    a = lime_explain(linear_model, FIXED_X, bg, 1, config=cfg)
    b = lime_explain(linear_model, FIXED_X, bg, 1, config=cfg)
    assert a == b
    c = lime_explain(linear_model, FIXED_X, bg, 1, config=LimeConfig(n_perturbations=64, seed=8))
    assert a.coefficients != c.coefficients


def test_r2_bounds_and_linear_fit_quality(linear_model):
    bg = BackgroundSet(
        vectors=np.random.default_rng(2).normal(2.0, 0.5, size=(40, 2)), schema_version=1
    )
    res = lime_explain(linear_model, FIXED_X, bg, 1, config=LimeConfig(n_perturbations=300, seed=0))
    assert 0.0 <= res.surrogate_r2 <= 1.0
    assert res.surrogate_r2 > 0.95  # genuinely linear locally


def test_kernel_width_default_recorded():
    model = ConstantModel([1.0, 0.0])
    bg = np.ones((3, 4))
    res = lime_explain(model, np.ones(4), bg, 0, config=LimeConfig(n_perturbations=10, seed=0))
    assert res.kernel_width == pytest.approx(0.75 * 2.0)


def test_requires_enough_perturbations():
    model = ConstantModel([1.0])
    with pytest.raises(ValueError, match="d \\+ 2"):
        lime_explain(model, np.zeros(4), np.ones((2, 4)), 0,
                     config=LimeConfig(n_perturbations=5, seed=0))


def test_singular_fit_when_unregularized():
    model = ConstantModel([0.5, 0.5])
    z = np.tile([[1.0, 2.0, 3.0]], (6, 1))  # rank-deficient design
    with pytest.raises(SingularFit):
        lime_explain(
            model, np.array([1.0, 2.0, 3.0]), np.ones((2, 3)), 0,
            config=LimeConfig(n_perturbations=6, ridge_lambda=0.0, seed=0),
            perturbations=z,
        )


def test_discrete_features_stay_on_observed_values():
    model = ConstantModel([0.5, 0.5])
    bg = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    x = np.array([1.0, 0.0])
    cfg = LimeConfig(n_perturbations=100, seed=4)
    rng = np.random.default_rng(cfg.seed)
    from sentinel.attribution.lime import _perturb

    Z = _perturb(rng, x, bg, bg.std(axis=0), cfg.n_perturbations, discrete=(0, 1))
    assert set(np.unique(Z[:, 0])) <= {0.0, 1.0}
    assert set(np.unique(Z[:, 1])) <= {0.0, 1.0}
