import warnings

import numpy as np
import pytest

from helpers import random_rulebase
from svrfuzzy import (
    Dataset,
    DegenerateModelError,
    ExtractionConfig,
    GaussianMF,
    InferenceMode,
    infer_batch,
    interpretability_test,
    make_rulebase,
    max_pairwise_similarity,
    model_extraction,
    rmse,
    similarity_gaussian,
    training_error,
)

SIN_FROZEN_RULE_COUNT = 11  # regression value from the first verified run


def sin_dataset(n=50):
    x = np.linspace(0.0, 2.0 * np.pi, n)[:, None]
    return Dataset(x, np.sin(x).ravel())


def test_training_error_basics():
    data = Dataset(np.array([[0.0], [1.0]]), np.array([2.0, 2.0]))
    assert training_error(lambda X: np.full(X.shape[0], 2.0), data) == 0.0
    assert training_error(lambda X: np.zeros(X.shape[0]), data) == 4.0


def test_training_error_is_squared_rmse():
    rng = np.random.default_rng(30)
    data = Dataset(rng.uniform(-1, 1, (10, 2)), rng.uniform(-1, 1, 10))
    preds = rng.uniform(-1, 1, 10)
    err = training_error(lambda X: preds, data)
    assert np.sqrt(err) == pytest.approx(rmse(preds, data.y), abs=1e-15)


def test_interpretability_noop_below_threshold():
    rb = make_rulebase([[0.0], [5.0]], [[1.0], [1.0]], [1.0, -1.0], InferenceMode.ADDITIVE)
    out = interpretability_test(rb, 0.5)
    assert out == rb


def test_interpretability_fuses_identical_antecedents():
    rb = make_rulebase([[0.7], [0.7]], [[1.1], [1.1]], [1.0, 2.0], InferenceMode.ADDITIVE)
    for k in (0.1, 0.5, 0.9):
        out = interpretability_test(rb, k)
        assert out.n_rules == 1
        assert out.rules[0].consequent == 3.0
        assert out.rules[0].antecedents[0] == GaussianMF(0.7, 1.1)


def test_interpretability_three_rule_example():
    rb = make_rulebase([[0.0], [0.1], [5.0]], [[1.0], [1.0], [1.0]], [1.0, 2.0, 3.0], InferenceMode.ADDITIVE)
    k = similarity_gaussian(GaussianMF(0.0, 1.0), GaussianMF(1.0, 1.0))  # S at one-sigma distance
    assert similarity_gaussian(GaussianMF(0.0, 1.0), GaussianMF(0.1, 1.0)) > 0.9
    out = interpretability_test(rb, k)
    assert out.n_rules == 2
    centers = sorted(r.antecedents[0].center for r in out.rules)
    assert centers[1] == 5.0  # the distant rule survives untouched
    assert max_pairwise_similarity(out) <= k


def test_interpretability_bound_and_monotonicity():
    rng = np.random.default_rng(31)
    for _ in range(25):
        rb = random_rulebase(rng, max_rules=6, max_dim=2)
        for k in (0.3, 0.5, 0.8):
            out = interpretability_test(rb, k)
            assert out.n_rules <= rb.n_rules
            assert max_pairwise_similarity(out) <= k + 1e-12


def test_interpretability_idempotent_and_deterministic():
    rng = np.random.default_rng(32)
    for _ in range(10):
        rb = random_rulebase(rng, max_rules=6, max_dim=2)
        once = interpretability_test(rb, 0.4)
        twice = interpretability_test(once, 0.4)
        assert twice == once
        again = interpretability_test(rb, 0.4)
        assert again == once


def test_model_extraction_single_point():
    data = Dataset(np.array([[0.0]]), np.array([0.7]))
    cfg = ExtractionConfig(C=5.0, epsilon_init=0.1, sigma_init=1.0, epsilon_step=0.1, tol=0.5, k=0.5)
    model = model_extraction(data, cfg)
    assert len(model.report.iterations) == 1
    assert model.report.merges_performed == 0
    assert model.report.final_rule_count == 1
    assert model.report.converged
    assert model.rulebase.mode is InferenceMode.NORMALIZED


def test_model_extraction_sin_pipeline():
    data = sin_dataset()
    cfg = ExtractionConfig(C=10.0, epsilon_init=0.01, sigma_init=0.6, epsilon_step=0.02, tol=1e-2, k=0.8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = model_extraction(data, cfg)
    report = model.report
    assert report.converged
    assert np.sqrt(report.final_training_error) <= 0.1
    assert max_pairwise_similarity(model.rulebase) <= 0.8
    assert report.final_rule_count == SIN_FROZEN_RULE_COUNT
    # recorded trace is the raw sweep
    assert report.iterations[0].epsilon == pytest.approx(0.01)
    assert all(r.sv_count > 0 for r in report.iterations)


def test_model_extraction_error_equals_rulebase_mse():
    data = sin_dataset()
    cfg = ExtractionConfig(C=10.0, epsilon_init=0.01, sigma_init=0.6, epsilon_step=0.02, tol=1e-2, k=0.8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = model_extraction(data, cfg)
    direct = training_error(lambda X: infer_batch(model.rulebase, X), data)
    assert model.report.final_training_error == pytest.approx(direct, abs=1e-15)


def test_model_extraction_degenerate():
    data = Dataset(np.array([[0.0], [1.0], [2.0]]), np.zeros(3))
    cfg = ExtractionConfig(C=1.0, epsilon_init=0.1, sigma_init=1.0, epsilon_step=0.1, tol=1e-3, k=0.5)
    with pytest.raises(DegenerateModelError, match="increase C or decrease epsilon"):
        model_extraction(data, cfg)


def test_model_extraction_unreachable_tolerance_flags_best():
    data = sin_dataset(30)
    cfg = ExtractionConfig(
        C=10.0, epsilon_init=0.05, sigma_init=0.6, epsilon_step=0.05, tol=1e-12, k=0.8, max_outer_iterations=6
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = model_extraction(data, cfg)
    assert not model.report.converged
    assert len(model.report.iterations) == 6
    best = min(r.error for r in model.report.iterations)
    assert model.report.final_training_error <= best + 1e-12 or model.report.final_training_error == pytest.approx(best)


def test_model_extraction_deterministic():
    data = sin_dataset(40)
    cfg = ExtractionConfig(C=10.0, epsilon_init=0.02, sigma_init=0.6, epsilon_step=0.02, tol=1e-2, k=0.7, refine_epochs=5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = model_extraction(data, cfg)
        b = model_extraction(data, cfg)
    assert a.rulebase == b.rulebase
    assert a.report == b.report


def test_internal_refinement_runs_and_keeps_bound():
    data = sin_dataset(40)
    base_cfg = dict(C=10.0, epsilon_init=0.02, sigma_init=0.6, epsilon_step=0.02, tol=1e-2, k=0.7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plain = model_extraction(data, ExtractionConfig(**base_cfg))
        refined = model_extraction(data, ExtractionConfig(**base_cfg, refine_epochs=20, delta=0.01))
    assert refined.report.final_training_error < plain.report.final_training_error
    assert max_pairwise_similarity(refined.rulebase) <= 0.7 + 1e-12


def test_extraction_config_validation():
    good = dict(C=1.0, epsilon_init=0.1, sigma_init=1.0, epsilon_step=0.1, tol=1e-3, k=0.5)
    ExtractionConfig(**good)
    for key, bad in [("C", 0.0), ("epsilon_init", -1.0), ("sigma_init", 0.0), ("epsilon_step", 0.0),
                     ("tol", 0.0), ("k", 0.0), ("k", 1.0)]:
        with pytest.raises(ValueError):
            ExtractionConfig(**{**good, key: bad})
