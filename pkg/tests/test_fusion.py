"""
Tests for the fused network: shapes, losses, gradients for every variant,
training and prediction.
"""

import numpy as np
import pytest

from errors import ConfigurationError, DataError
from fusion import (
    PARAM_NAMES,
    VARIANTS,
    ModelConfig,
    ModelParams,
    backward,
    fit,
    forward,
    fuse,
    loss,
    loss_grad,
    model_init,
    predict,
)
from numerics import Rng, grad_check


def closure_for(config):
    def closure(tensors, windows):
        params = ModelParams.from_tensors(config, tensors)
        _, cache = forward(params, config, windows)
        labels = np.arange(windows.shape[0]) % 2 if config.task == "classify" else np.linspace(-1, 1, windows.shape[0])
        value = loss(cache.pre_activation, labels, config.task)
        grads = backward(params, config, cache, loss_grad(cache.pre_activation, labels, config.task))
        return value, grads

    return closure


def toy_windows(rng, count=64):
    labels = np.arange(count) % 2
    signs = np.where(labels == 1, 1.0, -1.0)
    windows = signs[:, None, None] * np.ones((count, 16, 3)) + 0.1 * rng.normal(size=(count, 16, 3))
    return windows, labels


class TestModelConfig:
    def test_default_bins(self):
        assert ModelConfig(window=32, features=2).spectral_bins == 16
        assert ModelConfig(window=8, features=2).spectral_bins == 5

    @pytest.mark.parametrize(
        "overrides",
        [
            {"window": 0},
            {"state_dim": 0},
            {"spectral_bins": 10},
            {"task": "cluster"},
            {"variant": "no_ssm"},
            {"dropout": 1.0},
            {"taper": "kaiser"},
            {"pooling": "max"},
        ],
    )
    def test_invalid(self, overrides):
        settings = {"window": 16, "features": 3, **overrides}
        with pytest.raises(ConfigurationError):
            ModelConfig(**settings)


class TestForward:
    def test_parameter_count(self, small_config, rng):
        assert model_init(small_config, rng).parameter_count() == 131

    def test_init_alpha_beta(self, small_config, rng):
        params = model_init(small_config, rng)
        assert float(params.alpha) == 1.0 and float(params.beta) == 1.0
        np.testing.assert_array_equal(params.head_bias, [0.0])

    def test_init_is_seeded(self, small_config):
        first = model_init(small_config, Rng(5, "init")).named_tensors()
        second = model_init(small_config, Rng(5, "init")).named_tensors()
        for name in PARAM_NAMES:
            np.testing.assert_array_equal(first[name], second[name])

    def test_single_window_gives_probability(self, small_config, small_batch, rng):
        params = model_init(small_config, rng)
        score, _ = forward(params, small_config, small_batch[0])
        assert isinstance(score, float)
        assert 0.0 < score < 1.0

    def test_batch_matches_single(self, small_config, small_batch, rng):
        params = model_init(small_config, rng)
        scores, _ = forward(params, small_config, small_batch)
        for i, window in enumerate(small_batch):
            single, _ = forward(params, small_config, window)
            assert scores[i] == pytest.approx(single, rel=1e-12)

    def test_regress_output_unbounded(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "task": "regress"})
        params = model_init(config, rng)
        params.head_weight[...] = 0.0
        params.head_bias[...] = 5.0
        scores, _ = forward(params, config, small_batch)
        assert np.all(scores > 1.0)

    def test_fuse_weighted_sum(self):
        np.testing.assert_allclose(fuse(np.array([1.0, 2.0]), np.array([3.0, 4.0]), 2.0, 0.5), [3.5, 6.0])

    def test_fuse_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            fuse(np.zeros(2), np.zeros(3), 1.0, 1.0)

    def test_no_freq_ignores_spectrum(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "variant": "no_freq"})
        params = model_init(config, rng)
        before, _ = forward(params, config, small_batch)
        params.spectral_weight[...] = 100.0
        after, _ = forward(params, config, small_batch)
        np.testing.assert_array_equal(before, after)

    def test_wrong_window_shape(self, small_config, rng):
        params = model_init(small_config, rng)
        with pytest.raises(DataError):
            forward(params, small_config, np.zeros((8, 3)))

    def test_non_finite_window(self, small_config, rng):
        params = model_init(small_config, rng)
        window = np.zeros((16, 3))
        window[3, 1] = np.inf
        with pytest.raises(DataError):
            forward(params, small_config, window)

    def test_eval_mode_ignores_dropout(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "dropout": 0.5})
        params = model_init(config, rng)
        first, _ = forward(params, config, small_batch)
        second, _ = forward(params, config, small_batch)
        np.testing.assert_array_equal(first, second)

    def test_zero_beta_ignores_spectral_projection(self, small_config, small_batch, rng):
        params = model_init(small_config, rng)
        params.beta[...] = 0.0
        before, _ = forward(params, small_config, small_batch)
        params.spectral_weight[...] = rng.normal(size=params.spectral_weight.shape) * 50.0
        params.spectral_bias[...] = 3.0
        after, _ = forward(params, small_config, small_batch)
        np.testing.assert_array_equal(before, after)

    def test_no_both_sees_only_column_means(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "variant": "no_both"})
        params = model_init(config, rng)
        scores, _ = forward(params, config, small_batch)
        shuffled, _ = forward(params, config, small_batch[:, rng.permutation(16)])
        np.testing.assert_allclose(shuffled, scores, rtol=1e-12)
        flat = np.repeat(small_batch.mean(axis=1, keepdims=True), 16, axis=1)
        constant, _ = forward(params, config, flat)
        np.testing.assert_allclose(constant, scores, rtol=1e-12)


class TestLoss:
    def test_bce_at_zero(self):
        assert loss(0.0, 1, "classify") == pytest.approx(np.log(2.0))

    def test_bce_saturated(self):
        assert loss(100.0, 1, "classify") < 1e-10
        assert np.isfinite(loss(-1000.0, 1, "classify"))
        assert loss(-1000.0, 1, "classify") == pytest.approx(1000.0)

    def test_squared_error(self):
        assert loss([1.0, 2.0], [2.0, 4.0], "regress") == pytest.approx(2.5)

    def test_grad_is_mean(self):
        np.testing.assert_allclose(loss_grad([0.0, 0.0], [1.0, 0.0], "classify"), [-0.25, 0.25])
        np.testing.assert_allclose(loss_grad([1.0, 2.0], [2.0, 4.0], "regress"), [-1.0, -2.0])

    def test_unknown_task(self):
        with pytest.raises(ConfigurationError):
            loss(0.0, 1, "rank")


class TestBackward:
    @pytest.mark.parametrize("variant", VARIANTS)
    @pytest.mark.parametrize("task", ["classify", "regress"])
    def test_matches_finite_differences(self, small_config, small_batch, variant, task):
        config = ModelConfig(**{**small_config.to_dict(), "variant": variant, "task": task})
        params = model_init(config, Rng(11, "init"))
        tensors = {name: array.copy() for name, array in params.named_tensors().items()}
        errors = grad_check(closure_for(config), tensors, small_batch[:4])
        assert max(errors.values()) < 1e-4, errors

    def test_unused_branches_get_zero(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "variant": "no_both"})
        params = model_init(config, rng)
        _, cache = forward(params, config, small_batch)
        grads = backward(params, config, cache, np.ones(small_batch.shape[0]))
        assert set(grads) == set(PARAM_NAMES)
        for name in ("ssm.B", "spectral_proj.weight", "alpha", "beta"):
            assert not np.any(grads[name])
        assert np.any(grads["residual_proj.weight"])

    def test_no_freq_alpha_gradient(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "variant": "no_freq"})
        params = model_init(config, rng)
        _, cache = forward(params, config, small_batch)
        grad_loss = rng.normal(size=small_batch.shape[0])
        grads = backward(params, config, cache, grad_loss)
        grad_z = grad_loss[:, None] * params.head_weight
        np.testing.assert_allclose(grads["alpha"], np.sum(cache.h_time * grad_z), rtol=1e-12)
        assert float(grads["beta"]) == 0.0

    def test_grad_length_mismatch(self, small_config, small_batch, rng):
        params = model_init(small_config, rng)
        _, cache = forward(params, small_config, small_batch)
        with pytest.raises(ConfigurationError):
            backward(params, small_config, cache, np.ones(2))


class TestTraining:
    def test_toy_problem_converges(self, small_config, rng):
        windows, labels = toy_windows(rng, 200)
        params = model_init(small_config, Rng(1, "init"))
        trained, trace = fit(params, small_config, windows, labels, epochs=50, rng=Rng(1, "train"))
        assert len(trace) == 50
        assert trace[-1] < 0.1 * trace[0]
        _, predicted = predict(trained, small_config, windows)
        assert np.mean(predicted == labels) >= 0.9

    def test_fit_leaves_input_untouched(self, small_config, rng):
        windows, labels = toy_windows(rng, 16)
        params = model_init(small_config, Rng(1, "init"))
        before = params.head_weight.copy()
        fit(params, small_config, windows, labels, epochs=2, rng=Rng(1, "train"))
        np.testing.assert_array_equal(params.head_weight, before)

    def test_fit_is_reproducible(self, small_config, rng):
        config = ModelConfig(**{**small_config.to_dict(), "dropout": 0.3})
        windows, labels = toy_windows(rng, 24)
        params = model_init(config, Rng(1, "init"))
        _, first = fit(params, config, windows, labels, epochs=3, batch_size=5, rng=Rng(2, "train"))
        _, second = fit(params, config, windows, labels, epochs=3, batch_size=5, rng=Rng(2, "train"))
        assert first == second

    def test_zero_epochs(self, small_config, rng):
        windows, labels = toy_windows(rng, 8)
        params = model_init(small_config, rng)
        trained, trace = fit(params, small_config, windows, labels, epochs=0, rng=rng)
        assert trace == []
        np.testing.assert_array_equal(trained.head_weight, params.head_weight)

    def test_single_class_rejected(self, small_config, rng):
        windows, _ = toy_windows(rng, 8)
        params = model_init(small_config, rng)
        with pytest.raises(DataError):
            fit(params, small_config, windows, np.zeros(8), epochs=1, rng=rng)

    def test_empty_rejected(self, small_config, rng):
        params = model_init(small_config, rng)
        with pytest.raises(DataError):
            fit(params, small_config, np.zeros((0, 16, 3)), np.zeros(0), epochs=1, rng=rng)


class TestPredict:
    def test_threshold_is_inclusive(self, small_config, small_batch, rng):
        params = model_init(small_config, rng)
        params.head_weight[...] = 0.0
        scores, labels = predict(params, small_config, small_batch)
        np.testing.assert_allclose(scores, 0.5)
        np.testing.assert_array_equal(labels, np.ones(small_batch.shape[0]))

    def test_batching_does_not_change_scores(self, small_config, rng):
        params = model_init(small_config, rng)
        windows = rng.normal(size=(10, 16, 3))
        whole, _ = predict(params, small_config, windows)
        chunked, _ = predict(params, small_config, windows, batch_size=3)
        np.testing.assert_allclose(whole, chunked, rtol=1e-12)

    def test_regress_has_no_labels(self, small_config, small_batch, rng):
        config = ModelConfig(**{**small_config.to_dict(), "task": "regress"})
        _, labels = predict(model_init(config, rng), config, small_batch)
        assert labels is None

    def test_matches_training_forward_without_dropout(self, small_config, small_batch, rng):
        params = model_init(small_config, rng)
        scores, _ = predict(params, small_config, small_batch)
        trained_mode, _ = forward(params, small_config, small_batch, rng=Rng(3, "dropout"), training=True)
        np.testing.assert_allclose(scores, trained_mode, rtol=1e-12)
