"""
Tests for the numerics package: affine layer, Adam, dropout, random streams
and the gradient checker.
"""

import numpy as np
import pytest

from errors import ConfigurationError, DataError, NumericFailure
from numerics import (
    AdamState,
    Rng,
    adam_step,
    as_tensor,
    dropout,
    ensure_finite,
    grad_check,
    linear_backward,
    linear_forward,
    uniform_fan,
)


class TestTensor:
    def test_as_tensor_rejects_nan(self):
        with pytest.raises(DataError):
            as_tensor([1.0, float("nan")])

    def test_ensure_finite_names_stage(self):
        with pytest.raises(NumericFailure, match=r"\[forward:ssm\]"):
            ensure_finite(np.array([np.inf]), "forward:ssm")

    def test_uniform_fan_bound(self, rng):
        values = uniform_fan(rng, (50, 50), 10, 14)
        assert np.all(np.abs(values) <= np.sqrt(6.0 / 24.0))

    def test_uniform_fan_rejects_zero_fan(self, rng):
        with pytest.raises(ConfigurationError):
            uniform_fan(rng, (1, 1), 0, 1)


class TestLinear:
    def test_forward_single(self):
        w = np.array([[1.0, 2.0], [0.0, -1.0]])
        b = np.array([0.5, 1.0])
        out, _ = linear_forward(w, b, np.array([1.0, 1.0]))
        np.testing.assert_allclose(out, [3.5, 0.0])

    def test_forward_batch_matches_single(self, rng):
        w, b = rng.normal(size=(3, 4)), rng.normal(size=3)
        x = rng.normal(size=(5, 4))
        out, _ = linear_forward(w, b, x)
        for i in range(5):
            single, _ = linear_forward(w, b, x[i])
            np.testing.assert_allclose(out[i], single)

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            linear_forward(np.zeros((2, 3)), np.zeros(2), np.zeros(4))

    def test_backward_sums_over_batch(self, rng):
        w, b = rng.normal(size=(2, 3)), rng.normal(size=2)
        x = rng.normal(size=(4, 3))
        _, cache = linear_forward(w, b, x)
        grad_out = np.ones((4, 2))
        gw, gb, gx = linear_backward(cache, grad_out)
        np.testing.assert_allclose(gw, np.tile(x.sum(axis=0), (2, 1)))
        np.testing.assert_allclose(gb, [4.0, 4.0])
        np.testing.assert_allclose(gx, np.tile(w.sum(axis=0), (4, 1)))


class TestAdam:
    def test_first_step_moves_by_lr(self):
        state = AdamState.zeros_like(np.zeros(3), lr=0.1)
        param, state = adam_step(state, np.zeros(3), np.array([1.0, -2.0, 0.5]))
        # bias-corrected first step is lr * sign(grad)
        np.testing.assert_allclose(param, [-0.1, 0.1, -0.1], atol=1e-6)
        assert state.t == 1

    def test_inputs_not_modified(self):
        state = AdamState.zeros_like(np.ones(2))
        original = np.ones(2)
        adam_step(state, original, np.ones(2))
        np.testing.assert_array_equal(original, [1.0, 1.0])
        assert state.t == 0

    def test_minimizes_quadratic(self):
        param = np.array([5.0, -3.0])
        state = AdamState.zeros_like(param, lr=0.1)
        for _ in range(500):
            param, state = adam_step(state, param, 2.0 * param)
        assert np.all(np.abs(param) < 0.3)

    def test_non_finite_gradient(self):
        state = AdamState.zeros_like(np.zeros(1))
        with pytest.raises(NumericFailure):
            adam_step(state, np.zeros(1), np.array([np.nan]))

    def test_shape_mismatch(self):
        state = AdamState.zeros_like(np.zeros(2))
        with pytest.raises(ConfigurationError):
            adam_step(state, np.zeros(2), np.zeros(3))

    def test_zero_gradient_leaves_param(self):
        param = np.array([1.5, -2.0])
        state = AdamState.zeros_like(param)
        updated, state = adam_step(state, param, np.zeros(2))
        np.testing.assert_array_equal(updated, param)
        assert state.t == 1

    def test_exact_first_step_at_default_lr(self):
        state = AdamState.zeros_like(np.zeros(1))
        param, _ = adam_step(state, np.zeros(1), np.ones(1))
        np.testing.assert_allclose(param, [-0.001 / (1.0 + 1e-8)], rtol=1e-12)

    def test_three_steps_match_recursion(self):
        grads = [np.array([0.5, -1.0]), np.array([2.0, 0.25]), np.array([-0.75, 1.5])]
        lr, b1, b2, eps = 0.01, 0.9, 0.999, 1e-8
        expected = np.array([1.0, -1.0])
        m = np.zeros(2)
        v = np.zeros(2)
        for t, g in enumerate(grads, start=1):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g ** 2
            m_hat = m / (1 - b1 ** t)
            v_hat = v / (1 - b2 ** t)
            expected = expected - lr * m_hat / (np.sqrt(v_hat) + eps)

        param = np.array([1.0, -1.0])
        state = AdamState.zeros_like(param, lr=lr)
        for g in grads:
            param, state = adam_step(state, param, g)
        np.testing.assert_allclose(param, expected, rtol=1e-12)
        assert state.t == 3


class TestDropout:
    def test_eval_is_identity(self, rng):
        x = rng.normal(size=10)
        out, mask = dropout(x, 0.5, rng, training=False)
        np.testing.assert_array_equal(out, x)
        np.testing.assert_array_equal(mask, np.ones(10))

    def test_train_scales_kept(self, rng):
        x = np.ones(1000)
        out, mask = dropout(x, 0.25, rng, training=True)
        kept = out[out != 0]
        np.testing.assert_allclose(kept, 1.0 / 0.75)
        assert 0.15 < np.mean(out == 0) < 0.35
        np.testing.assert_allclose(out, x * mask)

    def test_rate_zero_keeps_everything(self, rng):
        x = np.arange(5.0)
        out, _ = dropout(x, 0.0, rng, training=True)
        np.testing.assert_array_equal(out, x)

    @pytest.mark.parametrize("rate", [-0.1, 1.0])
    def test_rate_out_of_range(self, rng, rate):
        with pytest.raises(ConfigurationError):
            dropout(np.ones(2), rate, rng, training=True)

    def test_expectation_is_preserved(self, rng):
        out, _ = dropout(np.ones(100_000), 0.3, rng, training=True)
        assert 0.98 <= out.mean() <= 1.02


class TestRng:
    def test_same_seed_same_draws(self):
        np.testing.assert_array_equal(Rng(3, "a").random(5), Rng(3, "a").random(5))

    def test_purposes_are_independent(self):
        assert not np.array_equal(Rng(3, "a").random(5), Rng(3, "b").random(5))

    def test_derive_does_not_disturb_parent(self):
        plain = Rng(9, "root")
        expected = plain.random(3)
        parent = Rng(9, "root")
        parent.derive("child").random(100)
        np.testing.assert_array_equal(parent.random(3), expected)


class TestGradCheck:
    def test_quadratic_passes(self):
        def closure(params, inputs):
            w = params["w"]
            return float(np.sum((w * inputs) ** 2)), {"w": 2.0 * w * inputs ** 2}

        params = {"w": np.array([0.3, -1.2, 2.0])}
        errors = grad_check(closure, params, np.array([1.0, 2.0, 0.5]))
        assert errors["w"] < 1e-6
        np.testing.assert_array_equal(params["w"], [0.3, -1.2, 2.0])

    def test_wrong_gradient_detected(self):
        def closure(params, inputs):
            w = params["w"]
            return float(np.sum(w ** 2)), {"w": w}

        errors = grad_check(closure, {"w": np.array([1.0, 2.0])}, None)
        assert errors["w"] > 0.1

    def test_wrong_small_gradient_detected(self):
        def closure(params, inputs):
            w = params["w"]
            return float(5e-8 * np.sum(w ** 2)), {"w": np.zeros_like(w)}

        errors = grad_check(closure, {"w": np.array([1.0, -1.0])}, None)
        assert errors["w"] > 0.5
