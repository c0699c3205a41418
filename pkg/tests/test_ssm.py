"""
Tests for the state-space branch: hand-computed scan values, BPTT against
finite differences, and batch/single agreement.
"""

import time

import numpy as np
import pytest

from errors import ConfigurationError, DataError
from numerics import grad_check
from ssm import SsmParams, ssm_backward, ssm_forward, ssm_init


def scalar_params(a=0.5, b=1.0, c=1.0, d=0.0):
    return SsmParams(
        rho=np.array([np.arctanh(a)]),
        B=np.array([[b]]),
        C=np.array([[c]]),
        D=np.array([[d]]),
    )


IMPULSE = np.array([[1.0], [0.0], [0.0]])


class TestForward:
    def test_impulse_response(self):
        h, cache = ssm_forward(scalar_params(), IMPULSE)
        np.testing.assert_allclose(cache.outputs[0, :, 0], [0.0, 1.0, 0.5])
        np.testing.assert_allclose(h, [0.5])

    def test_last_pooling(self):
        h, _ = ssm_forward(scalar_params(), IMPULSE, pooling="last")
        np.testing.assert_allclose(h, [0.5])

    def test_direct_term(self):
        h, _ = ssm_forward(scalar_params(d=2.0), IMPULSE)
        np.testing.assert_allclose(h, [0.5 + 2.0 / 3.0])

    def test_zero_input_gives_zero(self, rng):
        params = ssm_init(4, 3, 2, rng)
        h, _ = ssm_forward(params, np.zeros((10, 3)))
        np.testing.assert_array_equal(h, np.zeros(2))

    def test_batch_matches_single(self, rng):
        params = ssm_init(4, 3, 2, rng)
        windows = rng.normal(size=(5, 12, 3))
        batch_h, _ = ssm_forward(params, windows)
        for i in range(5):
            single, _ = ssm_forward(params, windows[i])
            np.testing.assert_allclose(batch_h[i], single, rtol=1e-12)

    def test_superposition_and_homogeneity(self, rng):
        for _ in range(100):
            params = ssm_init(4, 3, 2, rng)
            u1, u2 = rng.normal(size=(9, 3)), rng.normal(size=(9, 3))
            scale = float(rng.normal())
            h1, c1 = ssm_forward(params, u1)
            h2, c2 = ssm_forward(params, u2)
            both, c_both = ssm_forward(params, u1 + u2)
            scaled, c_scaled = ssm_forward(params, scale * u1)
            np.testing.assert_allclose(both, h1 + h2, atol=1e-10)
            np.testing.assert_allclose(scaled, scale * h1, atol=1e-10)
            np.testing.assert_allclose(c_both.states, c1.states + c2.states, atol=1e-10)
            np.testing.assert_allclose(c_both.outputs, c1.outputs + c2.outputs, atol=1e-10)
            np.testing.assert_allclose(c_scaled.states, scale * c1.states, atol=1e-10)
            np.testing.assert_allclose(c_scaled.outputs, scale * c1.outputs, atol=1e-10)

    def test_long_window_stays_bounded(self, rng):
        # any rho gives |a| < 1, so |x_i| <= sum_j |B_ij| / (1 - |a_i|) for |u| <= 1
        params = ssm_init(8, 4, 3, rng)
        params.rho[:] = rng.normal(0.0, 3.0, size=8)
        window = rng.uniform(-1.0, 1.0, size=(10_000, 4))
        h, cache = ssm_forward(params, window)
        assert np.all(np.isfinite(cache.states))
        assert np.all(np.isfinite(h))
        with np.errstate(divide="ignore"):
            bound = np.abs(params.B).sum(axis=1) / (1.0 - np.abs(params.a))
        assert np.all(np.abs(cache.states[0]) <= bound * (1.0 + 1e-9))
        grads = ssm_backward(params, cache, np.ones(3))
        assert all(np.all(np.isfinite(g)) for g in grads.as_dict().values())

    def test_cost_grows_linearly_with_length(self, rng):
        params = ssm_init(16, 4, 16, rng)
        grad_h = np.ones((4, 16))

        def best_time(length):
            windows = rng.normal(size=(4, length, 4))
            timings = []
            for _ in range(5):
                start = time.perf_counter()
                _, cache = ssm_forward(params, windows)
                ssm_backward(params, cache, grad_h)
                timings.append(time.perf_counter() - start)
            return min(timings)

        best_time(256)
        assert best_time(4096) / best_time(2048) <= 2.5

    def test_init_decay_range(self, rng):
        params = ssm_init(64, 2, 2, rng)
        assert np.all((params.a >= 0.5) & (params.a <= 0.95))

    def test_rejects_nan(self):
        with pytest.raises(DataError):
            ssm_forward(scalar_params(), np.array([[np.nan], [0.0]]))

    def test_rejects_feature_mismatch(self, rng):
        with pytest.raises(ConfigurationError):
            ssm_forward(ssm_init(2, 3, 2, rng), np.zeros((4, 2)))

    def test_rejects_unknown_pooling(self):
        with pytest.raises(ConfigurationError):
            ssm_forward(scalar_params(), IMPULSE, pooling="max")

    def test_init_rejects_zero_dims(self, rng):
        with pytest.raises(ConfigurationError):
            ssm_init(0, 1, 1, rng)


class TestBackward:
    def test_impulse_gradients(self):
        params = scalar_params()
        _, cache = ssm_forward(params, IMPULSE)
        grads = ssm_backward(params, cache, np.array([1.0]))
        np.testing.assert_allclose(grads.C, [[0.5]])
        np.testing.assert_allclose(grads.D, [[1.0 / 3.0]])
        np.testing.assert_allclose(grads.B, [[0.5]])
        # dL/da = 1/3, times tanh' = 1 - 0.25
        np.testing.assert_allclose(grads.rho, [0.25])
        np.testing.assert_allclose(grads.window[:, 0], [0.5, 1.0 / 3.0, 0.0])

    @pytest.mark.parametrize("pooling", ["mean", "last"])
    def test_matches_finite_differences(self, rng, pooling):
        params = ssm_init(3, 2, 2, rng)
        window = rng.normal(size=(7, 2))
        weights = rng.normal(size=2)

        def closure(tensors, inputs):
            p = SsmParams(rho=tensors["rho"], B=tensors["B"], C=tensors["C"], D=tensors["D"])
            h, cache = ssm_forward(p, inputs, pooling=pooling)
            grads = ssm_backward(p, cache, weights)
            return float(weights @ h), grads.as_dict()

        errors = grad_check(closure, params.named_tensors(), window)
        assert max(errors.values()) < 1e-5

    def test_window_gradient(self, rng):
        params = ssm_init(3, 2, 2, rng)
        window = rng.normal(size=(5, 2))
        weights = rng.normal(size=2)

        def closure(tensors, _):
            h, cache = ssm_forward(params, tensors["window"])
            return float(weights @ h), {"window": ssm_backward(params, cache, weights).window}

        errors = grad_check(closure, {"window": window}, None)
        assert errors["window"] < 1e-5

    def test_batch_grads_are_summed(self, rng):
        params = ssm_init(3, 2, 2, rng)
        windows = rng.normal(size=(4, 6, 2))
        grad_h = rng.normal(size=(4, 2))
        _, cache = ssm_forward(params, windows)
        batched = ssm_backward(params, cache, grad_h)
        total_b = np.zeros_like(params.B)
        for i in range(4):
            _, single_cache = ssm_forward(params, windows[i])
            total_b += ssm_backward(params, single_cache, grad_h[i]).B
        np.testing.assert_allclose(batched.B, total_b, rtol=1e-10)

    def test_rejects_bad_grad_shape(self):
        params = scalar_params()
        _, cache = ssm_forward(params, IMPULSE)
        with pytest.raises(ConfigurationError):
            ssm_backward(params, cache, np.array([1.0, 2.0]))
