"""
The MamNet network: SSM time branch and DFT frequency branch fused by a
learnable weighted sum, z = alpha * h_time + beta * h_freq, then dropout and a
single-output head.

Ablation variants:
    full     z = alpha * h_time + beta * h_freq
    no_time  z = beta * h_freq
    no_freq  z = alpha * h_time
    no_both  z = P_r (column means of the window) + b_r

Every function takes a single (W, F) window or a (B, W, F) batch. Batched
backward sums parameter gradients over the batch; callers pass per-sample
loss gradients already divided by the batch size to get mean gradients.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from errors import ConfigurationError, DataError
from fusion.config import ModelConfig
from numerics import dropout, ensure_finite, uniform_fan, linear_forward, linear_backward, LinearCache
from numerics.dropout import replay_mask
from spectral import spectral_features
from ssm import SsmParams, SsmCache, ssm_init, ssm_forward, ssm_backward

ModelGrads = Dict[str, np.ndarray]

PARAM_NAMES = (
    "ssm.rho",
    "ssm.B",
    "ssm.C",
    "ssm.D",
    "spectral_proj.weight",
    "spectral_proj.bias",
    "alpha",
    "beta",
    "residual_proj.weight",
    "residual_proj.bias",
    "head.weight",
    "head.bias",
)


@dataclass
class ModelParams:
    ssm: SsmParams
    spectral_weight: np.ndarray   # P_f, (M, F*K)
    spectral_bias: np.ndarray     # (M,)
    alpha: np.ndarray             # 0-d
    beta: np.ndarray              # 0-d
    residual_weight: np.ndarray   # P_r, (M, F); used by no_both only
    residual_bias: np.ndarray     # (M,)
    head_weight: np.ndarray       # (1, M)
    head_bias: np.ndarray         # (1,)

    def named_tensors(self) -> Dict[str, np.ndarray]:
        """Live references to every trainable array, keyed by PARAM_NAMES."""
        return {
            "ssm.rho": self.ssm.rho,
            "ssm.B": self.ssm.B,
            "ssm.C": self.ssm.C,
            "ssm.D": self.ssm.D,
            "spectral_proj.weight": self.spectral_weight,
            "spectral_proj.bias": self.spectral_bias,
            "alpha": self.alpha,
            "beta": self.beta,
            "residual_proj.weight": self.residual_weight,
            "residual_proj.bias": self.residual_bias,
            "head.weight": self.head_weight,
            "head.bias": self.head_bias,
        }

    @classmethod
    def from_tensors(cls, config: ModelConfig, tensors: Dict[str, np.ndarray]) -> "ModelParams":
        """Rebuild params from named arrays, checking every shape against the config."""
        expected = expected_shapes(config)
        missing = [name for name in PARAM_NAMES if name not in tensors]
        if missing:
            raise DataError(f"missing tensors: {', '.join(missing)}", stage="model")
        arrays = {}
        for name in PARAM_NAMES:
            array = np.array(tensors[name], dtype=np.float64)
            if array.shape != expected[name]:
                raise DataError(f"tensor '{name}' has shape {array.shape}, expected {expected[name]}", stage="model")
            if not np.all(np.isfinite(array)):
                raise DataError(f"tensor '{name}' holds non-finite values", stage="model")
            arrays[name] = array
        return cls(
            ssm=SsmParams(rho=arrays["ssm.rho"], B=arrays["ssm.B"], C=arrays["ssm.C"], D=arrays["ssm.D"]),
            spectral_weight=arrays["spectral_proj.weight"],
            spectral_bias=arrays["spectral_proj.bias"],
            alpha=arrays["alpha"],
            beta=arrays["beta"],
            residual_weight=arrays["residual_proj.weight"],
            residual_bias=arrays["residual_proj.bias"],
            head_weight=arrays["head.weight"],
            head_bias=arrays["head.bias"],
        )

    def copy(self) -> "ModelParams":
        return ModelParams(
            ssm=self.ssm.copy(),
            spectral_weight=self.spectral_weight.copy(),
            spectral_bias=self.spectral_bias.copy(),
            alpha=self.alpha.copy(),
            beta=self.beta.copy(),
            residual_weight=self.residual_weight.copy(),
            residual_bias=self.residual_bias.copy(),
            head_weight=self.head_weight.copy(),
            head_bias=self.head_bias.copy(),
        )

    def parameter_count(self) -> int:
        return int(sum(array.size for array in self.named_tensors().values()))


def expected_shapes(config: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    n, f, m = config.state_dim, config.features, config.fusion_dim
    return {
        "ssm.rho": (n,),
        "ssm.B": (n, f),
        "ssm.C": (m, n),
        "ssm.D": (m, f),
        "spectral_proj.weight": (m, config.spectral_size),
        "spectral_proj.bias": (m,),
        "alpha": (),
        "beta": (),
        "residual_proj.weight": (m, f),
        "residual_proj.bias": (m,),
        "head.weight": (1, m),
        "head.bias": (1,),
    }


@dataclass
class ForwardCache:
    window: np.ndarray
    batched: bool
    ssm_cache: Optional[SsmCache]
    spectrum: Optional[np.ndarray]
    h_time: Optional[np.ndarray]
    h_freq: Optional[np.ndarray]
    column_means: Optional[np.ndarray]
    z: np.ndarray
    z_dropped: np.ndarray
    mask: np.ndarray
    pre_activation: np.ndarray  # logit (classify) or raw value (regress), shape (B,)


def model_init(config: ModelConfig, rng) -> ModelParams:
    """
    Initialize a network.

    SSM via ssm_init; projections and head uniform in ±sqrt(6/(fan_in+fan_out));
    biases zero; alpha = beta = 1.
    """
    config.validate()
    n, f, m = config.state_dim, config.features, config.fusion_dim
    return ModelParams(
        ssm=ssm_init(n, f, m, rng.derive("ssm")),
        spectral_weight=uniform_fan(rng.derive("spectral_proj"), (m, config.spectral_size), config.spectral_size, m),
        spectral_bias=np.zeros(m),
        alpha=np.array(1.0),
        beta=np.array(1.0),
        residual_weight=uniform_fan(rng.derive("residual_proj"), (m, f), f, m),
        residual_bias=np.zeros(m),
        head_weight=uniform_fan(rng.derive("head"), (1, m), m, 1),
        head_bias=np.zeros(1),
    )


def fuse(h_time: np.ndarray, h_freq: np.ndarray, alpha, beta) -> np.ndarray:
    """Weighted sum z = alpha * h_time + beta * h_freq."""
    if np.shape(h_time) != np.shape(h_freq):
        raise ConfigurationError(f"fusion inputs differ in shape: {np.shape(h_time)} vs {np.shape(h_freq)}", stage="fusion")
    return float(alpha) * np.asarray(h_time) + float(beta) * np.asarray(h_freq)


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    exp_x = np.exp(x[~positive])
    out[~positive] = exp_x / (1.0 + exp_x)
    return out


def _check(array: np.ndarray, stage: str) -> np.ndarray:
    return ensure_finite(array, f"forward:{stage}")


def forward(
    params: ModelParams,
    config: ModelConfig,
    window: np.ndarray,
    rng=None,
    training: bool = False,
    spectrum: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, ForwardCache]:
    """
    Run the network on one window or a batch.

    Args:
        params: Network parameters (read-only)
        config: Model configuration
        window: (W, F) or (B, W, F), finite
        rng: Dropout stream; required when training and dropout > 0
        training: Enables dropout
        spectrum: Optional precomputed spectral_features(window); the spectral
            branch is not trainable, so callers may compute it once per dataset

    Returns:
        (output, cache). Output is a probability for classify, a raw value for
        regress; a float for one window, (B,) for a batch.

    Raises:
        DataError: If the window is malformed or non-finite
        NumericFailure: If a stage produces NaN/inf (stage named in the message)
    """
    window = np.asarray(window, dtype=np.float64)
    batched = window.ndim == 3
    u = window if batched else window[None, :, :]
    if u.ndim != 3 or u.shape[1:] != (config.window, config.features):
        raise DataError(f"window shape {window.shape} does not match (W={config.window}, F={config.features})", stage="forward")
    if not np.all(np.isfinite(u)):
        raise DataError("non-finite values in window", stage="forward")

    variant = config.variant
    ssm_cache = h_time = h_freq = column_means = spec = None

    if variant in ("full", "no_freq"):
        h_time, ssm_cache = ssm_forward(params.ssm, u, pooling=config.pooling)
        _check(h_time, "ssm")
    if variant in ("full", "no_time"):
        if spectrum is None:
            spec = spectral_features(u, config.spectral_bins, config.taper)
        else:
            spec = np.asarray(spectrum, dtype=np.float64).reshape(u.shape[0], config.spectral_size)
        _check(spec, "spectral")
        h_freq, _ = linear_forward(params.spectral_weight, params.spectral_bias, spec)
        _check(h_freq, "spectral_proj")

    if variant == "full":
        z = fuse(h_time, h_freq, params.alpha, params.beta)
    elif variant == "no_time":
        z = float(params.beta) * h_freq
    elif variant == "no_freq":
        z = float(params.alpha) * h_time
    else:
        column_means = u.mean(axis=1)
        z, _ = linear_forward(params.residual_weight, params.residual_bias, column_means)
    _check(z, "fusion")

    z_dropped, mask = dropout(z, config.dropout, rng, training)
    pre, _ = linear_forward(params.head_weight, params.head_bias, z_dropped)
    pre = _check(pre[:, 0], "head")
    output = sigmoid(pre) if config.task == "classify" else pre

    cache = ForwardCache(
        window=u,
        batched=batched,
        ssm_cache=ssm_cache,
        spectrum=spec,
        h_time=h_time,
        h_freq=h_freq,
        column_means=column_means,
        z=z,
        z_dropped=z_dropped,
        mask=mask,
        pre_activation=pre,
    )
    return (output if batched else float(output[0])), cache


def loss(pre_activation, label, task: str) -> float:
    """
    Mean loss over the batch.

    Classify takes the pre-sigmoid logit and uses the stable form
    max(z, 0) - z*y + log1p(exp(-|z|)); regress is squared error.
    """
    z = np.atleast_1d(np.asarray(pre_activation, dtype=np.float64))
    y = np.atleast_1d(np.asarray(label, dtype=np.float64))
    if task == "classify":
        per_sample = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    elif task == "regress":
        per_sample = (z - y) ** 2
    else:
        raise ConfigurationError(f"unknown task '{task}'", stage="loss")
    return float(per_sample.mean())


def loss_grad(pre_activation, label, task: str) -> np.ndarray:
    """Gradient of the mean loss w.r.t. each sample's pre-activation."""
    z = np.atleast_1d(np.asarray(pre_activation, dtype=np.float64))
    y = np.atleast_1d(np.asarray(label, dtype=np.float64))
    if task == "classify":
        grad = sigmoid(z) - y
    elif task == "regress":
        grad = 2.0 * (z - y)
    else:
        raise ConfigurationError(f"unknown task '{task}'", stage="loss")
    return grad / z.shape[0]


def zero_grads(params: ModelParams) -> ModelGrads:
    return {name: np.zeros_like(array) for name, array in params.named_tensors().items()}


def backward(params: ModelParams, config: ModelConfig, cache: ForwardCache, grad_loss) -> ModelGrads:
    """
    Gradients of every ModelParams field.

    Args:
        params: Parameters used in the matching forward
        config: Model configuration
        cache: Cache from that forward
        grad_loss: dL/d(pre-activation) per sample, shape (B,) or scalar

    Returns:
        Dict keyed like ModelParams.named_tensors(); unused branches get zeros
    """
    grads = zero_grads(params)
    g = np.asarray(grad_loss, dtype=np.float64).reshape(-1)
    if g.shape[0] != cache.pre_activation.shape[0]:
        raise ConfigurationError(f"grad_loss has {g.shape[0]} entries, cache has {cache.pre_activation.shape[0]}", stage="backward")

    head_w, head_b, grad_z_dropped = linear_backward(
        LinearCache(weights=params.head_weight, inputs=cache.z_dropped), g[:, None]
    )
    grads["head.weight"] = head_w
    grads["head.bias"] = head_b
    grad_z = replay_mask(grad_z_dropped, cache.mask)

    variant = config.variant
    grad_h_time = grad_h_freq = None
    if variant == "full":
        grads["alpha"] = np.array(np.sum(grad_z * cache.h_time))
        grads["beta"] = np.array(np.sum(grad_z * cache.h_freq))
        grad_h_time = float(params.alpha) * grad_z
        grad_h_freq = float(params.beta) * grad_z
    elif variant == "no_time":
        grads["beta"] = np.array(np.sum(grad_z * cache.h_freq))
        grad_h_freq = float(params.beta) * grad_z
    elif variant == "no_freq":
        grads["alpha"] = np.array(np.sum(grad_z * cache.h_time))
        grad_h_time = float(params.alpha) * grad_z
    else:
        w, b, _ = linear_backward(LinearCache(weights=params.residual_weight, inputs=cache.column_means), grad_z)
        grads["residual_proj.weight"] = w
        grads["residual_proj.bias"] = b

    if grad_h_freq is not None:
        w, b, _ = linear_backward(LinearCache(weights=params.spectral_weight, inputs=cache.spectrum), grad_h_freq)
        grads["spectral_proj.weight"] = w
        grads["spectral_proj.bias"] = b
    if grad_h_time is not None:
        ssm_grads = ssm_backward(params.ssm, cache.ssm_cache, grad_h_time)
        for name, value in ssm_grads.as_dict().items():
            grads[f"ssm.{name}"] = value
    return grads
