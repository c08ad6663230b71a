"""Stacked LSTM feeding a mixture-density head.

Weights live in a plain ``dict`` of float64 arrays keyed by
:func:`param_names`; for layer ``l`` these are ``lstm{l}.w_x`` (in, 4H),
``lstm{l}.w_h`` (H, 4H) and ``lstm{l}.b`` (4H,), with gate blocks ordered
input, forget, cell, output.  The head is ``head.w`` (H_last, K + 2KD) and
``head.b``; its raw outputs split as K logits | K*D means | K*D scales.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, NumericError
from ..numerics import (
    SeededRng,
    Tensor,
    add,
    getitem,
    log_softmax,
    lstm_cell,
    matmul,
    reshape,
    softplus,
    stack,
    unstack,
)
from .config import ModelConfig
from .mixture import MixtureParams, gmm_nll


def param_names(config: ModelConfig) -> list:
    names = []
    for layer in range(len(config.lstm_units)):
        names += [f"lstm{layer}.w_x", f"lstm{layer}.w_h", f"lstm{layer}.b"]
    return names + ["head.w", "head.b"]


def param_shapes(config: ModelConfig) -> dict:
    shapes = {}
    fan_in = config.input_dim
    for layer, units in enumerate(config.lstm_units):
        shapes[f"lstm{layer}.w_x"] = (fan_in, 4 * units)
        shapes[f"lstm{layer}.w_h"] = (units, 4 * units)
        shapes[f"lstm{layer}.b"] = (4 * units,)
        fan_in = units
    shapes["head.w"] = (fan_in, config.head_width)
    shapes["head.b"] = (config.head_width,)
    return shapes


def check_weights(config: ModelConfig, weights: dict) -> None:
    """Raise :class:`DimensionError` naming the first tensor that does not fit."""
    shapes = param_shapes(config)
    missing = sorted(set(shapes) - set(weights))
    extra = sorted(set(weights) - set(shapes))
    if missing or extra:
        raise DimensionError(f"weights do not match the configuration: missing {missing}, unexpected {extra}")
    for name, shape in shapes.items():
        got = np.shape(weights[name])
        if got != shape:
            raise DimensionError(f"tensor {name!r} has shape {got}, configuration expects {shape}")


def _glorot(rng: SeededRng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform((fan_in, fan_out), -limit, limit)


def _orthogonal(rng: SeededRng, rows: int, cols: int) -> np.ndarray:
    a = rng.normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return q if rows >= cols else q.T


def init_weights(config: ModelConfig, rng: SeededRng) -> dict:
    """Glorot-uniform input and head matrices, orthogonal recurrent matrices,
    zero biases except the forget gate, which starts at 1."""
    weights = {}
    fan_in = config.input_dim
    for layer, units in enumerate(config.lstm_units):
        weights[f"lstm{layer}.w_x"] = _glorot(rng, fan_in, 4 * units)
        weights[f"lstm{layer}.w_h"] = _orthogonal(rng, units, 4 * units)
        b = np.zeros(4 * units)
        b[units : 2 * units] = 1.0
        weights[f"lstm{layer}.b"] = b
        fan_in = units
    weights["head.w"] = _glorot(rng, fan_in, config.head_width)
    weights["head.b"] = np.zeros(config.head_width)
    return weights


def zero_weights(config: ModelConfig) -> dict:
    return {name: np.zeros(shape) for name, shape in param_shapes(config).items()}


# -- differentiable sequence forward ---------------------------------------------------


def _head_split(raw, config: ModelConfig, n: int):
    k, d = config.mixtures, config.output_dim
    log_pi = log_softmax(getitem(raw, (slice(None), slice(0, k))), axis=1)
    mu = reshape(getitem(raw, (slice(None), slice(k, k + k * d))), (n, k, d))
    sigma = add(softplus(getitem(raw, (slice(None), slice(k + k * d, None)))), config.sigma_floor)
    return log_pi, mu, reshape(sigma, (n, k, d))


def forward_sequence(config: ModelConfig, params: dict, inputs: np.ndarray):
    """Mixture parameters for every step of a batch of sequences.

    ``inputs`` is ``(B, T, input_dim)``; states start at zero.  ``params``
    maps names to :class:`Tensor` (tracked or not).  Returns ``log_pi``
    (B*T, K), ``mu`` and ``sigma`` (B*T, K, D) in time-major row order.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != config.input_dim:
        raise DimensionError(f"inputs must be (B, T, {config.input_dim}), got {x.shape}")
    b, t, _ = x.shape
    layer_in = Tensor(x.transpose(1, 0, 2).reshape(t * b, -1))
    for layer, units in enumerate(config.lstm_units):
        try:
            proj = add(matmul(layer_in, params[f"lstm{layer}.w_x"]), params[f"lstm{layer}.b"])
            steps = unstack(reshape(proj, (t, b, 4 * units)), axis=0)
            w_h = params[f"lstm{layer}.w_h"]
            h = c = Tensor(np.zeros((b, units)))
            hs = []
            for gates_x in steps:
                h, c = lstm_cell(add(gates_x, matmul(h, w_h)), c)
                hs.append(h)
            layer_in = reshape(stack(hs, axis=0), (t * b, units))
        except NumericError as exc:
            raise NumericError(f"LSTM layer {layer}: {exc}") from None
    try:
        raw = add(matmul(layer_in, params["head.w"]), params["head.b"])
        return _head_split(raw, config, t * b)
    except NumericError as exc:
        raise NumericError(f"mixture head: {exc}") from None


def batch_loss(config: ModelConfig, params: dict, inputs, targets) -> Tensor:
    """Mean NLL over every step of every sequence in the batch."""
    y = np.asarray(targets, dtype=np.float64)
    if y.ndim != 3 or y.shape[2] != config.output_dim or y.shape[:2] != np.shape(inputs)[:2]:
        raise DimensionError(f"targets {y.shape} do not match inputs {np.shape(inputs)}")
    log_pi, mu, sigma = forward_sequence(config, params, inputs)
    flat_y = y.transpose(1, 0, 2).reshape(-1, config.output_dim)
    return gmm_nll(log_pi, mu, sigma, flat_y, config.sigma_floor)


# -- step-wise numpy forward for generation --------------------------------------------------


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def initial_state(config: ModelConfig) -> tuple:
    return tuple((np.zeros(u), np.zeros(u)) for u in config.lstm_units)


def _softplus(x):
    return np.logaddexp(0.0, x)


def forward_step(config: ModelConfig, weights: dict, x, states) -> tuple:
    """One frame through the network; returns ``(MixtureParams, new_states)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (config.input_dim,):
        raise DimensionError(f"frame must have {config.input_dim} values, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise NumericError("input frame is not finite")
    if len(states) != len(config.lstm_units):
        raise DimensionError(f"expected {len(config.lstm_units)} layer states, got {len(states)}")
    new_states = []
    h_in = x
    for layer, (units, (h, c)) in enumerate(zip(config.lstm_units, states)):
        if np.shape(h) != (units,) or np.shape(c) != (units,):
            raise DimensionError(f"layer {layer} state must have {units} units")
        z = h_in @ weights[f"lstm{layer}.w_x"] + weights[f"lstm{layer}.b"] + h @ weights[f"lstm{layer}.w_h"]
        i = _sigmoid(z[:units])
        f = _sigmoid(z[units : 2 * units])
        g = np.tanh(z[2 * units : 3 * units])
        o = _sigmoid(z[3 * units :])
        c = f * c + i * g
        h = o * np.tanh(c)
        if not (np.isfinite(h).all() and np.isfinite(c).all()):
            raise NumericError(f"LSTM layer {layer} produced non-finite activations")
        new_states.append((h, c))
        h_in = h
    raw = h_in @ weights["head.w"] + weights["head.b"]
    if not np.isfinite(raw).all():
        raise NumericError("mixture head produced non-finite activations")
    k, d = config.mixtures, config.output_dim
    logits = raw[:k]
    shifted = logits - logits.max()
    log_pi = shifted - np.log(np.exp(shifted).sum())
    mu = raw[k : k + k * d].reshape(k, d)
    sigma = (_softplus(raw[k + k * d :]) + config.sigma_floor).reshape(k, d)
    pi = np.exp(log_pi)
    pi = pi / pi.sum()
    return MixtureParams(pi, mu, sigma, log_pi), tuple(new_states)
