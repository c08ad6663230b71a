from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, ParameterError
from .config import TrainSettings


@dataclass
class AdamState:
    """First and second moment estimates, keyed like the weights."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, weights: dict) -> "AdamState":
        return cls({k: np.zeros_like(w) for k, w in weights.items()}, {k: np.zeros_like(w) for k, w in weights.items()})


def adam_step(weights: dict, grads: dict, state: AdamState, t: int, settings: TrainSettings) -> tuple:
    """Bias-corrected Adam update; returns ``(new_weights, new_state)``.

    Inputs are not modified.
    """
    if t < 1:
        raise ParameterError(f"Adam step counter starts at 1, got {t}")
    if set(grads) != set(weights):
        raise DimensionError(f"gradient keys {sorted(grads)} do not match weight keys {sorted(weights)}")
    b1, b2 = settings.beta1, settings.beta2
    new_w, new_m, new_v = {}, {}, {}
    for name, w in weights.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != np.shape(w):
            raise DimensionError(f"gradient for {name!r} has shape {g.shape}, weight has {np.shape(w)}")
        m = b1 * state.m.get(name, 0.0) + (1.0 - b1) * g
        v = b2 * state.v.get(name, 0.0) + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        new_w[name] = w - settings.learning_rate * m_hat / (np.sqrt(v_hat) + settings.epsilon)
        new_m[name], new_v[name] = m, v
    return new_w, AdamState(new_m, new_v)


def global_norm(grads: dict) -> float:
    # sorted keys give a fixed reduction order
    return float(np.sqrt(sum(float(np.sum(grads[k] ** 2)) for k in sorted(grads))))


def clip_by_global_norm(grads: dict, max_norm: float) -> tuple:
    """Scale all gradients together so their joint L2 norm is at most ``max_norm``."""
    norm = global_norm(grads)
    if norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm


class EarlyStopping:
    """Tracks validation loss; a value counts as an improvement only when it
    is below the best so far by more than ``min_delta``."""

    def __init__(self, patience: int = 10, min_delta: float = 0.0):
        if patience < 1:
            raise ParameterError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.min_delta = min_delta
        self.best = np.inf
        self.best_epoch = 0
        self.bad_epochs = 0

    def update(self, epoch: int, loss: float) -> bool:
        """Record one epoch's validation loss; returns whether it improved."""
        if loss < self.best - self.min_delta:
            self.best, self.best_epoch, self.bad_epochs = float(loss), epoch, 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.bad_epochs >= self.patience
