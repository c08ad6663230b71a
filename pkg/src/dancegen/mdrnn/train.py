"""Mini-batch training by backpropagation through time over whole windows."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionError, NumericError, ParameterError
from ..mocap import NormStats, TrainingWindow
from ..numerics import GradTape, SeededRng, Tensor
from .checkpoint import Checkpoint
from .config import ModelConfig, TrainSettings
from .model import batch_loss, check_weights, init_weights, param_names
from .optim import AdamState, EarlyStopping, adam_step, clip_by_global_norm

LOG_HEADER = "epoch,train_nll,val_nll,seconds"


@dataclass(frozen=True)
class WindowDataset:
    """Training and validation windows plus the statistics used to normalise them."""

    train: list
    val: list
    motion_stats: NormStats | None = None
    feature_stats: NormStats | None = None


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_nll: float
    val_nll: float
    seconds: float

    def csv_row(self) -> str:
        return f"{self.epoch},{self.train_nll!r},{self.val_nll!r},{self.seconds:.3f}"


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: list = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    @property
    def val_losses(self) -> list:
        return [r.val_nll for r in self.history]


def stack_windows(windows) -> tuple:
    """``(inputs (N, T, C), targets (N, T, D))`` from equally long windows."""
    windows = list(windows)
    if not windows:
        raise ParameterError("no windows to stack")
    if any(not isinstance(w, TrainingWindow) for w in windows):
        raise ParameterError("expected TrainingWindow objects")
    lengths = {w.inputs.shape for w in windows}
    if len(lengths) != 1:
        raise DimensionError(f"windows differ in shape: {sorted(lengths)}")
    return np.stack([w.inputs for w in windows]), np.stack([w.targets for w in windows])


def loss_and_grads(config: ModelConfig, weights: dict, inputs, targets) -> tuple:
    params = {name: Tensor(weights[name], requires_grad=True) for name in param_names(config)}
    with GradTape() as tape:
        loss = batch_loss(config, params, inputs, targets)
    names = list(params)
    grads = tape.gradient(loss, [params[n] for n in names])
    return float(loss), dict(zip(names, grads))


def evaluate(config: ModelConfig, weights: dict, inputs, targets, batch_size: int = 32) -> float:
    """Mean per-step NLL over a set of windows (evaluated in batches)."""
    params = {name: Tensor(weights[name]) for name in param_names(config)}
    total = 0.0
    n = len(inputs)
    for start in range(0, n, batch_size):
        x, y = inputs[start : start + batch_size], targets[start : start + batch_size]
        total += float(batch_loss(config, params, x, y)) * len(x)
    return total / n


def sequence_loss(window: TrainingWindow, weights: dict, config: ModelConfig) -> float:
    """Mean NLL over the window's steps, starting from zero state."""
    return evaluate(config, weights, window.inputs[None], window.targets[None])


def train(
    dataset: WindowDataset,
    config: ModelConfig,
    settings: TrainSettings,
    *,
    initial_weights: dict | None = None,
    log_path=None,
    on_epoch=None,
    validate=None,
) -> TrainResult:
    """Train until validation NLL stops improving for ``settings.patience`` epochs.

    Batch order comes from ``settings.seed`` alone, so identical inputs give
    bit-identical histories and weights.  ``validate(weights) -> float`` may
    replace the validation pass.  The returned checkpoint holds the weights
    of the best validation epoch.
    """
    if not dataset.train or not dataset.val:
        raise ParameterError("training needs non-empty train and validation splits")
    train_x, train_y = stack_windows(dataset.train)
    val_x, val_y = stack_windows(dataset.val)
    if train_x.shape[2] != config.input_dim or train_y.shape[2] != config.output_dim:
        raise DimensionError(
            f"windows carry {train_x.shape[2]} inputs / {train_y.shape[2]} targets, "
            f"model expects {config.input_dim} / {config.output_dim}"
        )
    root = SeededRng(settings.seed)
    if initial_weights is None:
        weights = init_weights(config, root.spawn("init"))
    else:
        check_weights(config, initial_weights)
        weights = {k: np.array(v, dtype=np.float64) for k, v in initial_weights.items()}
    if validate is None:
        def validate(w):
            return evaluate(config, w, val_x, val_y, settings.batch_size)

    state = AdamState.zeros_like(weights)
    stopper = EarlyStopping(settings.patience, settings.min_delta)
    best = weights
    history = []
    step = 0
    log = None
    if log_path is not None:
        log = open(Path(log_path), "w", encoding="utf-8")
        log.write(LOG_HEADER + "\n")
    try:
        for epoch in range(1, settings.max_epochs + 1):
            t0 = time.perf_counter()
            order = root.spawn(f"epoch-{epoch}").permutation(len(train_x))
            total = 0.0
            for batch, start in enumerate(range(0, len(order), settings.batch_size)):
                idx = np.sort(order[start : start + settings.batch_size])
                try:
                    loss, grads = loss_and_grads(config, weights, train_x[idx], train_y[idx])
                    grads, _ = clip_by_global_norm(grads, settings.clip_norm)
                    step += 1
                    weights, state = adam_step(weights, grads, state, step, settings)
                    if not all(np.isfinite(w).all() for w in weights.values()):
                        raise NumericError("weights became non-finite")
                except NumericError as exc:
                    raise NumericError(f"training diverged at epoch {epoch}, batch {batch}: {exc}") from None
                total += loss * len(idx)
            try:
                val = float(validate(weights))
            except NumericError as exc:
                raise NumericError(f"validation failed at epoch {epoch}: {exc}") from None
            if not np.isfinite(val):
                raise NumericError(f"validation loss is not finite at epoch {epoch}")
            if stopper.update(epoch, val):
                best = weights
            record = EpochRecord(epoch, total / len(train_x), val, time.perf_counter() - t0)
            history.append(record)
            if log is not None:
                log.write(record.csv_row() + "\n")
                log.flush()
            if on_epoch is not None:
                on_epoch(record)
            if stopper.should_stop:
                break
    finally:
        if log is not None:
            log.close()
    metadata = {
        "best_epoch": stopper.best_epoch,
        "best_val_nll": stopper.best,
        "epochs_run": len(history),
        "seed": settings.seed,
        "settings": asdict(settings),
    }
    ckpt = Checkpoint(config, best, dataset.motion_stats, dataset.feature_stats, metadata)
    return TrainResult(ckpt, history, stopper.best_epoch, stopper.should_stop)
