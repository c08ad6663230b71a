"""LSTM stack with a Gaussian-mixture head: forward pass, loss, training,
sampling and checkpoints."""

from .checkpoint import FORMAT_VERSION, MAGIC, Checkpoint, checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint
from .config import PROFILES, ModelConfig, TrainSettings, count_params, profile_config
from .mixture import HALF_LOG_2PI, MixtureParams, gmm_nll, mdn_nll, sample_mixture
from .model import (
    batch_loss,
    check_weights,
    forward_sequence,
    forward_step,
    init_weights,
    initial_state,
    param_names,
    param_shapes,
    zero_weights,
)
from .optim import AdamState, EarlyStopping, adam_step, clip_by_global_norm, global_norm
from .train import (
    LOG_HEADER,
    EpochRecord,
    TrainResult,
    WindowDataset,
    evaluate,
    loss_and_grads,
    sequence_loss,
    stack_windows,
    train,
)

__all__ = [
    "FORMAT_VERSION",
    "HALF_LOG_2PI",
    "LOG_HEADER",
    "MAGIC",
    "PROFILES",
    "AdamState",
    "Checkpoint",
    "EarlyStopping",
    "EpochRecord",
    "MixtureParams",
    "ModelConfig",
    "TrainResult",
    "TrainSettings",
    "WindowDataset",
    "adam_step",
    "batch_loss",
    "check_weights",
    "checkpoint_bytes",
    "clip_by_global_norm",
    "count_params",
    "evaluate",
    "forward_sequence",
    "forward_step",
    "gmm_nll",
    "global_norm",
    "init_weights",
    "initial_state",
    "load_checkpoint",
    "loss_and_grads",
    "mdn_nll",
    "param_names",
    "param_shapes",
    "parse_checkpoint",
    "profile_config",
    "sample_mixture",
    "save_checkpoint",
    "sequence_loss",
    "stack_windows",
    "train",
    "zero_weights",
]
