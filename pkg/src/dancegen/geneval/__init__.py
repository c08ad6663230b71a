"""Primed generation, feature substitution, jitter metrics, trajectory plots
and synthetic conditioning data."""

from .experiment import (
    ToyModel,
    ToySetup,
    build_window_dataset,
    conditioning_ratio,
    constant_control_features,
    recording_inputs,
    substitution_jitter,
    train_toy_model,
)
from .generate import GenerationRun, Mode, generate_autoregressive, generate_primed, model_inputs, substitute_features
from .jitter import JitterReport, jitter_metric
from .plot import HEIGHT, WIDTH, trajectory_plot, trajectory_svg
from .synth import (
    SynthDataset,
    SynthSpec,
    control_audio,
    control_features,
    slow_control,
    synth_dataset,
    synth_marker_motion,
    synth_motion,
)

__all__ = [
    "HEIGHT",
    "WIDTH",
    "GenerationRun",
    "JitterReport",
    "Mode",
    "SynthDataset",
    "SynthSpec",
    "ToyModel",
    "ToySetup",
    "build_window_dataset",
    "conditioning_ratio",
    "constant_control_features",
    "control_audio",
    "control_features",
    "generate_autoregressive",
    "generate_primed",
    "jitter_metric",
    "model_inputs",
    "recording_inputs",
    "slow_control",
    "substitute_features",
    "substitution_jitter",
    "synth_dataset",
    "synth_marker_motion",
    "synth_motion",
    "train_toy_model",
    "trajectory_plot",
    "trajectory_svg",
]
