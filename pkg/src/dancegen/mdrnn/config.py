from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ParameterError

PROFILES = {
    "small": (64, 32, 16),
    "paper": (1024, 512, 256),
}


@dataclass(frozen=True)
class ModelConfig:
    """Shape of the LSTM stack and its Gaussian-mixture head."""

    input_dim: int = 69
    output_dim: int = 66
    lstm_units: tuple = (1024, 512, 256)
    mixtures: int = 3
    sigma_floor: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "lstm_units", tuple(int(u) for u in self.lstm_units))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ParameterError("input_dim and output_dim must be >= 1")
        if not self.lstm_units or min(self.lstm_units) < 1:
            raise ParameterError(f"every LSTM layer needs >= 1 unit, got {self.lstm_units}")
        if self.mixtures < 1:
            raise ParameterError(f"need at least one mixture component, got {self.mixtures}")
        if not self.sigma_floor > 0:
            raise ParameterError("sigma_floor must be positive")

    @property
    def head_width(self) -> int:
        """Raw head outputs: K weights, K*D means and K*D scales."""
        return self.mixtures * 2 * self.output_dim + self.mixtures

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lstm_units"] = list(self.lstm_units)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


def profile_config(name: str, input_dim: int = 69, output_dim: int = 66, mixtures: int = 3) -> ModelConfig:
    try:
        units = PROFILES[name]
    except KeyError:
        raise ParameterError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    return ModelConfig(input_dim, output_dim, units, mixtures)


def count_params(config: ModelConfig) -> int:
    total = 0
    fan_in = config.input_dim
    for units in config.lstm_units:
        total += 4 * ((fan_in + units) * units + units)
        fan_in = units
    return total + (fan_in + 1) * config.head_width


@dataclass(frozen=True)
class TrainSettings:
    learning_rate: float = 1e-4
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    patience: int = 10
    max_epochs: int = 100
    seed: int = 0
    clip_norm: float = 10.0
    min_delta: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ParameterError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 1:
            raise ParameterError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.epsilon > 0):
            raise ParameterError("Adam needs 0 <= beta < 1 and epsilon > 0")
        if not self.clip_norm > 0 or self.min_delta < 0:
            raise ParameterError("clip_norm must be positive and min_delta non-negative")
