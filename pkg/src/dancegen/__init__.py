"""Audio-conditioned dance motion generation with a mixture-density LSTM."""

__version__ = "0.1.0"
