"""Audio features: sub-band spectral flux and pulse clarity, aligned to motion frames."""

from .features import (
    CSV_HEADER,
    FEATURE_NAMES,
    FeatureSeries,
    Provenance,
    align_features,
    extract_features,
    features_for_motion,
    format_feature_csv,
    read_feature_csv,
    white_noise_features,
    white_noise_signal,
    write_feature_csv,
)
from .signal import AudioSignal, read_wav, write_wav
from .spectral import (
    FRAME_HOP,
    FRAME_LEN,
    HIGH_BAND,
    HOP_S,
    LOW_BAND,
    WINDOW_S,
    Spectrogram,
    analysis_windows,
    band_bins,
    band_flux,
    clarity_from_energy,
    hann,
    onset_curve,
    onset_energy_distribution,
    pulse_clarity,
    spectral_energy,
    stft,
    subband_flux_series,
)
