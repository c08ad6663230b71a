import struct

import numpy as np
import pytest
from scipy.io import wavfile
from scipy.stats import entropy

from dancegen.audio import (
    CSV_HEADER,
    AudioSignal,
    FeatureSeries,
    Provenance,
    Spectrogram,
    align_features,
    band_flux,
    clarity_from_energy,
    extract_features,
    features_for_motion,
    hann,
    onset_energy_distribution,
    pulse_clarity,
    read_feature_csv,
    read_wav,
    spectral_energy,
    stft,
    subband_flux_series,
    white_noise_features,
    write_feature_csv,
)
from dancegen.errors import CoverageError, FormatError, LengthError, ParameterError
from dancegen.numerics import SeededRng

SR = 44100


def spectrogram(mags, hop_s=1024 / SR, frame_len=2048, sr=SR):
    mags = np.asarray(mags, float)
    return Spectrogram(mags, hop_s, sr / frame_len, frame_len, sr)


# -- WAV ------------------------------------------------------------------------------


def test_pcm16_scaling(tmp_path):
    wavfile.write(tmp_path / "a.wav", SR, np.array([32767, -32768, 0], dtype=np.int16))
    sig = read_wav(tmp_path / "a.wav")
    np.testing.assert_array_equal(sig.samples, [32767 / 32768, -1.0, 0.0])
    assert sig.samples[0] == pytest.approx(0.99997, abs=1e-5)


def test_stereo_is_averaged(tmp_path):
    wavfile.write(tmp_path / "s.wav", SR, np.array([[0.5, -0.5], [0.25, 0.75]], dtype=np.float32))
    np.testing.assert_array_equal(read_wav(tmp_path / "s.wav").samples, [0.0, 0.5])


def test_one_second_sample_count(tmp_path):
    wavfile.write(tmp_path / "o.wav", SR, np.zeros(SR, dtype=np.int16))
    sig = read_wav(tmp_path / "o.wav")
    assert sig.samples.size == 44100 and sig.duration == 1.0


def test_compressed_and_unsupported_formats(tmp_path):
    # WAVE_FORMAT_MPEGLAYER3 (0x55) header with a tiny data chunk
    fmt = struct.pack("<HHIIHH", 0x55, 1, SR, SR, 1, 0)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", 4) + b"\0" * 4
    (tmp_path / "mp3.wav").write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(FormatError):
        read_wav(tmp_path / "mp3.wav")
    wavfile.write(tmp_path / "i32.wav", SR, np.zeros(8, dtype=np.int32))
    with pytest.raises(FormatError):
        read_wav(tmp_path / "i32.wav")
    (tmp_path / "junk.wav").write_bytes(b"not a wave file at all")
    with pytest.raises(FormatError):
        read_wav(tmp_path / "junk.wav")


# -- STFT --------------------------------------------------------------------------------


def test_sinusoid_on_a_bin_concentrates_in_its_main_lobe():
    k = 40
    n = np.arange(SR)
    spec = stft(AudioSignal(np.sin(2 * np.pi * k * n / 2048), SR))
    energy = spec.magnitudes**2
    assert (energy.argmax(axis=1) == k).all()
    lobe = energy[:, k - 1 : k + 2].sum(axis=1) / energy.sum(axis=1)
    assert lobe.min() >= 0.9
    # a Hann window leaves exactly 2/3 of the power in the centre bin
    np.testing.assert_allclose(energy[:, k] / energy.sum(axis=1), 2 / 3, atol=1e-6)


def test_silence_gives_zero_spectrogram():
    assert not stft(AudioSignal(np.zeros(10000), SR)).magnitudes.any()


def test_parseval():
    x = SeededRng(2).uniform(20000, -1, 1)
    spec = stft(AudioSignal(x, SR))
    w = hann(2048)
    direct = np.array([np.sum((x[i * 1024 : i * 1024 + 2048] * w) ** 2) for i in range(spec.n_frames)])
    np.testing.assert_allclose(spectral_energy(spec), direct, rtol=1e-6)


def test_stft_parameter_errors():
    sig = AudioSignal(np.zeros(4096), SR)
    with pytest.raises(ParameterError):
        stft(sig, frame_len=1000)
    with pytest.raises(LengthError):
        stft(AudioSignal(np.zeros(100), SR))
    assert stft(sig).bin_hz == SR / 2048


# -- band flux ------------------------------------------------------------------------------


def test_stationary_spectrum_has_no_flux():
    mags = np.tile(SeededRng(3).uniform(1025), (20, 1))
    assert not band_flux(spectrogram(mags), 50, 100).any()
    assert not band_flux(spectrogram(mags), 3200, 6400).any()


def test_single_bin_onset():
    mags = np.zeros((6, 1025))
    mags[3:, 3] = 2.5  # bin 3 is 64.6 Hz
    flux = band_flux(spectrogram(mags), 50, 100)
    np.testing.assert_array_equal(flux, [0, 0, 0, 2.5, 0, 0])
    assert not band_flux(spectrogram(mags), 3200, 6400).any()


def test_decreasing_magnitudes_are_rectified_away():
    mags = np.outer(np.linspace(5, 1, 10), np.ones(1025))
    assert not band_flux(spectrogram(mags), 50, 100).any()


def test_band_validation():
    spec = spectrogram(np.ones((3, 1025)))
    with pytest.raises(ParameterError):
        band_flux(spec, 100, 50)
    with pytest.raises(ParameterError):
        band_flux(spec, 30, 40)  # falls between bins 1 and 2


# -- pulse clarity -----------------------------------------------------------------------------


def test_uniform_energy_is_zero_clarity():
    for n in (2, 7, 107):
        assert clarity_from_energy(np.full(n, 3.0)) == pytest.approx(0.0, abs=1e-12)
    assert clarity_from_energy(np.zeros(10)) == 0.0
    assert clarity_from_energy(np.eye(1, 10)[0]) == 1.0


def test_clarity_matches_independent_entropy():
    e = SeededRng(8).uniform(50) ** 3
    assert clarity_from_energy(e) == pytest.approx(1 - entropy(e) / np.log(50), abs=1e-12)


def test_clarity_in_unit_interval_and_permutation_invariant():
    rng = SeededRng(9)
    for _ in range(1000):
        n = 2 + rng.integers(200)
        e = rng.uniform(n) ** (1 + 4 * rng.uniform())
        c = clarity_from_energy(e)
        assert 0.0 <= c <= 1.0
    e = rng.uniform(64)
    assert clarity_from_energy(e[rng.permutation(64)]) == pytest.approx(clarity_from_energy(e), abs=1e-12)


def _click_spectrogram(period_frames, n_frames=400):
    mags = np.zeros((n_frames, 1025))
    for t in range(0, n_frames, period_frames):
        mags[t, 10] = 1.0  # single-frame click in one bin
    return spectrogram(mags)


def test_periodic_clicks_have_clear_pulse():
    spec = _click_spectrogram(3)
    times, values = pulse_clarity(spec)
    full = values[(times >= 2.5) & (times <= spec.duration - 2.5)]
    assert full.min() > 0.7
    # oracle: entropy of the same window computed independently
    a, b = np.searchsorted(spec.frame_times, [times[50] - 2.5, times[50] + 2.5])
    onsets = np.r_[0.0, np.maximum(np.diff(spec.magnitudes[:, 10]), 0)][a:b]
    o = (onsets - onsets.mean()) * (0.5 - 0.5 * np.cos(2 * np.pi * np.arange(b - a) / (b - a)))
    energy = np.abs(np.fft.rfft(o)[1:]) ** 2
    assert values[50] == pytest.approx(1 - entropy(energy) / np.log(energy.size), abs=1e-12)


def test_white_noise_onsets_have_unclear_pulse():
    rng = SeededRng(4)
    spec = spectrogram(np.abs(rng.normal((600, 1025))))
    _, values = pulse_clarity(spec)
    assert values.max() < 0.3


def test_clicks_are_clearer_than_noise_in_audio():
    t = np.arange(10 * SR)
    clicks = np.zeros(t.size)
    for start in range(0, t.size - 200, SR // 8):
        clicks[start : start + 200] = np.hanning(200)
    noise = SeededRng(6).uniform(t.size, -1, 1)
    _, c_clicks = pulse_clarity(stft(AudioSignal(clicks, SR)))
    _, c_noise = pulse_clarity(stft(AudioSignal(noise, SR)))
    assert c_clicks.mean() > c_noise.mean() + 0.2


def test_all_zero_window_has_zero_clarity():
    _, values = pulse_clarity(spectrogram(np.zeros((300, 1025))))
    assert not values.any()


def test_spectrogram_must_span_the_window():
    with pytest.raises(LengthError):
        pulse_clarity(spectrogram(np.zeros((100, 1025))))


def test_onset_energy_excludes_dc():
    assert not onset_energy_distribution(np.full(32, 4.0)).any()


# -- flux series ------------------------------------------------------------------------------


def test_silence_flux_series():
    _, v = subband_flux_series(AudioSignal(np.zeros(8 * SR), SR), (50, 100))
    assert not v.any()


def test_single_onset_averaged_over_window():
    mags = np.zeros((400, 1025))
    mags[200:, 3] = 1.5
    spec = spectrogram(mags)
    times, v = subband_flux_series(spec, (50, 100))
    i = 60  # window centred at 4.8 s, contains frame 200 (4.67 s)
    a, b = np.searchsorted(spec.frame_times, [times[i] - 2.5, times[i] + 2.5])
    assert a <= 200 < b
    assert v[i] == pytest.approx(1.5 / (b - a), rel=1e-12)


def test_flux_scales_linearly_and_clarity_is_scale_free():
    x = SeededRng(12).uniform(7 * SR, -0.5, 0.5) * np.repeat(SeededRng(13).uniform(70), SR // 10)
    sig = AudioSignal(x, SR)
    _, base = extract_features(sig)
    _, doubled = extract_features(sig.scaled(2.0))
    np.testing.assert_allclose(doubled[:, :2], 2 * base[:, :2], rtol=1e-9)
    np.testing.assert_allclose(doubled[:, 2], base[:, 2], atol=1e-9)
    assert (base[:, :2] >= 0).all()


# -- alignment ---------------------------------------------------------------------------------


def test_alignment_identity_at_motion_rate():
    times = np.arange(90) / 30
    values = SeededRng(1).uniform((90, 3))
    out = align_features(times, values, 30, 90)
    np.testing.assert_allclose(out.values, values, atol=1e-15)


def test_alignment_midpoint():
    out = align_features([0.0, 1.0], [[0, 0, 0], [1, 1, 1]], 2.0, 2)
    np.testing.assert_allclose(out.values[1], [0.5, 0.5, 0.5])


def test_alignment_12_5_hz_to_1800_frames():
    times = np.arange(751) * 0.08
    values = SeededRng(5).uniform((751, 3))
    out = align_features(times, values, 30.0, 1800)
    assert len(out) == 1800 and out.rate == 30.0
    # endpoint preservation
    np.testing.assert_allclose(out.values[0], values[0])
    last_t = 1799 / 30
    np.testing.assert_allclose(out.values[-1], [np.interp(last_t, times, values[:, c]) for c in range(3)])


def test_alignment_coverage_error():
    with pytest.raises(CoverageError):
        align_features(np.arange(10) * 0.08, np.zeros((10, 3)), 30.0, 60)


def test_sixty_second_song_gives_1800_rows():
    sig = AudioSignal(SeededRng(3).uniform(60 * SR, -0.2, 0.2), SR)
    assert len(features_for_motion(sig, 1800)) == 1800


# -- white noise -----------------------------------------------------------------------------------


def test_white_noise_features_are_seeded_and_unclear():
    a = white_noise_features(60.0, SeededRng(7))
    b = white_noise_features(60.0, SeededRng(7))
    assert a == b
    assert len(a) == 1800 and a.provenance is Provenance.WHITE_NOISE
    assert a.values[:, 2].mean() < 0.3
    assert a != white_noise_features(60.0, SeededRng(8))
    with pytest.raises(ParameterError):
        white_noise_features(4.0, SeededRng(7))


def test_feature_csv_roundtrip(tmp_path):
    fs = FeatureSeries(SeededRng(2).uniform((5, 3)), 30.0)
    write_feature_csv(tmp_path / "f.csv", fs)
    text = (tmp_path / "f.csv").read_text().splitlines()
    assert text[0] == CSV_HEADER == "time_s,flux_low,flux_high,pulse_clarity"
    assert len(text) == 6
    back = read_feature_csv(tmp_path / "f.csv")
    np.testing.assert_allclose(back.values, fs.values, rtol=1e-8)
    assert back.rate == 30.0


def test_feature_series_invariants():
    with pytest.raises(ParameterError):
        FeatureSeries([[0.0, 0.0, 1.5]], 30)
    with pytest.raises(ParameterError):
        FeatureSeries([[-1.0, 0.0, 0.5]], 30)
