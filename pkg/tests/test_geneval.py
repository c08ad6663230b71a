import json
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dancegen.audio import FeatureSeries, Provenance
from dancegen.errors import AlignmentError, CoverageError, LengthError, ParameterError, VersionError
from dancegen.geneval import (
    GenerationRun,
    Mode,
    SynthSpec,
    build_window_dataset,
    control_features,
    generate_autoregressive,
    generate_primed,
    jitter_metric,
    substitute_features,
    synth_dataset,
    synth_motion,
    trajectory_plot,
    trajectory_svg,
)
from dancegen.mdrnn import Checkpoint, ModelConfig, init_weights, zero_weights
from dancegen.mocap import MotionSequence, NormStats, minmax_apply, minmax_fit
from dancegen.numerics import SeededRng

SMALL = SynthSpec(n_recordings=3, duration_s=8.0)
CFG = ModelConfig(input_dim=69, output_dim=66, lstm_units=(8,), mixtures=2)


def seq(frames, rate=30.0):
    return MotionSequence(np.asarray(frames, float), rate)


@pytest.fixture(scope="module")
def small_data():
    return synth_dataset(SMALL, SeededRng(5))


@pytest.fixture(scope="module")
def ckpt(small_data):
    return Checkpoint(
        CFG,
        init_weights(CFG, SeededRng(1)),
        minmax_fit([m.flat() for m in small_data.motions]),
        minmax_fit([f.values for f in small_data.features]),
    )


def primer_and_features(data, n=40):
    m, f = data.motions[0], data.features[0]
    return m.with_frames(m.frames[:n]), FeatureSeries(f.values[:n], f.rate, f.provenance)


# -- jitter ------------------------------------------------------------------------------------


def test_constant_pose_has_zero_jitter():
    report = jitter_metric(seq(np.ones((10, 22, 3))))
    assert report.mean_displacement == 0 and report.mean_acceleration == 0
    assert all(j["path_length"] == 0 for j in report.per_joint)


def test_uniform_linear_motion():
    d = 0.02
    frames = np.zeros((20, 22, 3))
    frames[:, :, 0] = d * np.arange(20)[:, None]
    report = jitter_metric(seq(frames))
    assert report.mean_displacement == pytest.approx(d, rel=1e-12)
    assert report.mean_acceleration == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(report.path_lengths, 19 * d)


def test_alternating_steps_have_acceleration_2d():
    d = 0.05
    frames = np.zeros((11, 22, 3))
    frames[1::2, :, 1] = d  # steps of +d, -d, +d, ...
    report = jitter_metric(seq(frames))
    assert report.mean_displacement == pytest.approx(d)
    assert report.mean_acceleration == pytest.approx(2 * d)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(-5, 5), st.floats(0.1, 10))
def test_jitter_translation_invariant_and_scale_linear(seed, shift, scale):
    frames = SeededRng(seed).normal((12, 22, 3))
    base = jitter_metric(seq(frames))
    moved = jitter_metric(seq(frames + shift))
    scaled = jitter_metric(seq(frames * scale))
    assert moved.mean_displacement == pytest.approx(base.mean_displacement, rel=1e-9)
    assert moved.mean_acceleration == pytest.approx(base.mean_acceleration, rel=1e-9)
    assert scaled.mean_displacement == pytest.approx(scale * base.mean_displacement, rel=1e-9)
    assert scaled.mean_acceleration == pytest.approx(scale * base.mean_acceleration, rel=1e-9)
    assert min(base.mean_displacement, base.mean_acceleration, *base.path_lengths) >= 0


def test_jitter_needs_three_frames():
    with pytest.raises(LengthError):
        jitter_metric(seq(np.zeros((2, 22, 3))))


def test_jitter_json_shape(tmp_path):
    report = jitter_metric(seq(SeededRng(0).normal((5, 22, 3))))
    report.write(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert {"mean_displacement", "mean_acceleration", "per_joint"} <= set(data)
    assert len(data["per_joint"]) == 22
    assert data["per_joint"][3]["joint"] == 3


# -- trajectory plot ---------------------------------------------------------------------------------


def _polylines(svg):
    return [[tuple(map(float, p.split(","))) for p in m.split()] for m in re.findall(r'points="([^"]*)"', svg)]


def test_plot_structure_for_1800_frames():
    frames = SeededRng(2).normal((1800, 22, 3))
    svg = trajectory_svg(seq(frames), [16, 20, 4, 8])
    lines = _polylines(svg)
    assert len(lines) == 4 and all(len(line) == 1800 for line in lines)
    assert 'width="1200"' in svg and 'height="300"' in svg
    xs = [p[0] for p in lines[0]]
    assert xs == sorted(xs)


def test_constant_pose_plots_horizontal_lines():
    for line in _polylines(trajectory_svg(seq(np.ones((50, 22, 3))), [0, 1])):
        assert len({y for _, y in line}) == 1


def test_plot_bytes_are_deterministic(tmp_path):
    s = seq(SeededRng(3).normal((100, 22, 3)))
    trajectory_plot(s, [1, 2], tmp_path / "a.svg")
    trajectory_plot(s, [1, 2], tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_plot_rejects_bad_joints():
    with pytest.raises(ParameterError):
        trajectory_svg(seq(np.zeros((5, 22, 3))), [22])
    with pytest.raises(ParameterError):
        trajectory_svg(seq(np.zeros((5, 22, 3))), [])


# -- synthetic data ------------------------------------------------------------------------------------


def test_zero_control_is_motionless():
    m = synth_motion(np.zeros(50), SeededRng(0))
    assert not np.diff(m.frames, axis=0).any()


def test_control_scales_path_length_exactly():
    one = jitter_metric(synth_motion(np.full(120, 1.0), SeededRng(9))).path_lengths
    two = jitter_metric(synth_motion(np.full(120, 2.0), SeededRng(9))).path_lengths
    np.testing.assert_allclose(two / one, 2.0, atol=1e-9)


def test_synth_dataset_is_seed_deterministic(small_data):
    again = synth_dataset(SMALL, SeededRng(5))
    assert all(a == b for a, b in zip(small_data.motions, again.motions))
    assert all(a == b for a, b in zip(small_data.features, again.features))
    other = synth_dataset(SMALL, SeededRng(6))
    assert small_data.motions[0] != other.motions[0]


def test_flux_features_follow_the_control():
    spec = SynthSpec(duration_s=30.0)
    c = np.linspace(0.1, 0.5, 900)
    f = control_features(c, SeededRng(1), spec)
    assert f.provenance is Provenance.SYNTHETIC and len(f) == 900
    inner = slice(150, 750)  # away from truncated edge windows
    assert np.corrcoef(f.values[inner, 0], c[inner])[0, 1] > 0.95
    assert np.corrcoef(f.values[inner, 1], c[inner])[0, 1] > 0.99


def test_window_dataset_uses_training_statistics(small_data):
    ds = build_window_dataset(small_data.motions, small_data.features, [0, 1], [2], window=60, hop=30)
    assert ds.motion_stats == minmax_fit([small_data.motions[i].flat() for i in (0, 1)])
    assert ds.train[0].inputs.shape == (60, 69) and ds.train[0].targets.shape == (60, 66)
    assert len(ds.train) == 2 * ((240 - 60) // 30)
    train_inputs = np.concatenate([w.inputs for w in ds.train])
    assert train_inputs.min() >= 0 and train_inputs.max() <= 1


# -- generation ------------------------------------------------------------------------------------------


def test_primed_output_length_and_determinism(ckpt, small_data):
    primer, feats = primer_and_features(small_data)
    a = generate_primed(ckpt, primer, feats, SeededRng(0), 0.0, 0.0)
    b = generate_primed(ckpt, primer, feats, SeededRng(99), 0.0, 0.0)
    assert a.n_frames == primer.n_frames - 1 and a == b
    c = generate_primed(ckpt, primer, feats, SeededRng(1))
    d = generate_primed(ckpt, primer, feats, SeededRng(1))
    assert c == d and c != a
    assert np.isfinite(c.frames).all()


def test_zero_network_emits_the_denormalised_head_mean(small_data):
    stats = minmax_fit([m.flat() for m in small_data.motions])
    zero = Checkpoint(CFG, zero_weights(CFG), stats, None)
    primer, feats = primer_and_features(small_data, 10)
    out = generate_primed(zero, primer, feats, SeededRng(0), 0.0, 0.0)
    # every component has mean 0 in normalised units, i.e. the channel minimum
    np.testing.assert_array_equal(out.flat(), np.tile(stats.minimum, (9, 1)))


def test_primer_feature_mismatch(ckpt, small_data):
    primer, feats = primer_and_features(small_data)
    short = FeatureSeries(feats.values[:-1], feats.rate)
    with pytest.raises(AlignmentError):
        generate_primed(ckpt, primer, short, SeededRng(0))


def test_statistics_mismatch_is_a_version_error(ckpt, small_data):
    primer, feats = primer_and_features(small_data)
    fewer = MotionSequence(primer.frames[:, :21], primer.rate)
    with pytest.raises(VersionError):
        generate_primed(ckpt, fewer, feats, SeededRng(0))


def test_autoregressive_generation(ckpt, small_data):
    primer, feats = primer_and_features(small_data, 60)
    seed_frames = primer.with_frames(primer.frames[:10])
    assert generate_autoregressive(ckpt, seed_frames, feats, SeededRng(0), 0).n_frames == 0
    a = generate_autoregressive(ckpt, seed_frames, feats, SeededRng(4), 30, 0.0, 0.0)
    b = generate_autoregressive(ckpt, seed_frames, feats, SeededRng(5), 30, 0.0, 0.0)
    assert a.n_frames == 30 and a == b
    with pytest.raises(CoverageError):
        generate_autoregressive(ckpt, seed_frames, feats, SeededRng(0), 52)


def test_identity_substitution_changes_nothing(ckpt, small_data):
    primer, feats = primer_and_features(small_data)
    run = GenerationRun(ckpt, primer, feats, seed=3)
    same = substitute_features(run, FeatureSeries(feats.values, feats.rate, feats.provenance))
    assert same.run() == run.run()
    assert run.metadata["mode"] == Mode.PRIMED.value


def test_substitution_swaps_only_features(ckpt, small_data):
    primer, feats = primer_and_features(small_data)
    run = GenerationRun(ckpt, primer, feats, seed=3, pi_temp=0.5, sigma_temp=0.5)
    zeros = FeatureSeries(np.zeros((100, 3)), feats.rate, Provenance.SUBSTITUTED_SONG)
    swapped = substitute_features(run, zeros)
    assert (swapped.seed, swapped.pi_temp, swapped.sigma_temp) == (3, 0.5, 0.5)
    assert swapped.primer is run.primer and len(swapped.features) == primer.n_frames
    assert swapped.metadata["feature_provenance"] == "substituted_song"
    assert np.isfinite(swapped.run().frames).all()
    with pytest.raises(CoverageError):
        substitute_features(run, FeatureSeries(np.zeros((10, 3)), feats.rate))


# -- trained toy model ------------------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_free_running_toy_stays_in_the_data_hull(toy_model, seed):
    motion = toy_model.data.motions[toy_model.test_index]
    feats = toy_model.data.features[toy_model.test_index]
    seed_frames = motion.with_frames(motion.frames[:60])
    stats = toy_model.checkpoint.motion_stats
    # reduced scale temperature: the whole 300-step trajectory stays in [-0.5, 1.5]
    out = generate_autoregressive(toy_model.checkpoint, seed_frames, feats, SeededRng(seed), 300, 1.0, 0.5)
    z = minmax_apply(out.flat(), stats)
    assert out.n_frames == 300 and z.min() >= -0.5 and z.max() <= 1.5
    # full temperature: rare single-sample tail excursions, no drift
    out = generate_autoregressive(toy_model.checkpoint, seed_frames, feats, SeededRng(seed), 300)
    z = minmax_apply(out.flat(), stats)
    assert np.mean((z < -0.5) | (z > 1.5)) < 1e-3
    assert np.abs(z[-100:].mean(axis=0) - 0.5).max() < 0.5
