"""
From raw markers and audio to model inputs
==========================================

A synthetic 20 s marker recording at 240 Hz goes through the motion chain
(centre on the root, reduce 43 markers to 22 joints, smooth, keep every 8th
frame) and a matching audio track goes through the feature chain (sub-band
flux and pulse clarity over 5 s windows, resampled to the 30 Hz motion
frames).
"""

import numpy as np

from dancegen.audio import features_for_motion
from dancegen.geneval import SynthSpec, control_audio, synth_marker_motion
from dancegen.mocap import (
    DEFAULT_ROOT,
    load_skeleton_map,
    make_windows,
    minmax_apply,
    minmax_fit,
    preprocess_recording,
)
from dancegen.numerics import SeededRng

rng = SeededRng(0)

# a control curve sets how energetic the movement and the audio are
n = 20 * 240
control = 0.3 + 0.2 * np.sin(2 * np.pi * np.arange(n) / 240 / 8)
raw = synth_marker_motion(control, rng)
print("raw markers:", raw.frames.shape, "at", raw.rate, "Hz")

# %%
# Motion chain.  The bundled skeleton map groups markers into joints.
skeleton = load_skeleton_map()
joints = preprocess_recording(raw, skeleton, DEFAULT_ROOT, normalized_cutoff=0.03, factor=8)
print("joints:", joints.frames.shape, "at", joints.rate, "Hz")

# %%
# Audio chain.  White noise whose gain follows the control.
audio = control_audio(control, rng.spawn("audio"), SynthSpec(rate=240.0))
features = features_for_motion(audio, joints.n_frames, joints.rate)
print("features:", features.values.shape, "columns flux_low, flux_high, pulse_clarity")
print("first row:", np.round(features.values[0], 3))
print("flux_high follows the control:", np.corrcoef(features.values[60:540, 1], control[::8][60:540])[0, 1].round(3))

# %%
# Min-max scaling and training windows.  Each window pairs 69 input channels
# (66 motion + 3 audio) with the next frame's 66 motion channels.
motion_stats = minmax_fit([joints.flat()])
feature_stats = minmax_fit([features.values])
inputs = np.hstack([minmax_apply(joints.flat(), motion_stats), minmax_apply(features.values, feature_stats)])
windows = make_windows(inputs, 66, window=300, hop=1)
print(len(windows), "windows of", windows[0].inputs.shape, "->", windows[0].targets.shape)
