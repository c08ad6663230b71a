"""
The dancegen command line, end to end
=====================================

Writes a small synthetic corpus (five 12 s recordings with stimuli), then
drives every subcommand through ``dancegen.cli.main``, exactly as the
``dancegen`` executable would.
"""

import tempfile
from pathlib import Path

import numpy as np

from dancegen.audio import write_wav
from dancegen.cli import main
from dancegen.geneval import SynthSpec, control_audio, synth_marker_motion
from dancegen.mocap import write_mocap_tsv
from dancegen.numerics import SeededRng

work = Path(tempfile.mkdtemp(prefix="dancegen-"))
(work / "raw").mkdir()
(work / "audio").mkdir()
for i in range(5):
    rng = SeededRng(i)
    control = 0.3 + 0.2 * np.sin(np.arange(2880) / 240 / 3 + i)
    write_mocap_tsv(work / "raw" / f"rec{i}.tsv", synth_marker_motion(control, SeededRng(100), index=i))
    write_wav(work / "audio" / f"rec{i}.wav", control_audio(control, rng.spawn("audio"), SynthSpec(rate=240.0, sample_rate=16000.0)))

# %%
# One settings file shared by every step.  Unknown keys are rejected.
(work / "run.cfg").write_text(
    f"mocap_dir = {work / 'raw'}\naudio_dir = {work / 'audio'}\noutput_dir = {work / 'out'}\n"
    "window = 60\nhop = 20\ntrain_frac = 0.6\nval_frac = 0.2\n"
    "learning_rate = 0.01\nbatch_size = 8\nmax_epochs = 15\nseed = 3\n"
)
cfg = ["--config", str(work / "run.cfg")]
out = work / "out"

assert main(["preprocess", *cfg]) == 0
assert main(["features", *cfg, "--data", str(out)]) == 0
assert main(["train", *cfg, "--data", str(out)]) == 0
assert main(["train", "--profile", "paper", "--dry-run"]) == 0

# %%
# Generate from a test recording with its own features and with white noise,
# then compare jitter and plot.  Twelve-second recordings with five-second
# feature windows give features that barely change within a recording, so
# this network learns to ignore them and the two outputs nearly coincide;
# 03_toy_conditioning.py shows the conditioning effect on a larger corpus.
common = ["--checkpoint", str(out / "model.mdrn"), "--primer", str(out / "motion" / "rec1.tsv"),
          "--features", str(out / "features" / "rec1.csv"), "--seed", "0"]
assert main(["generate", *common, "--output", str(work / "original.tsv")]) == 0
assert main(["generate", *common, "--substitute", "whitenoise", "--output", str(work / "noise.tsv")]) == 0
main(["eval", str(work / "original.tsv"), str(work / "noise.tsv"), "--noise", str(work / "noise.tsv")])
assert main(["plot", str(work / "noise.tsv"), "--output", str(work / "noise.svg")]) == 0
print("outputs in", work)
