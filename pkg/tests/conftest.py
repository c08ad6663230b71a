import json
import time

import numpy as np
import pytest

from dancegen.audio import write_wav
from dancegen.cli import main
from dancegen.geneval import SynthSpec, control_audio, synth_marker_motion, train_toy_model
from dancegen.mocap import write_mocap_tsv
from dancegen.numerics import SeededRng

CAPTURE_RATE = 240.0
CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion listed in the terminal summary")
    config.stash[CRITERIA] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = dict(report.user_properties).get("detail", "")
        item.config.stash[CRITERIA].append((marker.args[0], report.passed, detail))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(CRITERIA, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in results:
        line = f"{'PASS' if passed else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
AUDIO_SPEC = SynthSpec(rate=CAPTURE_RATE, sample_rate=16000.0)


def write_raw_corpus(root, n_recordings=5, seconds=12.0):
    """Marker TSVs at 240 Hz and matching WAV stimuli named after them."""
    (root / "raw").mkdir(parents=True, exist_ok=True)
    (root / "audio").mkdir(exist_ok=True)
    n = int(seconds * CAPTURE_RATE)
    for i in range(n_recordings):
        rng = SeededRng(i)
        c = 0.3 + 0.2 * np.sin(np.arange(n) / CAPTURE_RATE / 3 + i)
        write_mocap_tsv(root / "raw" / f"rec{i}.tsv", synth_marker_motion(c, SeededRng(100), CAPTURE_RATE, index=i))
        write_wav(root / "audio" / f"rec{i}.wav", control_audio(c, rng.spawn("audio"), AUDIO_SPEC))
    return root


@pytest.fixture(scope="session")
def raw_corpus(tmp_path_factory):
    return write_raw_corpus(tmp_path_factory.mktemp("corpus"))


def pipeline_config(corpus, out):
    return "\n".join(
        [
            f"mocap_dir = {corpus / 'raw'}",
            f"audio_dir = {corpus / 'audio'}",
            f"output_dir = {out}",
            "window = 60",
            "hop = 20",
            "train_frac = 0.6",
            "val_frac = 0.2",
            "learning_rate = 0.01",
            "batch_size = 8",
            "max_epochs = 2",
            "",
        ]
    )


def run_pipeline(corpus, workdir, seed=7):
    """preprocess -> features -> train (2 epochs) -> generate; returns the output directory."""
    workdir.mkdir(parents=True, exist_ok=True)
    out = workdir / "out"
    cfg = workdir / "run.cfg"
    cfg.write_text(pipeline_config(corpus, out))
    base = ["--config", str(cfg), "--seed", str(seed)]
    assert main(["preprocess", *base]) == 0
    assert main(["features", *base, "--data", str(out)]) == 0
    assert main(["train", *base, "--data", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    name = next(r["name"] for r in manifest["recordings"] if r["split"] == "test")
    assert main(["generate", "--seed", str(seed), "--checkpoint", str(out / "model.mdrn"),
                 "--primer", str(out / "motion" / f"{name}.tsv"),
                 "--features", str(out / "features" / f"{name}.csv"),
                 "--output", str(out / "generated.tsv")]) == 0
    return out


@pytest.fixture(scope="session")
def toy_model():
    """The desk-scale conditioning model, trained once per session (about 80 s)."""
    start = time.perf_counter()
    toy = train_toy_model()
    toy.seconds = time.perf_counter() - start
    return toy
