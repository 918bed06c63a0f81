import os
from pathlib import Path

import numpy as np
import pytest

from mpsgrok import experiment
from mpsgrok.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_RUN, main
from mpsgrok.config import ConfigError, ExperimentConfig, dump_config, loads_config
from mpsgrok.experiment import (RunError, RunLock, SchemaError, analyze, compare, load_run,
                                oinfo_window, plot_run, read_summary, read_table, read_te,
                                score_transform, train, transition_sweep)
from mpsgrok.plotting import PLOT_FILES

SMALL = """[experiment]
format_version = 1
dataset = synthetic
synthetic.n_per_class = 12
synthetic.n_features = 8
synthetic.class_sep = 0.3
synthetic.noise = 0.2
model.encoding_scale = 1.5707963267948966
model.chi_max = 4
sweep.learning_rate = 0.5
sweep.n_sweeps = {sweeps}
analysis.tau_max = 3
oinfo.window_len = 6
"""


def small_config(tmp_path, sweeps=12) -> Path:
    path = tmp_path / "small.cfg"
    path.write_text(SMALL.format(sweeps=sweeps))
    return path


def small_cfg(sweeps=12, **changes) -> ExperimentConfig:
    return loads_config(SMALL.format(sweeps=sweeps), changes)


def snapshot(run_dir: Path) -> dict[str, bytes]:
    return {str(p.relative_to(run_dir)): p.read_bytes()
            for p in sorted(run_dir.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def analyzed_run(tmp_path_factory):
    run = tmp_path_factory.mktemp("run") / "a"
    train(small_cfg(), run)
    analyze(run)
    return run


# -- training artifacts -----------------------------------------------------

def test_training_writes_versioned_tables(analyzed_run):
    names = {p.name for p in analyzed_run.iterdir()}
    for table in experiment.TRACE_TABLES + ("initial", "te", "oinfo", "summary"):
        assert f"{table}.csv" in names
    assert {"config.cfg", "state.txt", "checkpoints"} <= names
    assert "run.lock" not in names
    first = (analyzed_run / "metrics.csv").read_text().splitlines()[0]
    assert first == "# mpsgrok-schema 1 metrics"
    assert (analyzed_run / "state.txt").read_text() == "completed_sweeps = 12\n"
    ckpts = sorted(p.name for p in (analyzed_run / "checkpoints").iterdir())
    assert ckpts == ["sweep_0000.ckpt", "sweep_0011.ckpt", "sweep_0012.ckpt"]


def test_loaded_run_shapes(analyzed_run):
    data = load_run(analyzed_run)
    assert data.n_sweeps == 12
    assert data.entropy.shape == (12, 7)
    assert data.label_entropy.shape == (12, 3, 7)
    assert data.magnetization.shape == (12, 3, 8)
    assert data.rho.shape == (12, 3, 3)
    assert data.sample_scores.shape == (12, 18, 3)
    np.testing.assert_array_equal(data.metrics["sweep"], np.arange(1, 13))
    np.testing.assert_allclose(np.trace(data.rho, axis1=1, axis2=2), 1.0, atol=1e-10)
    np.testing.assert_allclose(data.mean_scores, data.sample_scores.mean(axis=1), atol=1e-12)


def test_analysis_tables(analyzed_run):
    te = read_te(analyzed_run)
    assert len(te) == 6 * 3
    assert {key[2] for key in te} == {1, 2, 3}
    assert all(sd >= 0 for _, sd in te.values())
    header, rows = read_table(analyzed_run / "oinfo.csv", "oinfo")
    assert header == ["sweep", "mean", "std", "in_window"]
    assert [int(r[0]) for r in rows] == list(range(1, 13))
    summary = read_summary(analyzed_run)
    t = int(summary["transition_sweep"])
    assert 1 <= t <= 12
    lo, hi = int(summary["window_lo"]), int(summary["window_hi"])
    assert [int(r[3]) for r in rows] == [int(lo <= s <= hi) for s in range(1, 13)]


def test_retraining_requires_resume(analyzed_run):
    with pytest.raises(RunError, match="resume"):
        train(small_cfg(), analyzed_run)


def test_resume_with_changed_training_settings_is_refused(tmp_path):
    run = tmp_path / "r"
    train(small_cfg(sweeps=6), run)
    with pytest.raises(RunError, match="differs"):
        train(small_cfg(sweeps=8, learning_rate=0.4), run, resume=True)
    with pytest.raises(RunError, match="more than"):
        train(small_cfg(sweeps=5, tau_max=3), run, resume=True)


def test_extension_equals_single_run(tmp_path):
    straight, staged = tmp_path / "straight", tmp_path / "staged"
    train(small_cfg(sweeps=10), straight)
    train(small_cfg(sweeps=6, tau_max=3), staged)
    train(small_cfg(sweeps=10), staged, resume=True)
    assert snapshot(straight) == snapshot(staged)


def test_interrupted_run_resumes_byte_identically(tmp_path, monkeypatch):
    reference, broken = tmp_path / "ref", tmp_path / "broken"
    train(small_cfg(sweeps=9), reference)
    real_sweep = experiment.sweep

    def failing(mps, train_set, cfg, test, engine, index):
        if index == 5:
            raise KeyboardInterrupt
        return real_sweep(mps, train_set, cfg, test, engine, index)

    monkeypatch.setattr(experiment, "sweep", failing)
    with pytest.raises(KeyboardInterrupt):
        train(small_cfg(sweeps=9), broken)
    assert (broken / "state.txt").read_text() == "completed_sweeps = 4\n"
    assert not (broken / "run.lock").exists()
    monkeypatch.setattr(experiment, "sweep", real_sweep)
    train(small_cfg(sweeps=9), broken, resume=True)
    assert snapshot(reference) == snapshot(broken)


def test_identical_configs_give_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for run in (a, b):
        train(small_cfg(sweeps=10), run)
        analyze(run)
    assert snapshot(a) == snapshot(b)


def test_seed_changes_the_run(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    train(small_cfg(sweeps=6, tau_max=3), a)
    train(small_cfg(sweeps=6, tau_max=3, seed=1), b)
    assert (a / "metrics.csv").read_bytes() != (b / "metrics.csv").read_bytes()


def test_parallel_analysis_matches_serial(tmp_path, monkeypatch, analyzed_run):
    run = tmp_path / "copy"
    run.mkdir()
    for name, blob in snapshot(analyzed_run).items():
        (run / name).parent.mkdir(parents=True, exist_ok=True)
        (run / name).write_bytes(blob)
    monkeypatch.setenv(experiment.WORKERS_ENV, "3")
    analyze(run)
    assert (run / "te.csv").read_bytes() == (analyzed_run / "te.csv").read_bytes()
    monkeypatch.setenv(experiment.WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        experiment.worker_count()


# -- run directory safety ---------------------------------------------------

def test_live_lock_blocks_a_second_writer(tmp_path):
    with RunLock(tmp_path):
        with pytest.raises(RunError, match="locked"):
            train(small_cfg(sweeps=4, tau_max=3), tmp_path)
    assert not (tmp_path / "run.lock").exists()


def test_stale_lock_is_replaced(tmp_path):
    (tmp_path / "run.lock").write_text("999999999\n")
    train(small_cfg(sweeps=4, tau_max=3), tmp_path)
    assert (tmp_path / "state.txt").exists()


def test_schema_mismatch_is_refused(tmp_path, analyzed_run):
    run = tmp_path / "bad"
    run.mkdir()
    for name, blob in snapshot(analyzed_run).items():
        (run / name).parent.mkdir(parents=True, exist_ok=True)
        (run / name).write_bytes(blob)
    text = (run / "entropy.csv").read_text()
    (run / "entropy.csv").write_text(text.replace("mpsgrok-schema 1", "mpsgrok-schema 2", 1))
    with pytest.raises(SchemaError):
        load_run(run)
    with pytest.raises(SchemaError):
        train(small_cfg(sweeps=14), run, resume=True)
    (run / "entropy.csv").write_text(text.split("\n", 1)[1])
    with pytest.raises(SchemaError, match="schema line"):
        load_run(run)


def test_missing_run_directory(tmp_path):
    with pytest.raises(RunError):
        load_run(tmp_path)


# -- comparison and plots ---------------------------------------------------

def test_compare_identical_runs_gives_zero(tmp_path, analyzed_run):
    out = compare(analyzed_run, analyzed_run, tmp_path / "cmp")
    header, rows = read_table(out, "zscores")
    assert header[:4] == ["source", "target", "tau", "z"]
    assert len(rows) == 18
    assert all(float(r[3]) == 0.0 for r in rows)


def test_compare_needs_matching_delays(tmp_path, analyzed_run):
    other = tmp_path / "other"
    train(small_cfg(), other)
    analyze(other, tau_max=2)
    with pytest.raises(RunError, match="different"):
        compare(analyzed_run, other, tmp_path / "cmp")


def test_plots_are_written_deterministically(analyzed_run):
    paths = plot_run(analyzed_run)
    assert [p.name for p in paths] == list(PLOT_FILES)
    first = {p.name: p.read_bytes() for p in paths}
    assert all(blob.lstrip().startswith(b"<?xml") for blob in first.values())
    plot_run(analyzed_run)
    assert {p.name: p.read_bytes() for p in paths} == first


def test_plot_before_analysis(tmp_path):
    train(small_cfg(sweeps=4, tau_max=3), tmp_path)
    with pytest.raises(RunError, match="te.csv"):
        plot_run(tmp_path)


# -- analysis helpers -------------------------------------------------------

def test_transition_is_the_largest_drop():
    assert transition_sweep([2.0, 1.9, 1.0, 0.9], 2.1) == 3
    assert transition_sweep([1.0, 0.9], 2.0) == 1


def test_score_probabilities():
    p = score_transform(np.array([[3.0, 4.0, 0.0], [0.0, 0.0, 0.0]]), "probability")
    np.testing.assert_allclose(p, [[9 / 25, 16 / 25, 0.0], [1 / 3, 1 / 3, 1 / 3]])
    raw = np.array([[1.0, -2.0, 0.5]])
    assert score_transform(raw, "raw") is raw


def test_window_bounds_are_clipped():
    cfg = small_cfg(sweeps=20)
    assert oinfo_window(cfg, 20, 3) == (1, 9)
    assert oinfo_window(cfg, 20, 18) == (12, 20)
    fixed = small_cfg(sweeps=20, oinfo_window="2:30")
    with pytest.raises(ConfigError):
        oinfo_window(fixed, 20, 5)


@pytest.mark.parametrize("reduction", ["mean", "sample"])
def test_windowed_oinfo_variants(analyzed_run, reduction):
    data = load_run(analyzed_run)
    cfg = small_cfg(oinfo_reduction=reduction, oinfo_sample=3)
    rows = experiment.oinfo_table(data, cfg, k=4)
    assert [r[0] for r in rows] == list(range(1, 13))
    assert all(np.isfinite(r[1]) for r in rows)


# -- command line -----------------------------------------------------------

def test_cli_round_trip(tmp_path, capsys):
    cfg = small_config(tmp_path, sweeps=8)
    run = tmp_path / "cli"
    assert main(["train", "--config", str(cfg), "--out", str(run), "--chi", "3"]) == EXIT_OK
    assert loads_config((run / "config.cfg").read_text()).chi_max == 3
    assert main(["analyze", str(run), "--tau-max", "2"]) == EXIT_OK
    assert read_summary(run)["tau_max"] == "2"
    assert main(["plot", str(run)]) == EXIT_OK
    assert main(["compare", str(run), str(run), "--out", str(tmp_path / "z")]) == EXIT_OK
    assert (tmp_path / "z" / "zscores.csv").exists()
    out = capsys.readouterr().out
    assert "te.svg" in out


def test_cli_resume_and_overrides(tmp_path):
    cfg = small_config(tmp_path, sweeps=8)
    run = tmp_path / "cli"
    assert main(["train", "--config", str(cfg), "--out", str(run), "--sweeps", "5"]) == EXIT_OK
    assert main(["train", "--config", str(cfg), "--out", str(run)]) == EXIT_RUN
    assert main(["train", "--config", str(cfg), "--out", str(run), "--resume"]) == EXIT_OK
    assert load_run(run).n_sweeps == 8


def test_cli_exit_codes(tmp_path, capsys):
    cfg = small_config(tmp_path, sweeps=4)
    assert main(["train", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) \
        == EXIT_CONFIG
    # tau_max of the file (3) is fine; --sweeps 3 makes it invalid
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "x"),
                 "--sweeps", "3"]) == EXIT_CONFIG
    run = tmp_path / "r"
    assert main(["train", "--config", str(cfg), "--out", str(run), "--tau-max", "2"]) == EXIT_OK
    (run / "metrics.csv").write_text("# mpsgrok-schema 7 metrics\n")
    assert main(["analyze", str(run)]) == EXIT_DATA
    assert main(["plot", str(tmp_path / "empty")]) == EXIT_RUN
    err = capsys.readouterr().err
    assert "config error" in err and "data error" in err and "run error" in err


def test_bad_fashion_paths_exit_as_data_errors(tmp_path):
    img = tmp_path / "img.idx"
    img.write_bytes(b"\x00\x00\x08\x02" + bytes(20))
    text = dump_config(ExperimentConfig(n_sweeps=4, tau_max=2)).replace(
        "fashion.images = data/fashion-mnist/fashion3-images-idx3-ubyte.gz",
        f"fashion.images = {img}")
    cfg = tmp_path / "f.cfg"
    cfg.write_text(text)
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "run")]) == EXIT_DATA


def test_module_entry_point_has_help():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "mpsgrok.cli", "--help"], capture_output=True,
                          text=True, env={**os.environ, "PYTHONPATH": "src"})
    assert proc.returncode == 0
    assert "MPSGROK_WORKERS" in proc.stdout
