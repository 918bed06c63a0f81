"""Run orchestration: training with crash-safe per-sweep artifacts, analysis, comparison.

A run directory holds

* ``config.cfg``: the configuration snapshot,
* trace tables ``metrics.csv``, ``entropy.csv``, ``magnetization.csv``,
  ``rho.csv``, ``scores.csv``, ``sample_scores.csv`` and ``initial.csv``,
* ``checkpoints/sweep_NNNN.ckpt`` and ``state.txt`` (last completed sweep),
* after ``analyze``: ``te.csv``, ``oinfo.csv``, ``summary.csv``.

Every table starts with a schema line ``# mpsgrok-schema <version> <table>``.
All files are replaced atomically, and ``state.txt`` is written last, so a
run killed at any point resumes from its last completed sweep.
"""
from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, dump_config, load_config, loads_config
from .datasets import (FASHION_CLASSES, SYNTHETIC_CLASSES, PreparedDataset, load_idx,
                       stratified_subset_split, synthetic_spectral)
from .diagnostics import bond_entropies
from .info import KsgConfig, TeSpec, averaged_mask_te, o_information, z_score
from .mps import (DegenerateStateError, SweepEngine, dumps_checkpoint, encode_dataset,
                  init_mps, load_checkpoint)
from .training import SweepConfig, SweepRecord, sweep

log = logging.getLogger("mpsgrok")

SCHEMA_VERSION = 1
WORKERS_ENV = "MPSGROK_WORKERS"
CONFIG_NAME = "config.cfg"
STATE_NAME = "state.txt"
LOCK_NAME = "run.lock"
TRACE_TABLES = ("metrics", "entropy", "magnetization", "rho", "scores", "sample_scores")


class RunError(RuntimeError):
    """Run directory is missing, locked, incomplete or inconsistent."""


class SchemaError(RunError):
    """A table was written by an incompatible schema version."""


class NumericalError(RunError):
    """Training hit a numerical degeneracy."""


# --------------------------------------------------------------------------
# file helpers
# --------------------------------------------------------------------------

def atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_table(table: str, header: list[str], rows) -> str:
    out = io.StringIO()
    out.write(f"# mpsgrok-schema {SCHEMA_VERSION} {table}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return out.getvalue()


def write_table(path: Path, table: str, header: list[str], rows) -> None:
    atomic_write_text(path, render_table(table, header, rows))


def read_table(path: Path, table: str) -> tuple[list[str], list[list[str]]]:
    """Header and string rows of a schema-tagged table; checks the version."""
    path = Path(path)
    if not path.exists():
        raise RunError(f"missing table {path}")
    with open(path, newline="") as fh:
        first = fh.readline().split()
        if len(first) != 4 or first[:2] != ["#", "mpsgrok-schema"]:
            raise SchemaError(f"{path}: missing schema line")
        if first[2] != str(SCHEMA_VERSION) or first[3] != table:
            raise SchemaError(f"{path}: schema '{' '.join(first[2:])}' does not match "
                              f"'{SCHEMA_VERSION} {table}'")
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


class RunLock:
    """Exclusive ownership of a run directory through an ``O_EXCL`` lock file."""

    def __init__(self, run_dir: Path):
        self.path = Path(run_dir) / LOCK_NAME

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            if not self._stale():
                raise RunError(f"{self.path.parent} is locked by another process") from None
            log.warning("removing stale lock %s", self.path)
            self.path.unlink()
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        with os.fdopen(fd, "w") as fh:
            fh.write(f"{os.getpid()}\n")
        return self

    def _stale(self) -> bool:
        try:
            pid = int(self.path.read_text().strip())
        except (OSError, ValueError):
            return True
        if pid == os.getpid():
            return False
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            return True
        except PermissionError:
            return False
        return False

    def __exit__(self, *exc):
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass
        return False


# --------------------------------------------------------------------------
# data
# --------------------------------------------------------------------------

def prepare_data(cfg: ExperimentConfig) -> tuple[PreparedDataset, PreparedDataset]:
    if cfg.dataset == "fashion-mnist":
        raw = load_idx(cfg.fashion_images, cfg.fashion_labels)
        return stratified_subset_split(raw, cfg.fashion_classes, cfg.fashion_fraction,
                                       cfg.fashion_split_seed, cfg.image_size)
    return synthetic_spectral(cfg.synthetic_n_per_class, cfg.synthetic_n_features,
                              cfg.synthetic_class_sep, cfg.synthetic_noise, cfg.synthetic_seed)


# --------------------------------------------------------------------------
# traces
# --------------------------------------------------------------------------

def trace_headers(label_dim: int) -> dict[str, list[str]]:
    labels = range(label_dim)
    return {
        "metrics": (["sweep", "cost", "acc_train", "acc_test"]
                    + [f"acc_train_{l}" for l in labels] + [f"acc_test_{l}" for l in labels]),
        "entropy": ["sweep", "bond", "S"] + [f"S_{l}" for l in labels],
        "magnetization": ["sweep", "label", "site", "value"],
        "rho": ["sweep", "row", "col", "value"],
        "scores": ["sweep", "label", "value"],
        "sample_scores": ["sweep", "sample"] + [f"f_{l}" for l in labels],
    }


def record_rows(rec: SweepRecord) -> dict[str, list[list]]:
    """Table rows contributed by one sweep."""
    d = rec.diagnostics
    s = rec.sweep
    nl = d.label_rho.shape[0]
    rows: dict[str, list[list]] = {}
    rows["metrics"] = [[s, rec.cost, rec.acc_train, rec.acc_test,
                        *rec.acc_train_label, *rec.acc_test_label]]
    rows["entropy"] = [[s, b, d.bond_entropy[b], *d.label_bond_entropy[:, b]]
                       for b in range(len(d.bond_entropy))]
    rows["magnetization"] = [[s, l, i, d.magnetization[l, i]]
                             for l in range(nl) for i in range(d.magnetization.shape[1])]
    rows["rho"] = [[s, r, c, d.label_rho[r, c]] for r in range(nl) for c in range(nl)]
    means = (rec.test_scores.mean(axis=0) if len(rec.test_scores)
             else np.full(nl, np.nan))
    rows["scores"] = [[s, l, means[l]] for l in range(nl)]
    rows["sample_scores"] = [[s, j, *rec.test_scores[j]] for j in range(len(rec.test_scores))]
    return rows


class Trace:
    """In-memory copy of the trace tables, rewritten in full after each sweep."""

    def __init__(self, label_dim: int):
        self.headers = trace_headers(label_dim)
        self.rows: dict[str, list[list]] = {t: [] for t in TRACE_TABLES}

    def add(self, rec: SweepRecord) -> None:
        for table, rows in record_rows(rec).items():
            self.rows[table].extend(rows)

    def write(self, run_dir: Path) -> None:
        for table in TRACE_TABLES:
            write_table(run_dir / f"{table}.csv", table, self.headers[table], self.rows[table])

    @classmethod
    def load(cls, run_dir: Path, label_dim: int, upto: int) -> "Trace":
        """Read existing tables, dropping rows of sweeps after ``upto``."""
        trace = cls(label_dim)
        for table in TRACE_TABLES:
            header, rows = read_table(run_dir / f"{table}.csv", table)
            if header != trace.headers[table]:
                raise SchemaError(f"{table}.csv: unexpected columns {header}")
            # rows are kept as text; the strings are already in canonical form
            trace.rows[table] = [r for r in rows if int(r[0]) <= upto]
        return trace


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def _read_state(run_dir: Path) -> int:
    path = run_dir / STATE_NAME
    if not path.exists():
        return 0
    key, _, value = path.read_text().strip().partition("=")
    if key.strip() != "completed_sweeps":
        raise RunError(f"{path}: unreadable state")
    return int(value)


def _checkpoint_path(run_dir: Path, s: int) -> Path:
    return run_dir / "checkpoints" / f"sweep_{s:04d}.ckpt"


def _sweep_config(cfg: ExperimentConfig) -> SweepConfig:
    return SweepConfig(cfg.learning_rate, cfg.n_sweeps, cfg.chi_max, cfg.rel_threshold, cfg.seed)


def _training_key(cfg: ExperimentConfig) -> str:
    """Snapshot text with the fields a resume may change blanked out."""
    neutral = replace(cfg, n_sweeps=ExperimentConfig.n_sweeps,
                      tau_max=min(cfg.tau_max, ExperimentConfig.n_sweeps - 1),
                      tau_min=1, k=4)
    return "\n".join(line for line in dump_config(neutral).splitlines()
                     if not line.startswith(("analysis.", "oinfo.")))


def train(cfg: ExperimentConfig, run_dir, resume: bool = False) -> Path:
    """Train and record a run in ``run_dir``; returns the directory."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    with RunLock(run_dir):
        done = _read_state(run_dir)
        if done and not resume:
            raise RunError(f"{run_dir} already holds {done} sweeps; pass --resume to continue")
        if resume and (run_dir / CONFIG_NAME).exists():
            previous = loads_config((run_dir / CONFIG_NAME).read_text())
            if _training_key(previous) != _training_key(cfg):
                raise RunError("configuration differs from the run's snapshot; refusing to resume")
        if done > cfg.n_sweeps:
            raise RunError(f"run already has {done} sweeps, more than the requested {cfg.n_sweeps}")
        atomic_write_text(run_dir / CONFIG_NAME, dump_config(cfg))

        train_set, test_set = prepare_data(cfg)
        if train_set.n_features != cfg.n_sites:
            raise ConfigError(f"dataset has {train_set.n_features} features, model expects {cfg.n_sites}")
        train_enc = encode_dataset(train_set.features, train_set.labels, cfg.label_dim,
                                   cfg.encoding_scale)
        test_enc = encode_dataset(test_set.features, test_set.labels, cfg.label_dim,
                                  cfg.encoding_scale)
        (run_dir / "checkpoints").mkdir(exist_ok=True)

        if done:
            mps = load_checkpoint(_checkpoint_path(run_dir, done))
            trace = Trace.load(run_dir, cfg.label_dim, done)
            log.info("resuming %s after sweep %d", run_dir, done)
        else:
            mps = init_mps(cfg.n_sites, cfg.chi_max, cfg.label_dim, cfg.seed)
            trace = Trace(cfg.label_dim)
            s0 = bond_entropies(mps)
            write_table(run_dir / "initial.csv", "initial", ["bond", "S"],
                        [[b, v] for b, v in enumerate(s0)])
            atomic_write_text(_checkpoint_path(run_dir, 0), dumps_checkpoint(mps))

        engine = SweepEngine(train_enc)
        scfg = _sweep_config(cfg)
        for s in range(done + 1, cfg.n_sweeps + 1):
            try:
                mps, rec = sweep(mps, train_enc, scfg, test_enc, engine, s)
            except DegenerateStateError as exc:
                log.error("sweep %d: %s", s, exc)
                raise NumericalError(f"sweep {s}: {exc}") from exc
            trace.add(rec)
            trace.write(run_dir)
            atomic_write_text(_checkpoint_path(run_dir, s), dumps_checkpoint(mps))
            atomic_write_text(run_dir / STATE_NAME, f"completed_sweeps = {s}\n")
            stale = _checkpoint_path(run_dir, s - 2)
            if s - 2 > 0 and stale.exists():
                stale.unlink()
            log.info("sweep %d: cost %.4f train %.3f test %.3f", s, rec.cost,
                     rec.acc_train, rec.acc_test)
    return run_dir


# --------------------------------------------------------------------------
# loading a finished run
# --------------------------------------------------------------------------

@dataclass
class RunData:
    config: ExperimentConfig
    metrics: dict[str, np.ndarray]  # column -> (T,)
    entropy: np.ndarray  # (T, N-1) total bond entropy
    label_entropy: np.ndarray  # (T, L, N-1)
    initial_entropy: np.ndarray  # (N-1,)
    magnetization: np.ndarray  # (T, L, N)
    rho: np.ndarray  # (T, L, L)
    mean_scores: np.ndarray  # (T, L)
    sample_scores: np.ndarray  # (T, M, L)

    @property
    def n_sweeps(self) -> int:
        return self.entropy.shape[0]

    @property
    def mean_entropy(self) -> np.ndarray:
        return self.entropy.mean(axis=1)


def load_run(run_dir) -> RunData:
    run_dir = Path(run_dir)
    if not (run_dir / CONFIG_NAME).exists():
        raise RunError(f"{run_dir} is not a run directory (no {CONFIG_NAME})")
    cfg = loads_config((run_dir / CONFIG_NAME).read_text())
    done = _read_state(run_dir)
    if done == 0:
        raise RunError(f"{run_dir} has no completed sweeps")
    nl = cfg.label_dim
    headers = trace_headers(nl)

    def numeric(table):
        header, rows = read_table(run_dir / f"{table}.csv", table)
        if header != headers.get(table, header):
            raise SchemaError(f"{table}.csv: unexpected columns {header}")
        return header, np.array(rows, dtype=float).reshape(len(rows), len(header))

    mh, m = numeric("metrics")
    metrics = {name: m[:, i] for i, name in enumerate(mh)}
    t = len(m)
    _, e = numeric("entropy")
    nb = len(e) // t
    entropy = e[:, 2].reshape(t, nb)
    label_entropy = e[:, 3:].reshape(t, nb, nl).transpose(0, 2, 1)
    _, mag = numeric("magnetization")
    n = len(mag) // (t * nl)
    magnetization = mag[:, 3].reshape(t, nl, n)
    _, r = numeric("rho")
    rho = r[:, 3].reshape(t, nl, nl)
    _, sc = numeric("scores")
    mean_scores = sc[:, 2].reshape(t, nl)
    _, ss = numeric("sample_scores")
    per = len(ss) // t if t else 0
    sample_scores = ss[:, 2:].reshape(t, per, nl)
    _, ini = numeric("initial")
    return RunData(cfg, metrics, entropy, label_entropy, ini[:, 1], magnetization, rho,
                   mean_scores, sample_scores)


# --------------------------------------------------------------------------
# analysis
# --------------------------------------------------------------------------

def transition_sweep(mean_entropy, initial_mean: float) -> int:
    """Sweep (1-based) with the largest single-sweep drop of the mean bond entropy."""
    series = np.concatenate([[initial_mean], np.asarray(mean_entropy, dtype=float)])
    return int(np.argmax(series[:-1] - series[1:])) + 1


def select_spins(mag_final: np.ndarray, quantile: float) -> list[np.ndarray | None]:
    """Per label, the spins whose final |magnetization| reaches the given quantile."""
    if quantile <= 0:
        return [None] * len(mag_final)
    out = []
    for row in np.abs(mag_final):
        out.append(np.flatnonzero(row >= np.quantile(row, quantile)))
    return out


def directions(label_dim: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(label_dim) for b in range(label_dim) if a != b]


def _te_job(args):
    src, tgt, tau, tau_target, k, spins_src, spins_tgt = args
    spec = TeSpec(tau, tau_target or None)
    return averaged_mask_te(src, tgt, spec, KsgConfig(k=k), spins_src, spins_tgt)


def te_table(data: RunData, tau_range, k: int, tau_target: int = 0,
             spin_quantile: float = 0.0, workers: int = 1) -> list[list]:
    """Rows ``(source, target, tau, mean, std)`` for every direction and delay."""
    mag = data.magnetization.transpose(1, 2, 0)  # (L, N, T)
    spins = select_spins(data.magnetization[-1], spin_quantile)
    jobs, keys = [], []
    for a, b in directions(mag.shape[0]):
        for tau in tau_range:
            if data.n_sweeps - max(tau, tau_target or tau) < k + 2:
                raise RunError(f"tau={tau}: {data.n_sweeps} sweeps are too few for k={k}")
            jobs.append((mag[a], mag[b], tau, tau_target, k, spins[a], spins[b]))
            keys.append((a, b, tau))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_te_job, jobs))
    else:
        results = [_te_job(j) for j in jobs]
    return [[a, b, tau, mu, sd] for (a, b, tau), (mu, sd) in zip(keys, results)]


def score_transform(scores: np.ndarray, kind: str) -> np.ndarray:
    """Raw scores, or their normalized squares (class probabilities)."""
    if kind == "raw":
        return scores
    sq = scores ** 2
    total = sq.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(total > 0, sq / total, 1.0 / scores.shape[-1])
    return p


def oinfo_window(cfg: ExperimentConfig, n_sweeps: int, transition: int) -> tuple[int, int]:
    bounds = cfg.window_bounds()
    if bounds is not None:
        lo, hi = bounds
        if hi > n_sweeps:
            raise ConfigError(f"oinfo.window ends at {hi}, run has {n_sweeps} sweeps")
        return lo, hi
    w = cfg.oinfo_window_len
    return max(1, transition - w), min(n_sweeps, transition + w)


def oinfo_table(data: RunData, cfg: ExperimentConfig, k: int) -> list[list]:
    """Rows ``(sweep, mean, std)`` of O-information among the three score series.

    ``ensemble`` evaluates each sweep over the test samples; ``mean`` and
    ``sample`` slide a window of sweeps over one scalar per label and sweep.
    """
    if data.sample_scores.shape[-1] != 3:
        raise ConfigError("O-information needs exactly three labels")
    kcfg = KsgConfig(k=k)
    t = data.n_sweeps
    rows = []
    if cfg.oinfo_reduction == "ensemble":
        for s in range(t):
            p = score_transform(data.sample_scores[s], cfg.oinfo_scores)
            mu, sd = o_information(p[:, 0], p[:, 1], p[:, 2], kcfg)
            rows.append([s + 1, mu, sd])
        return rows
    if cfg.oinfo_reduction == "mean":
        series = score_transform(data.sample_scores, cfg.oinfo_scores).mean(axis=1)
    else:
        if not 0 <= cfg.oinfo_sample < data.sample_scores.shape[1]:
            raise ConfigError(f"oinfo.sample={cfg.oinfo_sample} outside the test set")
        series = score_transform(data.sample_scores[:, cfg.oinfo_sample], cfg.oinfo_scores)
    w = cfg.oinfo_window_len
    if t < w:
        raise RunError(f"{t} sweeps are fewer than the O-information window {w}")
    for c in range(t):
        lo = min(max(0, c - w // 2), t - w)
        seg = series[lo:lo + w]
        mu, sd = o_information(seg[:, 0], seg[:, 1], seg[:, 2], kcfg)
        rows.append([c + 1, mu, sd])
    return rows


def analyze(run_dir, tau_max: int | None = None, k: int | None = None) -> Path:
    """Write ``te.csv``, ``oinfo.csv`` and ``summary.csv`` into the run directory."""
    run_dir = Path(run_dir)
    data = load_run(run_dir)
    cfg = data.config
    k = k or cfg.k
    tau_max = tau_max or cfg.tau_max
    if tau_max >= data.n_sweeps:
        raise RunError(f"tau_max={tau_max} needs more than {data.n_sweeps} sweeps")
    taus = range(cfg.tau_min, tau_max + 1)
    with RunLock(run_dir):
        te = te_table(data, taus, k, cfg.tau_target, cfg.spin_quantile, worker_count())
        write_table(run_dir / "te.csv", "te", ["source", "target", "tau", "mean", "std"], te)
        trans = transition_sweep(data.mean_entropy, float(np.mean(data.initial_entropy)))
        lo, hi = oinfo_window(cfg, data.n_sweeps, trans)
        oi = oinfo_table(data, cfg, k)
        write_table(run_dir / "oinfo.csv", "oinfo", ["sweep", "mean", "std", "in_window"],
                    [[s, mu, sd, int(lo <= s <= hi)] for s, mu, sd in oi])
        summary = [["transition_sweep", trans], ["window_lo", lo], ["window_hi", hi],
                   ["k", k], ["tau_min", cfg.tau_min], ["tau_max", tau_max]]
        write_table(run_dir / "summary.csv", "summary", ["key", "value"], summary)
    return run_dir


def read_te(run_dir) -> dict[tuple[int, int, int], tuple[float, float]]:
    _, rows = read_table(Path(run_dir) / "te.csv", "te")
    return {(int(a), int(b), int(t)): (float(m), float(s)) for a, b, t, m, s in rows}


def read_summary(run_dir) -> dict[str, str]:
    _, rows = read_table(Path(run_dir) / "summary.csv", "summary")
    return {k: v for k, v in rows}


def compare(run_a, run_b, out_dir) -> Path:
    """z-score table between the TE curves of two analyzed runs."""
    te_a, te_b = read_te(run_a), read_te(run_b)
    if set(te_a) != set(te_b):
        raise RunError("the two runs were analyzed over different directions or delays")
    rows = []
    for key in sorted(te_a, key=lambda x: (x[2], x[0], x[1])):
        (ma, sa), (mb, sb) = te_a[key], te_b[key]
        rows.append([*key, z_score(ma, sa, mb, sb), ma, sa, mb, sb])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_table(out_dir / "zscores.csv", "zscores",
                ["source", "target", "tau", "z", "mean_a", "std_a", "mean_b", "std_b"], rows)
    return out_dir / "zscores.csv"


def load_and_override(path, **overrides) -> ExperimentConfig:
    """Read a config file and apply the non-None command-line overrides."""
    return load_config(path, {k: v for k, v in overrides.items() if v is not None})


__all__ = [
    "RunError", "SchemaError", "NumericalError", "RunLock", "RunData", "Trace",
    "train", "analyze", "compare", "load_run", "transition_sweep", "te_table",
    "oinfo_table", "score_transform", "read_table", "write_table", "worker_count",
    "load_and_override", "plot_run",
]


# --------------------------------------------------------------------------
# plots
# --------------------------------------------------------------------------

def plot_run(run_dir) -> list[Path]:
    """Render the five SVG figures next to the run's tables."""
    from . import plotting

    run_dir = Path(run_dir)
    needed = [CONFIG_NAME, STATE_NAME, "initial.csv", "te.csv", "oinfo.csv", "summary.csv"]
    needed += [f"{t}.csv" for t in TRACE_TABLES]
    missing = [name for name in needed if not (run_dir / name).exists()]
    if missing:
        raise RunError(f"{run_dir}: missing {', '.join(missing)} (run train and analyze first)")
    data = load_run(run_dir)
    names = _label_names(data.config)
    _, te_rows = read_table(run_dir / "te.csv", "te")
    _, oi_rows = read_table(run_dir / "oinfo.csv", "oinfo")
    out = [run_dir / name for name in plotting.PLOT_FILES]
    plotting.plot_accuracy(data.metrics, out[0], names, write=atomic_write_bytes)
    plotting.plot_entropy(data.entropy, out[1], write=atomic_write_bytes)
    plotting.plot_magnetization(data.magnetization, out[2], names, write=atomic_write_bytes)
    plotting.plot_te(te_rows, out[3], names, write=atomic_write_bytes)
    plotting.plot_oinfo(oi_rows, out[4], write=atomic_write_bytes)
    return out


def _label_names(cfg: ExperimentConfig) -> list[str]:
    if cfg.dataset == "fashion-mnist":
        return [FASHION_CLASSES.get(c, str(c)) for c in cfg.fashion_classes]
    return list(SYNTHETIC_CLASSES)
