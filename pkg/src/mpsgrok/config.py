"""Experiment configuration: a flat, versioned ``key = value`` document.

The file holds a single ``[experiment]`` section. Keys are dotted names
(``sweep.learning_rate``); unknown keys are rejected so typos fail loudly.
A snapshot written by :func:`dump_config` parses back to an equal object and
serializes to the same bytes.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields, replace
from pathlib import Path

FORMAT_VERSION = 1
SECTION = "experiment"

DATASETS = ("fashion-mnist", "synthetic")
OINFO_REDUCTIONS = ("ensemble", "mean", "sample")
OINFO_SCORES = ("probability", "raw")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "fashion-mnist"
    # fashion-MNIST preparation
    fashion_images: str = "data/fashion-mnist/fashion3-images-idx3-ubyte.gz"
    fashion_labels: str = "data/fashion-mnist/fashion3-labels-idx1-ubyte.gz"
    fashion_classes: tuple[int, ...] = (3, 7, 8)
    fashion_fraction: float = 0.1
    fashion_split_seed: int = 0
    image_size: int = 6
    # synthetic spectral generator
    synthetic_n_per_class: int = 60
    synthetic_n_features: int = 43
    synthetic_class_sep: float = 0.05
    synthetic_noise: float = 0.3
    synthetic_seed: int = 0
    # model and training
    encoding_scale: float = 10.5
    chi_max: int = 10
    label_dim: int = 3
    seed: int = 0
    learning_rate: float = 0.35
    n_sweeps: int = 40
    rel_threshold: float = 1e-12
    # analysis
    tau_min: int = 1
    tau_max: int = 10
    tau_target: int = 0  # 0: target past as long as the source past
    k: int = 4
    spin_quantile: float = 0.0  # keep spins with |m| at or above this quantile
    oinfo_reduction: str = "ensemble"
    oinfo_scores: str = "probability"
    oinfo_window: str = "auto"  # "auto" or "lo:hi" (inclusive sweep range)
    oinfo_window_len: int = 8
    oinfo_sample: int = 0

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.oinfo_reduction not in OINFO_REDUCTIONS:
            raise ConfigError(f"oinfo.reduction must be one of {OINFO_REDUCTIONS}")
        if self.oinfo_scores not in OINFO_SCORES:
            raise ConfigError(f"oinfo.scores must be one of {OINFO_SCORES}")
        positive = {"chi_max": self.chi_max, "n_sweeps": self.n_sweeps, "k": self.k,
                    "image_size": self.image_size, "tau_min": self.tau_min,
                    "synthetic_n_features": self.synthetic_n_features}
        for name, value in positive.items():
            if value < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.label_dim < 2:
            raise ConfigError("label_dim must be >= 2")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if not self.encoding_scale > 0:
            raise ConfigError("encoding_scale must be > 0")
        if self.tau_max < self.tau_min:
            raise ConfigError("tau_max must be >= tau_min")
        if self.tau_max >= self.n_sweeps:
            raise ConfigError(f"tau_max={self.tau_max} must be below n_sweeps={self.n_sweeps}")
        if self.tau_target < 0:
            raise ConfigError("tau_target must be >= 0")
        if not 0.0 <= self.spin_quantile < 1.0:
            raise ConfigError("spin_quantile must lie in [0, 1)")
        if not 0 < self.fashion_fraction <= 1:
            raise ConfigError("fashion_fraction must lie in (0, 1]")
        if self.oinfo_window_len < self.k + 2:
            raise ConfigError("oinfo_window_len must be at least k + 2")
        if self.dataset == "fashion-mnist" and len(self.fashion_classes) != self.label_dim:
            raise ConfigError("number of fashion classes must equal label_dim")
        if self.dataset == "synthetic" and self.label_dim != 3:
            raise ConfigError("the synthetic generator produces three classes")
        self.window_bounds()  # validates the syntax

    @property
    def n_sites(self) -> int:
        if self.dataset == "fashion-mnist":
            return self.image_size ** 2
        return self.synthetic_n_features

    def window_bounds(self) -> tuple[int, int] | None:
        """Explicit O-information window as inclusive sweeps, or None for auto."""
        if self.oinfo_window == "auto":
            return None
        try:
            lo, hi = (int(v) for v in self.oinfo_window.split(":"))
        except ValueError:
            raise ConfigError(f"oinfo.window must be 'auto' or 'lo:hi', got {self.oinfo_window!r}")
        if not 1 <= lo <= hi:
            raise ConfigError("oinfo.window needs 1 <= lo <= hi")
        return lo, hi

    def resolve_paths(self, base: Path) -> "ExperimentConfig":
        """Make data paths absolute, interpreting relative ones against ``base``."""
        def fix(p):
            path = Path(p)
            return str(path if path.is_absolute() else (base / path).resolve())
        return replace(self, fashion_images=fix(self.fashion_images),
                       fashion_labels=fix(self.fashion_labels))


# file key -> attribute name
_KEYS = {
    "dataset": "dataset",
    "fashion.images": "fashion_images",
    "fashion.labels": "fashion_labels",
    "fashion.classes": "fashion_classes",
    "fashion.fraction": "fashion_fraction",
    "fashion.split_seed": "fashion_split_seed",
    "fashion.image_size": "image_size",
    "synthetic.n_per_class": "synthetic_n_per_class",
    "synthetic.n_features": "synthetic_n_features",
    "synthetic.class_sep": "synthetic_class_sep",
    "synthetic.noise": "synthetic_noise",
    "synthetic.seed": "synthetic_seed",
    "model.encoding_scale": "encoding_scale",
    "model.chi_max": "chi_max",
    "model.label_dim": "label_dim",
    "model.seed": "seed",
    "sweep.learning_rate": "learning_rate",
    "sweep.n_sweeps": "n_sweeps",
    "sweep.rel_threshold": "rel_threshold",
    "analysis.tau_min": "tau_min",
    "analysis.tau_max": "tau_max",
    "analysis.tau_target": "tau_target",
    "analysis.k": "k",
    "analysis.spin_quantile": "spin_quantile",
    "oinfo.reduction": "oinfo_reduction",
    "oinfo.scores": "oinfo_scores",
    "oinfo.window": "oinfo_window",
    "oinfo.window_len": "oinfo_window_len",
    "oinfo.sample": "oinfo_sample",
}
_ATTR_TO_KEY = {v: k for k, v in _KEYS.items()}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(attr: str, text: str):
    kind = _TYPES[attr]
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "tuple[int, ...]":
            return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{_ATTR_TO_KEY[attr]}: cannot parse {text!r} as {kind}")
    return text


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def loads_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not parser.has_section(SECTION):
        raise ConfigError(f"missing [{SECTION}] section")
    items = dict(parser.items(SECTION))
    version = items.pop("format_version", None)
    if version is None:
        raise ConfigError("missing format_version")
    if version.strip() != str(FORMAT_VERSION):
        raise ConfigError(f"unsupported format_version {version!r}, expected {FORMAT_VERSION}")
    values = {}
    for key, raw in items.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[_KEYS[key]] = _parse_value(_KEYS[key], raw.strip())
    values.update(overrides or {})
    return ExperimentConfig(**values)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads_config(text, overrides).resolve_paths(path.parent)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize every field, in a fixed key order."""
    out = io.StringIO()
    out.write(f"[{SECTION}]\n")
    out.write(f"format_version = {FORMAT_VERSION}\n")
    for key, attr in _KEYS.items():
        out.write(f"{key} = {_format_value(getattr(cfg, attr))}\n")
    return out.getvalue()
