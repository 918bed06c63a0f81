"""Data preparation: IDX parsing, 6x6 downsampling, stratified splits, synthetic spectra."""
from __future__ import annotations

import csv
import gzip
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

# public fashion-MNIST codes -> classifier labels
FASHION_CLASSES = {3: "dress", 7: "sneaker", 8: "bag"}
SYNTHETIC_CLASSES = ("cropland", "olive", "grapevine")


class FormatError(ValueError):
    """Malformed IDX container."""

    def __init__(self, path, offset: int, message: str):
        super().__init__(f"{path}: offset {offset}: {message}")
        self.path = str(path)
        self.offset = offset


class DataError(ValueError):
    """Dataset unusable for the requested preparation."""


@dataclass(frozen=True)
class RawImageSet:
    images: np.ndarray  # (M, rows, cols) uint8
    labels: np.ndarray  # (M,) uint8

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise DataError("image and label counts differ")


@dataclass
class PreparedDataset:
    features: np.ndarray  # (T, F) in [0, 1]
    labels: np.ndarray  # (T,)
    split: str
    class_names: list[str] = field(default_factory=list)
    source_index: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label"] + [f"f{i}" for i in range(self.n_features)])
            for lab, row in zip(self.labels, self.features):
                w.writerow([int(lab)] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, split: str = "train") -> "PreparedDataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if header[0] != "label":
            raise DataError(f"{path}: first column must be 'label'")
        labels = np.array([int(r[0]) for r in body], dtype=np.int64)
        feats = np.array([[float(v) for v in r[1:]] for r in body], dtype=float)
        return cls(feats.reshape(len(body), len(header) - 1), labels, split)


def _read_bytes(path) -> bytes:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_idx(path, magic: int, ndim: int) -> np.ndarray:
    buf = _read_bytes(path)
    if len(buf) < 4:
        raise FormatError(path, 0, "file shorter than the magic number")
    (found,) = struct.unpack(">I", buf[:4])
    if found != magic:
        raise FormatError(path, 0, f"bad magic 0x{found:08x}, expected 0x{magic:08x}")
    header_end = 4 + 4 * ndim
    if len(buf) < header_end:
        raise FormatError(path, 4, "truncated dimension header")
    dims = struct.unpack(">" + "I" * ndim, buf[4:header_end])
    need = math.prod(dims)
    have = len(buf) - header_end
    if have < need:
        raise FormatError(path, len(buf), f"truncated payload: {have} of {need} bytes")
    data = np.frombuffer(buf, dtype=np.uint8, count=need, offset=header_end)
    return data.reshape(dims)


def load_idx(images_path, labels_path) -> RawImageSet:
    """Read an IDX image/label file pair (optionally gzip-compressed)."""
    images = _parse_idx(images_path, IMAGE_MAGIC, 3)
    labels = _parse_idx(labels_path, LABEL_MAGIC, 1)
    if len(images) != len(labels):
        raise FormatError(labels_path, 4,
                          f"{len(labels)} labels for {len(images)} images")
    return RawImageSet(images.copy(), labels.copy())


def write_idx(raw: RawImageSet, images_path, labels_path) -> None:
    """Write a pair of IDX files; gzip is used when the name ends in ``.gz``."""
    def opener(p):
        return gzip.GzipFile(p, "wb", mtime=0) if str(p).endswith(".gz") else open(p, "wb")

    n, rows, cols = raw.images.shape
    with opener(images_path) as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(np.ascontiguousarray(raw.images, dtype=np.uint8).tobytes())
    with opener(labels_path) as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, n))
        fh.write(np.ascontiguousarray(raw.labels, dtype=np.uint8).tobytes())


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """Row-stochastic overlap matrix between ``n_out`` equal cells and ``n_in`` pixels."""
    w = np.zeros((n_out, n_in))
    width = n_in / n_out
    for r in range(n_out):
        lo, hi = r * width, (r + 1) * width
        for i in range(int(math.floor(lo)), min(n_in, int(math.ceil(hi)))):
            w[r, i] = max(0.0, min(hi, i + 1) - max(lo, i))
    return w / width


def downsample(img, size: int = 6) -> np.ndarray:
    """Area-average an image onto a ``size x size`` grid, scaled to [0, 1], flattened row-wise."""
    img = np.asarray(img, dtype=float)
    wr = _area_weights(img.shape[0], size)
    wc = _area_weights(img.shape[1], size)
    out = wr @ img @ wc.T / 255.0
    return np.clip(out, 0.0, 1.0).ravel()


def downsample_6x6(img) -> np.ndarray:
    return downsample(img, 6)


def stratified_subset_split(raw: RawImageSet, classes=(3, 7, 8), fraction: float = 0.1,
                            seed: int = 0, size: int = 6):
    """Draw ``floor(fraction * count)`` images per class and halve them into train/test.

    Labels are remapped to ``0..len(classes)-1`` in the given class order.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for code in classes:
        members = np.flatnonzero(raw.labels == code)
        if len(members) == 0:
            raise DataError(f"class {code} has no images")
        n = int(math.floor(fraction * len(members)))
        if n < 2:
            raise DataError(f"class {code}: fraction {fraction} leaves {n} images")
        pick = members[rng.permutation(len(members))[:n]]
        half = (n + 1) // 2
        train_idx.append(np.sort(pick[:half]))
        test_idx.append(np.sort(pick[half:]))
    remap = {code: i for i, code in enumerate(classes)}
    names = [FASHION_CLASSES.get(c, str(c)) for c in classes]

    def build(parts, split):
        idx = np.concatenate(parts)
        feats = np.stack([downsample(raw.images[i], size) for i in idx])
        labels = np.array([remap[int(raw.labels[i])] for i in idx], dtype=np.int64)
        return PreparedDataset(feats, labels, split, names, idx)

    return build(train_idx, "train"), build(test_idx, "test")


def _trig_mixture(rng, grid: np.ndarray, order: int = 4) -> np.ndarray:
    out = np.zeros_like(grid)
    for m in range(1, order + 1):
        a, b = rng.normal(size=2) / m
        out += a * np.cos(np.pi * m * grid) + b * np.sin(np.pi * m * grid)
    return out


def class_mean_spectra(n_features: int, class_sep: float, seed: int,
                       n_classes: int = 3) -> np.ndarray:
    """Smooth class-mean spectra, jointly min-max scaled to [0, 1]."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, n_features)
    common = _trig_mixture(rng, grid)
    means = []
    for _ in range(n_classes):
        dev = _trig_mixture(rng, grid)
        dev /= np.sqrt(np.mean(dev ** 2))
        means.append(common + class_sep * dev)
    means = np.array(means)
    lo, hi = means.min(), means.max()
    return (means - lo) / (hi - lo)


def synthetic_spectral(n_per_class: int, n_features: int = 43, class_sep: float = 0.2,
                       noise: float = 0.2, seed: int = 0):
    """Three noisy spectral classes; ``n_per_class`` samples each, split half/half.

    Stand-in for hyperspectral land-cover pixels. Small ``class_sep`` with
    large ``noise`` gives a hard problem that an MPS overfits.
    """
    if n_per_class < 2:
        raise ValueError("n_per_class must be >= 2")
    means = class_mean_spectra(n_features, class_sep, seed)
    rng = np.random.default_rng(seed + 1)
    names = list(SYNTHETIC_CLASSES)
    train_f, train_l, test_f, test_l = [], [], [], []
    for c, mean in enumerate(means):
        x = np.clip(mean + noise * rng.normal(size=(n_per_class, n_features)), 0.0, 1.0)
        half = (n_per_class + 1) // 2
        train_f.append(x[:half])
        test_f.append(x[half:])
        train_l += [c] * half
        test_l += [c] * (n_per_class - half)
    train = PreparedDataset(np.vstack(train_f), np.array(train_l, dtype=np.int64), "train", names)
    test = PreparedDataset(np.vstack(test_f), np.array(test_l, dtype=np.int64), "test", names)
    return train, test
