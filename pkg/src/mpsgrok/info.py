"""Kraskov-Stoegbauer-Grassberger (KSG) nearest-neighbour information estimators.

All neighbour searches use the maximum (Chebyshev) norm and marginal counts
are strict (distance < epsilon). Entropies are in nats.

Inputs are arrays with time along axis 0; 1-D arrays are treated as a
single channel.
"""
from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .tensor import digamma

# above this many points distance matrices get too large; use a KD-tree
BRUTE_FORCE_MAX = 1500


class InsufficientDataError(ValueError):
    """Too few time steps for the requested estimator."""


class DegenerateDistanceError(ValueError):
    """Coincident points left a zero neighbour distance after jittering."""


@dataclass(frozen=True)
class KsgConfig:
    k: int = 4
    jitter_scale: float = 1e-10
    seed: int = 0


@dataclass(frozen=True)
class TeSpec:
    tau: int = 1
    tau_target: int | None = None

    @property
    def target_lag(self) -> int:
        return self.tau if self.tau_target is None else self.tau_target


def _as_2d(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError("series must be 1-D or (T, D)")
    if not np.all(np.isfinite(a)):
        raise ValueError("series contains non-finite values")
    return a


def jitter(x, cfg: KsgConfig) -> np.ndarray:
    """Add tiny uniform noise scaled by each channel's standard deviation.

    The generator is seeded from ``cfg.seed`` and the channel's own bytes, so
    the same data always receives the same noise regardless of call order.
    """
    a = _as_2d(x).copy()
    if cfg.jitter_scale <= 0:
        return a
    for c in range(a.shape[1]):
        col = np.ascontiguousarray(a[:, c])
        sd = col.std()
        if sd == 0:
            continue
        seed = zlib.crc32(col.tobytes()) ^ (cfg.seed & 0xFFFFFFFF)
        rng = np.random.default_rng(seed)
        a[:, c] = col + cfg.jitter_scale * sd * rng.uniform(-1.0, 1.0, size=len(col))
    return a


def _check_length(t: int, k: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if t < k + 2:
        raise InsufficientDataError(f"need at least k + 2 = {k + 2} points, got {t}")


def chebyshev_matrix(x: np.ndarray) -> np.ndarray:
    """Pairwise maximum-norm distances with +inf on the diagonal."""
    x = _as_2d(x)
    d = np.zeros((len(x), len(x)))
    for c in range(x.shape[1]):
        np.maximum(d, np.abs(x[:, c, None] - x[None, :, c]), out=d)
    np.fill_diagonal(d, np.inf)
    return d


def knn_distances(points, k: int) -> np.ndarray:
    """Chebyshev distance from every point to its k-th nearest other point."""
    pts = _as_2d(points)
    if len(pts) <= k:
        raise InsufficientDataError(f"need more than k = {k} points")
    if len(pts) <= BRUTE_FORCE_MAX:
        d = chebyshev_matrix(pts)
        return np.partition(d, k - 1, axis=1)[:, k - 1]
    dist, _ = cKDTree(pts).query(pts, k=k + 1, p=np.inf)
    return dist[:, k]


def _count_within(points: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Number of other points strictly closer than ``eps[i]`` to point ``i``."""
    tree = cKDTree(points)
    radii = np.nextafter(eps, 0.0)
    counts = tree.query_ball_point(points, radii, p=np.inf, return_length=True)
    return np.asarray(counts) - 1


def _require_positive(eps: np.ndarray) -> None:
    if np.any(eps <= 0):
        raise DegenerateDistanceError(
            f"{int(np.sum(eps <= 0))} points have a zero k-NN distance"
        )


def ksg_entropy(x, cfg: KsgConfig = KsgConfig()) -> float:
    """Differential entropy estimate; neighbourhoods are max-norm cubes."""
    a = jitter(x, cfg)
    t, d = a.shape
    _check_length(t, cfg.k)
    eps = knn_distances(a, cfg.k)
    _require_positive(eps)
    # the cube of half-width r has side 2r
    return float(-digamma(cfg.k) + digamma(t) + d * np.mean(np.log(2.0 * eps)))


def _marginal_counts(blocks: list[np.ndarray], groups: list[tuple[int, ...]], k: int):
    """k-NN radius in the joint space and strict counts in each marginal group."""
    t = len(blocks[0])
    if t <= BRUTE_FORCE_MAX:
        mats = [chebyshev_matrix(b) for b in blocks]
        joint = np.maximum.reduce(mats)
        eps = np.partition(joint, k - 1, axis=1)[:, k - 1]
        _require_positive(eps)
        counts = []
        for g in groups:
            sub = np.maximum.reduce([mats[i] for i in g])
            counts.append(np.sum(sub < eps[:, None], axis=1))
        return eps, counts
    joint = np.hstack(blocks)
    eps = knn_distances(joint, k)
    _require_positive(eps)
    counts = [_count_within(np.hstack([blocks[i] for i in g]), eps) for g in groups]
    return eps, counts


def ksg_mutual_information(x, y, cfg: KsgConfig = KsgConfig()) -> float:
    """KSG estimate of I(X; Y)."""
    a, b = jitter(x, cfg), jitter(y, cfg)
    if len(a) != len(b):
        raise ValueError("series lengths differ")
    t = len(a)
    _check_length(t, cfg.k)
    _, (nx, ny) = _marginal_counts([a, b], [(0,), (1,)], cfg.k)
    return float(digamma(cfg.k) + digamma(t) - np.mean(digamma(nx + 1) + digamma(ny + 1)))


def ksg_conditional_mi(x, y, z, cfg: KsgConfig = KsgConfig()) -> float:
    """KSG estimate of I(X; Y | Z) (Frenzel-Pompe form)."""
    a, b, c = jitter(x, cfg), jitter(y, cfg), jitter(z, cfg)
    if not len(a) == len(b) == len(c):
        raise ValueError("series lengths differ")
    _check_length(len(a), cfg.k)
    _, (nz, nxz, nyz) = _marginal_counts([a, b, c], [(2,), (0, 2), (1, 2)], cfg.k)
    return float(digamma(cfg.k)
                 + np.mean(digamma(nz + 1) - digamma(nxz + 1) - digamma(nyz + 1)))


def delay_embed(series: np.ndarray, lag: int, start: int, stop: int) -> np.ndarray:
    """Rows ``(x[t], x[t-1], ..., x[t-lag+1])`` for ``t`` in ``[start, stop)``."""
    return np.stack([series[start - j: stop - j] for j in range(lag)], axis=1)


def _te_layout(t: int, spec: TeSpec, k: int) -> tuple[int, int]:
    if spec.tau < 1 or spec.target_lag < 1:
        raise ValueError("embedding lengths must be >= 1")
    m = max(spec.tau, spec.target_lag)
    if t - m < k + 2:
        raise InsufficientDataError(
            f"series of length {t} too short for tau={spec.tau}, "
            f"tau_target={spec.target_lag}, k={k}"
        )
    return m - 1, t - 1


def transfer_entropy(source, target, spec: TeSpec = TeSpec(),
                     cfg: KsgConfig = KsgConfig()) -> float:
    """Transfer entropy source -> target as I(target future; source past | target past)."""
    src = jitter(np.ravel(source), cfg)[:, 0]
    tgt = jitter(np.ravel(target), cfg)[:, 0]
    if len(src) != len(tgt):
        raise ValueError("series lengths differ")
    start, stop = _te_layout(len(tgt), spec, cfg.k)
    future = tgt[start + 1: stop + 1, None]
    tpast = delay_embed(tgt, spec.target_lag, start, stop)
    spast = delay_embed(src, spec.tau, start, stop)
    _, (nz, nxz, nyz) = _marginal_counts([future, spast, tpast], [(2,), (0, 2), (1, 2)], cfg.k)
    return float(digamma(cfg.k)
                 + np.mean(digamma(nz + 1) - digamma(nxz + 1) - digamma(nyz + 1)))


def pairwise_te(sources, targets, spec: TeSpec = TeSpec(),
                cfg: KsgConfig = KsgConfig()) -> np.ndarray:
    """TE from every source series to every target series, shape (n_targets, n_sources).

    ``sources`` and ``targets`` are ``(n, T)`` arrays. Distance matrices of the
    embedded pasts are computed once per series and reused for all pairs.
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    t = sources.shape[1]
    if targets.shape[1] != t:
        raise ValueError("series lengths differ")
    start, stop = _te_layout(t, spec, cfg.k)
    if stop - start > BRUTE_FORCE_MAX:
        out = np.empty((len(targets), len(sources)))
        for i, j in itertools.product(range(len(targets)), range(len(sources))):
            out[i, j] = transfer_entropy(sources[j], targets[i], spec, cfg)
        return out

    src = [jitter(s, cfg)[:, 0] for s in sources]
    tgt = [jitter(s, cfg)[:, 0] for s in targets]
    d_src = [chebyshev_matrix(delay_embed(s, spec.tau, start, stop)) for s in src]
    psi_k = digamma(cfg.k)
    out = np.empty((len(targets), len(sources)))
    for i, s in enumerate(tgt):
        d_fut = chebyshev_matrix(s[start + 1: stop + 1])
        d_past = chebyshev_matrix(delay_embed(s, spec.target_lag, start, stop))
        d_fp = np.maximum(d_fut, d_past)
        for j in range(len(src)):
            joint = np.maximum(d_fp, d_src[j])
            eps = np.partition(joint, cfg.k - 1, axis=1)[:, cfg.k - 1]
            _require_positive(eps)
            col = eps[:, None]
            nz = np.sum(d_past < col, axis=1)
            nxz = np.sum(d_fp < col, axis=1)
            nyz = np.sum(np.maximum(d_src[j], d_past) < col, axis=1)
            out[i, j] = psi_k + np.mean(digamma(nz + 1) - digamma(nxz + 1) - digamma(nyz + 1))
    return out


def averaged_mask_te(mag_source, mag_target, spec: TeSpec = TeSpec(),
                     cfg: KsgConfig = KsgConfig(), source_spins=None,
                     target_spins=None) -> tuple[float, float]:
    """Mean and standard deviation of TE over all ordered spin pairs.

    ``mag_source`` and ``mag_target`` are ``(N, T)`` magnetization series of
    the source and target masks. Optional index lists restrict the spins.
    """
    src = np.atleast_2d(np.asarray(mag_source, dtype=float))
    tgt = np.atleast_2d(np.asarray(mag_target, dtype=float))
    if source_spins is not None:
        src = src[list(source_spins)]
    if target_spins is not None:
        tgt = tgt[list(target_spins)]
    if len(src) == 0 or len(tgt) == 0:
        raise ValueError("empty spin selection")
    values = pairwise_te(src, tgt, spec, cfg).ravel()
    return float(np.mean(values)), float(np.std(values))


def o_information(f0, f1, f2, cfg: KsgConfig = KsgConfig()) -> tuple[float, float]:
    """Interaction information I(a;b) - I(a;b|c) over the six variable orders.

    Returns the mean and the standard deviation over the permutations.
    Positive values mean redundancy, negative values synergy.
    """
    series = [np.ravel(np.asarray(f, dtype=float)) for f in (f0, f1, f2)]
    if not len(series[0]) == len(series[1]) == len(series[2]):
        raise ValueError("series lengths differ")
    _check_length(len(series[0]), cfg.k)
    vals = []
    for a, b, c in itertools.permutations(range(3)):
        mi = ksg_mutual_information(series[a], series[b], cfg)
        cmi = ksg_conditional_mi(series[a], series[b], series[c], cfg)
        vals.append(mi - cmi)
    return float(np.mean(vals)), float(np.std(vals))


def z_score(mean_a: float, std_a: float, mean_b: float, std_b: float) -> float:
    """Separation of two means in units of their combined spread."""
    if std_a < 0 or std_b < 0:
        raise ValueError("standard deviations must be non-negative")
    diff = abs(mean_a - mean_b)
    spread = math.hypot(std_a, std_b)
    if spread == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / spread
