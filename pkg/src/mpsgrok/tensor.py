"""Dense tensor primitives: contraction, truncated SVD and the digamma function.

Tensors are plain ``numpy.ndarray`` objects of real dtype.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when tensor extents do not line up."""


class NumericError(ValueError):
    """Raised on non-finite input to a numerical kernel."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a function."""


def contract(a: np.ndarray, b: np.ndarray, axes: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired axes of ``a`` and ``b``.

    ``axes`` is a list of ``(axis_of_a, axis_of_b)`` pairs. The result keeps
    the free axes of ``a`` (in order) followed by the free axes of ``b``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    axes_a = [int(p[0]) for p in axes]
    axes_b = [int(p[1]) for p in axes]
    for ia, ib in zip(axes_a, axes_b):
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"cannot contract axis {ia} (extent {a.shape[ia]}) "
                f"with axis {ib} (extent {b.shape[ib]})"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray
    discarded_weight: float

    @property
    def rank(self) -> int:
        return len(self.singular_values)


def svd_truncate(m: np.ndarray, chi_max: int, rel_threshold: float = 1e-12) -> SvdResult:
    """Thin SVD of a matrix keeping at most ``chi_max`` singular values.

    Singular values with ``s / s[0] < rel_threshold`` are dropped as well. At
    least one value is always kept. ``discarded_weight`` is the sum of the
    squares of the dropped values.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"svd_truncate needs a matrix, got shape {m.shape}")
    if chi_max < 1:
        raise ValueError("chi_max must be >= 1")
    if not np.all(np.isfinite(m)):
        raise NumericError("matrix contains non-finite entries")

    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        import scipy.linalg

        u, s, vt = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")

    keep = min(chi_max, len(s))
    if s[0] > 0 and rel_threshold > 0:
        keep = min(keep, int(np.count_nonzero(s / s[0] >= rel_threshold)))
    keep = max(keep, 1)
    discarded = float(np.sum(s[keep:] ** 2))
    return SvdResult(u[:, :keep], s[:keep].copy(), vt[:keep, :], discarded)


EULER_GAMMA = 0.57721566490153286061

# B_{2n} / (2n) for n = 1..7
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x):
    """Digamma function for positive real arguments (scalar or array).

    Arguments below 10 are shifted upward with psi(x) = psi(x + 1) - 1/x and
    the asymptotic expansion is evaluated there.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("digamma is only defined here for finite x > 0")
    z = arr.copy()
    acc = np.zeros_like(z)
    small = z < 10.0
    while np.any(small):
        acc[small] -= 1.0 / z[small]
        z[small] += 1.0
        small = z < 10.0
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for coeff in reversed(_ASYMPTOTIC):
        series = (series + coeff) * inv2
    out = acc + np.log(z) - 0.5 / z - series
    if np.ndim(x) == 0:
        return float(out)
    return out
