"""Per-sweep observables of a classifier: entanglement, label populations, magnetization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mps import BondRecord, DegenerateStateError, MpsClassifier
from .tensor import DomainError

SIGMA_Z = np.array([1.0, -1.0])
_NEGLIGIBLE = 1e-15


def entanglement_entropy(singular_values) -> float:
    """Von Neumann entropy (nats) of a singular-value spectrum.

    The squared spectrum is renormalized to sum to one first.
    """
    p = np.asarray(singular_values, dtype=float) ** 2
    total = p.sum()
    if total <= 0 or not np.isfinite(total):
        raise DomainError("entropy of an all-zero spectrum")
    p = p / total
    p = p[p >= _NEGLIGIBLE]
    return float(-np.sum(p * np.log(p)))


def label_resolved_entropy(B_prime: np.ndarray, label: int) -> tuple[float, bool]:
    """Entropy of one label slice of a merged bond tensor ``(Dl, 2, 2, Dr, L)``.

    Returns ``(entropy, degenerate)``; a zero slice gives ``(0.0, True)``.
    """
    if B_prime.ndim != 5:
        raise ValueError("expected a merged tensor with axes (Dl, s1, s2, Dr, L)")
    if not 0 <= label < B_prime.shape[-1]:
        raise IndexError(f"label {label} out of range")
    dl, d1, d2, dr, _ = B_prime.shape
    sl = B_prime[..., label].reshape(dl * d1, d2 * dr)
    s = np.linalg.svd(sl, compute_uv=False)
    if not np.any(s > 0):
        return 0.0, True
    return entanglement_entropy(s), False


def label_density_matrix(mps: MpsClassifier) -> np.ndarray:
    """Overlaps <W^l|W^l'> normalized to unit trace."""
    t = mps.center_tensor()
    rho = np.einsum("asxb,asyb->xy", t, t)
    tr = np.trace(rho)
    if tr < 1e-14:
        raise DegenerateStateError("classifier norm vanished")
    rho = rho / tr
    return 0.5 * (rho + rho.T)


def _center_magnetization(t: np.ndarray, strict: bool = True) -> np.ndarray:
    """<sigma_z> per label at the center site, shape (L,).

    A label whose component has vanished raises, or reads 0 when not strict.
    """
    w = np.einsum("aslb->sl", t * t)
    norms = w.sum(axis=0)
    dead = norms < 1e-14
    if strict and np.any(dead):
        bad = int(np.argmax(dead))
        raise DegenerateStateError(f"label {bad} component has vanishing norm")
    return np.where(dead, 0.0, SIGMA_Z @ w / np.where(dead, 1.0, norms))


def magnetizations(mps: MpsClassifier, strict: bool = True) -> np.ndarray:
    """Local magnetization of every (label, site), shape ``(L, N)``.

    The center is walked across a copy of the chain; at each stop the
    observable only involves the center tensor. With ``strict=False`` a label
    component of zero norm yields a row of zeros instead of an error.
    """
    work = mps.copy()
    out = np.empty((mps.label_dim, mps.n_sites))
    work.move_center(0)
    for i in range(mps.n_sites):
        work.move_center(i)
        out[:, i] = _center_magnetization(work.center_tensor(), strict)
    return out


def local_magnetization(mps: MpsClassifier, label: int, site: int) -> float:
    if not 0 <= label < mps.label_dim:
        raise IndexError(f"label {label} out of range")
    if not 0 <= site < mps.n_sites:
        raise IndexError(f"site {site} out of range")
    work = mps.copy().move_center(site)
    return float(_center_magnetization(work.center_tensor())[label])


def bond_spectra(mps: MpsClassifier) -> list[np.ndarray]:
    """Schmidt values of every bond, label leg grouped with the left block."""
    work = mps.copy().move_center(mps.n_sites - 1)
    spectra = [None] * (mps.n_sites - 1)
    for i in range(mps.n_sites - 1, 0, -1):
        work.move_center(i - 1)
        t = work.center_tensor()
        dl, d, nl, dr = t.shape
        spectra[i - 1] = np.linalg.svd(t.reshape(dl * d * nl, dr), compute_uv=False)
    return spectra


def bond_entropies(mps: MpsClassifier) -> np.ndarray:
    return np.array([entanglement_entropy(s) for s in bond_spectra(mps)])


@dataclass
class SweepDiagnostics:
    bond_entropy: np.ndarray  # (N-1,)
    label_bond_entropy: np.ndarray  # (L, N-1)
    label_rho: np.ndarray  # (L, L)
    magnetization: np.ndarray  # (L, N)
    degenerate_slices: int = 0


def compute_diagnostics(mps: MpsClassifier, records: list[BondRecord]) -> SweepDiagnostics:
    """Assemble the observables after a sweep.

    ``records`` are the bond records of the most recent pass; bond entropies
    come from their spectra, the rest from the classifier itself.
    """
    n, nl = mps.n_sites, mps.label_dim
    s_total = np.full(n - 1, np.nan)
    s_label = np.full((nl, n - 1), np.nan)
    degenerate = 0
    norms = np.einsum("aslb->l", mps.center_tensor() ** 2)
    degenerate += int(np.sum(norms < 1e-14))
    for rec in records:
        s_total[rec.bond] = entanglement_entropy(rec.singular_values)
        for lab, sv in enumerate(rec.label_singular_values):
            if np.any(sv > 0):
                s_label[lab, rec.bond] = entanglement_entropy(sv)
            else:
                s_label[lab, rec.bond] = 0.0
                degenerate += 1
    return SweepDiagnostics(
        bond_entropy=s_total,
        label_bond_entropy=s_label,
        label_rho=label_density_matrix(mps),
        magnetization=magnetizations(mps, strict=False),
        degenerate_slices=degenerate,
    )
