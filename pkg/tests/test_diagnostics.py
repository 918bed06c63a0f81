import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_dataset
from mpsgrok.diagnostics import (bond_entropies, bond_spectra, compute_diagnostics,
                                 entanglement_entropy, label_density_matrix,
                                 label_resolved_entropy, local_magnetization, magnetizations)
from mpsgrok.mps import DegenerateStateError, MpsClassifier, init_mps, sweep_pass
from mpsgrok.tensor import DomainError
from oracles import dense_bond_entropy, dense_from_sites, dense_label_rho, dense_magnetization


def product_classifier(qubits, label_weights):
    """Bond-dimension-1 classifier: a product of the given qubits times a label vector."""
    q = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in qubits]
    lw = np.asarray(label_weights, dtype=float)
    first = np.einsum("s,l->sl", q[0], lw)[None, :, :, None]
    sites = [first] + [v[None, :, None] for v in q[1:]]
    return MpsClassifier(sites, 0, len(lw), 1).normalize()


# -- entropy ----------------------------------------------------------------

@pytest.mark.parametrize("sv,expected", [
    ([1.0, 0.0], 0.0),
    ([np.sqrt(0.5), np.sqrt(0.5)], np.log(2)),
    (np.full(8, 1 / np.sqrt(8)), np.log(8)),
])
def test_entanglement_entropy_examples(sv, expected):
    assert entanglement_entropy(sv) == pytest.approx(expected, abs=1e-12)


def test_entropy_renormalizes_spectrum():
    assert entanglement_entropy([3.0, 3.0]) == pytest.approx(np.log(2), abs=1e-12)


def test_entropy_of_zero_spectrum():
    with pytest.raises(DomainError):
        entanglement_entropy([0.0, 0.0])


@given(st.lists(st.floats(1e-3, 10), min_size=1, max_size=16))
def test_entropy_bounds(sv):
    s = entanglement_entropy(sv)
    assert -1e-12 <= s <= np.log(len(sv)) + 1e-12


def _merged_with_slice(sl, label=1, label_dim=3):
    """Merged tensor (1, 2, 2, 1, L) whose ``label`` slice is the 2x2 matrix ``sl``."""
    b = np.zeros((1, 2, 2, 1, label_dim))
    b[0, :, :, 0, label] = sl
    return b


def test_label_entropy_rank_one():
    s, flag = label_resolved_entropy(_merged_with_slice(np.outer([1, 2], [3, -1])), 1)
    assert s == pytest.approx(0.0, abs=1e-12) and not flag


def test_label_entropy_identity():
    s, _ = label_resolved_entropy(_merged_with_slice(5 * np.eye(2)), 1)
    assert s == pytest.approx(np.log(2), abs=1e-12)


def test_label_entropy_zero_slice_is_flagged():
    assert label_resolved_entropy(_merged_with_slice(np.eye(2)), 0) == (0.0, True)


def test_label_entropy_random_matches_eigen_oracle(rng):
    b = rng.normal(size=(3, 2, 2, 4, 3))
    for lab in range(3):
        m = b[..., lab].reshape(6, 8)
        p = np.clip(np.linalg.eigvalsh(m @ m.T), 0, None)
        p = p / p.sum()
        p = p[p > 1e-15]
        s, _ = label_resolved_entropy(b, lab)
        assert s == pytest.approx(-np.sum(p * np.log(p)), abs=1e-10)


def test_label_entropy_argument_checks(rng):
    with pytest.raises(ValueError):
        label_resolved_entropy(rng.normal(size=(2, 2, 2)), 0)
    with pytest.raises(IndexError):
        label_resolved_entropy(rng.normal(size=(1, 2, 2, 1, 3)), 3)


@pytest.mark.parametrize("n,chi,center", [(4, 4, 0), (6, 3, 2), (8, 4, 7)])
def test_bond_entropies_match_dense(n, chi, center):
    mps = init_mps(n, chi, 3, seed=n).move_center(center)
    w = dense_from_sites(mps.sites, mps.center, 3)
    ours = bond_entropies(mps)
    for b in range(n - 1):
        assert ours[b] == pytest.approx(dense_bond_entropy(w, b), abs=1e-10)
    assert mps.center == center  # diagnostics do not move the caller's center


def test_bond_entropy_bound():
    n, chi, nl = 8, 4, 3
    mps = init_mps(n, chi, nl, seed=4)
    for i, s in enumerate(bond_entropies(mps)):
        # label leg grouped with the left block of i + 1 sites
        cap = min(chi * nl, nl * 2 ** (i + 1), 2 ** (n - i - 1))
        assert 0 <= s <= np.log(cap) + 1e-12
    assert len(bond_spectra(mps)) == n - 1


# -- label density matrix ---------------------------------------------------

def test_rho_single_label_support():
    mps = product_classifier([[1, 0], [0.6, 0.8], [1, 1]], [2.0, 0.0, 0.0])
    np.testing.assert_allclose(label_density_matrix(mps), np.diag([1.0, 0.0, 0.0]), atol=1e-15)


def test_rho_of_fresh_classifier():
    rho = label_density_matrix(init_mps(10, 6, 3, seed=2))
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_array_equal(rho, rho.T)
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_rho_matches_dense():
    mps = init_mps(6, 4, 3, seed=3).move_center(3)
    w = dense_from_sites(mps.sites, mps.center, 3)
    np.testing.assert_allclose(label_density_matrix(mps), dense_label_rho(w), atol=1e-12)


def test_rho_of_zero_state():
    with pytest.raises(DegenerateStateError):
        label_density_matrix(init_mps(4, 2, 3, seed=0).scaled(0.0))


# -- magnetization ----------------------------------------------------------

def test_magnetization_eigenstate_and_equator():
    mps = product_classifier([[1, 0], [1, 1], [0, 1]], [1.0, 0.5, 0.2])
    for lab in range(3):
        assert local_magnetization(mps, lab, 0) == pytest.approx(1.0, abs=1e-12)
        assert local_magnetization(mps, lab, 1) == pytest.approx(0.0, abs=1e-12)
        assert local_magnetization(mps, lab, 2) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("n,center", [(4, 0), (4, 2), (7, 5)])
def test_magnetization_matches_dense(n, center):
    mps = init_mps(n, 4, 3, seed=11).move_center(center)
    w = dense_from_sites(mps.sites, mps.center, 3)
    m = magnetizations(mps)
    assert m.shape == (3, n)
    for lab in range(3):
        for i in range(n):
            ref = dense_magnetization(w, lab, i)
            assert m[lab, i] == pytest.approx(ref, abs=1e-10)
            assert local_magnetization(mps, lab, i) == pytest.approx(ref, abs=1e-10)


def test_magnetization_of_vanished_label():
    mps = product_classifier([[1, 0], [0.3, 0.7]], [1.0, 0.0, 1.0])
    with pytest.raises(DegenerateStateError):
        local_magnetization(mps, 1, 0)
    with pytest.raises(DegenerateStateError):
        magnetizations(mps)
    m = magnetizations(mps, strict=False)
    np.testing.assert_array_equal(m[1], [0.0, 0.0])
    assert m[0, 0] == pytest.approx(1.0)


def test_magnetization_index_checks():
    mps = init_mps(4, 2, 3, seed=0)
    with pytest.raises(IndexError):
        local_magnetization(mps, 3, 0)
    with pytest.raises(IndexError):
        local_magnetization(mps, 0, 4)


# -- per-sweep bundle -------------------------------------------------------

def test_sweep_diagnostics_agree_with_state_at_zero_step():
    mps = init_mps(6, 8, 3, seed=5)
    data = random_dataset(10, 6, seed=5)
    new, _, left = sweep_pass(mps, data, 0.0, chi_max=64, rel_threshold=0.0)
    d = compute_diagnostics(new, left)
    np.testing.assert_allclose(d.bond_entropy, bond_entropies(new), atol=1e-10)
    assert d.label_bond_entropy.shape == (3, 5)
    assert d.degenerate_slices == 0
    assert np.trace(d.label_rho) == pytest.approx(1.0, abs=1e-10)
    assert np.abs(d.magnetization).max() <= 1 + 1e-10
