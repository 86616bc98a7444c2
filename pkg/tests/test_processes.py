"""Spectral processes: parity, Jordan-Wigner fields, increments, adaptedness."""

import numpy as np
import pytest
import scipy.sparse as sp

from wicklab.fock import (
    enumerate_basis,
    field_operator,
    identity_operator,
    spectral_norm,
    vacuum_vector,
)
from wicklab.grid import OneParticleVector, build_grid, inner_product, sample_function
from wicklab.processes import (
    ProcessFamily,
    adaptedness_defect,
    bin_increment,
    counting_diag,
    fermi_process,
    parity_process,
    prefix_parity_signs,
    spectral_process,
)


def dense_jw_oracle(d, m, phi_coeffs):
    """Independent kron-chain construction of the parity-dressed creator.

    Build single-mode ladder matrices on an (m+1)-level chain, kron them
    with parity factors on the lower modes, then restrict to the rows and
    columns whose total occupation stays within the truncation.
    """
    lvl = m + 1
    create = np.diag(np.sqrt(np.arange(1, lvl)), -1)
    parity = np.diag((-1.0) ** np.arange(lvl))
    eye = np.eye(lvl)
    total = np.zeros((lvl ** d, lvl ** d), dtype=complex)
    for mode in range(d):
        factors = [parity] * mode + [create] + [eye] * (d - mode - 1)
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        total += phi_coeffs[mode] * term
    # chain index -> occupation tuple, row-major with mode 0 slowest
    occs = np.array(np.unravel_index(np.arange(lvl ** d), (lvl,) * d)).T
    keep = occs.sum(axis=1) <= m
    return total[np.ix_(keep, keep)], occs[keep]


def test_jw_creator_against_dense_oracle():
    d, m = 3, 2
    grid = build_grid(1.0, d, 1)
    basis = enumerate_basis("bose", d, m)
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    phi = OneParticleVector(grid, coeffs)
    ours = fermi_process(grid, basis, "create", phi, 1.0).matrix.toarray()
    oracle, occs = dense_jw_oracle(d, m, coeffs)
    # reorder the oracle into our basis order
    lookup = {tuple(row): k for k, row in enumerate(occs.tolist())}
    perm = np.array([lookup[tuple(row)] for row in basis.occs.tolist()])
    assert np.allclose(ours, oracle[np.ix_(perm, perm)], atol=1e-13)


def test_jw_sign_on_occupied_lower_mode():
    grid = build_grid(1.0, 2, 1)
    basis = enumerate_basis("bose", 2, 2)
    e1 = OneParticleVector(grid, np.array([0.0, 1.0], dtype=complex))
    fp = fermi_process(grid, basis, "create", e1, 1.0)
    i = {tuple(occ): k for k, occ in enumerate(basis.occs.tolist())}
    state = np.zeros(basis.dim, dtype=complex)
    state[i[(1, 0)]] = 1.0
    out = fp.matrix @ state
    assert out[i[(1, 1)]] == pytest.approx(-1.0)


def test_prefix_parity_signs():
    basis = enumerate_basis("bose", 3, 2)
    signs = prefix_parity_signs(basis)
    i = {tuple(occ): k for k, occ in enumerate(basis.occs.tolist())}
    assert signs[i[(1, 1, 0)], 2] == pytest.approx(1.0)
    assert signs[i[(1, 0, 0)], 1] == pytest.approx(-1.0)
    assert signs[i[(2, 0, 0)], 1] == pytest.approx(1.0)


def test_parity_process_properties():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 3)
    vac = vacuum_vector(basis)
    for k in range(5):
        j = parity_process(grid, basis, grid.bin_edges[k])
        assert spectral_norm((j.matrix @ j.matrix
                              - identity_operator(basis).matrix).tocsr()) == 0.0
        assert np.linalg.norm(j.matrix @ vac - vac) == 0.0
    ja = parity_process(grid, basis, 0.5)
    jb = parity_process(grid, basis, 0.75)
    assert ja.commutator(jb).norm() == 0.0


def test_parity_recursion():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 3)
    for k in range(1, 5):
        ja = parity_process(grid, basis, grid.bin_edges[k])
        jp = parity_process(grid, basis, grid.bin_edges[k - 1])
        counts = bin_increment(grid, basis, "conserve", k - 1).matrix.diagonal().real
        flip = sp.diags(1.0 - 2.0 * (counts.astype(np.int64) & 1), 0, format="csr")
        assert spectral_norm(ja.matrix - jp.matrix @ flip) == 0.0


def test_parity_anticommutes_with_fermi_fields():
    grid = build_grid(1.0, 3, 1)
    basis = enumerate_basis("bose", 3, 3)
    phi = sample_function(grid, lambda w: np.exp(1j * w))
    for k in range(1, 4):
        omega = grid.bin_edges[k]
        j = parity_process(grid, basis, omega)
        for kind in ("create", "annihilate"):
            f = fermi_process(grid, basis, kind, phi, omega)
            assert j.anticommutator(f).norm() <= 1e-13


def test_car_uniform_value_and_dense_oracle():
    n, m = 4, 2
    grid = build_grid(1.0, n, 1)
    basis = enumerate_basis("bose", n, m)
    phi = sample_function(grid, lambda w: 1.0)  # unit norm, coeffs 1/sqrt(n)
    fp = fermi_process(grid, basis, "create", phi, 1.0)
    fm = fermi_process(grid, basis, "annihilate", phi, 1.0)
    gap = fm.anticommutator(fp) - complex(inner_product(phi, phi)) * identity_operator(basis)
    one = np.flatnonzero(basis.grades == 1)
    block = gap.matrix[one][:, one].toarray()
    assert np.allclose(block, (2.0 / n) * np.eye(n), atol=1e-14)

    # same value out of the independent kron-chain oracle
    oracle_plus, occs = dense_jw_oracle(n, m, phi.coeffs)
    anti = oracle_plus.conj().T @ oracle_plus + oracle_plus @ oracle_plus.conj().T
    keep_one = np.flatnonzero(occs.sum(axis=1) == 1)
    oracle_block = anti[np.ix_(keep_one, keep_one)] - np.eye(n)
    assert np.allclose(np.linalg.norm(oracle_block, 2), 2.0 / n, atol=1e-14)


def test_car_gap_on_single_occupancy_sector():
    # on the 0/1-occupancy sector the anticommutator gap is diagonal with
    # entries 2 conj(phi_k) psi_k; double occupancy spoils this at grade 2+
    grid = build_grid(1.0, 3, 1)
    basis = enumerate_basis("bose", 3, 3)
    rng = np.random.default_rng(12)
    phi = OneParticleVector(grid, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    psi = OneParticleVector(grid, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    anti = fermi_process(grid, basis, "annihilate", phi, 1.0).anticommutator(
        fermi_process(grid, basis, "create", psi, 1.0)
    )
    gap = anti - complex(inner_product(phi, psi)) * identity_operator(basis)
    low = np.flatnonzero(basis.grades <= 1)
    block = gap.matrix[low][:, low].toarray()
    expected = np.zeros((4, 4), dtype=complex)
    order = basis.occs[low].argmax(axis=1)  # singles sorted by their mode
    for row, k in zip(range(1, 4), order[1:]):
        expected[row, row] = 2.0 * np.conj(phi.coeffs[k]) * psi.coeffs[k]
    assert np.allclose(block, expected, atol=1e-13)


def test_process_family_increments_sum():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 2)
    phi = sample_function(grid, lambda w: w + 0.5j)
    for kind in ("create", "annihilate", "conserve", "fermi-create"):
        fam = ProcessFamily(grid, basis, kind, None if kind == "conserve" else phi)
        total = None
        for j in range(4):
            inc = fam.increment(j)
            total = inc if total is None else total + inc
        assert (fam.at(1.0) - total).norm() <= 1e-13


def test_spectral_process_window():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 2)
    phi = sample_function(grid, lambda w: 1.0 + 0.0j)
    half = spectral_process(grid, basis, "create", phi, omega=0.5)
    masked = np.where(np.arange(4) < 2, phi.coeffs, 0.0)
    direct = field_operator(basis, "create", masked)
    assert (half - direct).norm() == 0.0
    counts = counting_diag(grid, basis, 0.5)
    assert counts.max() == basis.occs[:, :2].sum(axis=1).max()


def test_adaptedness_defect_detects_late_support():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 3)
    phi = sample_function(grid, lambda w: 1.0 + 0.0j)
    early = spectral_process(grid, basis, "create", phi, omega=0.5)
    assert adaptedness_defect(early, grid, 0.5) <= 1e-13
    late = spectral_process(grid, basis, "create", phi, omega=1.0)
    assert adaptedness_defect(late, grid, 0.5) > 0.1
