"""Wick integrals: assembly, route equality, algebra, Ito table, bound."""

import numpy as np
import pytest
import scipy.sparse as sp

from wicklab.errors import AdaptednessViolation, RefinementMismatch
from wicklab.fock import (
    SparseOperator,
    enumerate_basis,
    exponential_vector,
    field_operator,
    identity_operator,
)
from wicklab.grid import bin_inner, build_grid, sample_function
from wicklab.processes import spectral_process
from wicklab.wick import (
    EXACT_PAIRS,
    NULL_PAIRS,
    AdaptedStepProcess,
    WickIntegrand,
    abel_defect,
    adjoint_integral,
    estimate_bound,
    ito_correction_defect,
    ito_table_probe,
    matrix_element_form,
    wick_integral,
)


def make_step(grid, basis, rng, scale=0.1, initial_dim=1):
    mid = grid.bins // 2
    breaks = [grid.bin_edges[0], grid.bin_edges[mid], grid.bin_edges[-1]]
    pieces = []
    for edge_idx in (0, mid):
        cut = int(grid.mode_offsets[edge_idx])
        f = np.zeros(grid.num_modes, dtype=np.complex128)
        if cut:
            f[:cut] = scale * (rng.standard_normal(cut) + 1j * rng.standard_normal(cut))
        fld = field_operator(basis, "create", f) \
            + field_operator(basis, "annihilate", np.conj(f))
        a0 = complex(rng.standard_normal() + 1j * rng.standard_normal())
        mat = a0 * identity_operator(basis).matrix + fld.matrix
        pieces.append(SparseOperator(mat.tocsr(), basis, initial_dim))
    return AdaptedStepProcess(grid, breaks, pieces)


def make_integrand(grid, basis, rng, scale=0.1):
    w = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda om: 0.5 * w * np.exp(1j * om))
    psi = sample_function(grid, lambda om: 0.4 * w / (1.0 + om))
    return WickIntegrand(
        grid,
        basis,
        x11=make_step(grid, basis, rng, scale),
        x10=make_step(grid, basis, rng, scale),
        x01=make_step(grid, basis, rng, scale),
        x00=make_step(grid, basis, rng, scale),
        phi=phi,
        psi=psi,
    )


def test_step_process_validates_adaptedness():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 2)
    phi = sample_function(grid, lambda w: 1.0 + 0.0j)
    late = spectral_process(grid, basis, "create", phi, omega=1.0)
    with pytest.raises(AdaptednessViolation):
        AdaptedStepProcess(grid, [0.0, 0.5, 1.0], [late, late])
    # the same pieces are accepted when the caller vouches for them
    proc = AdaptedStepProcess(grid, [0.0, 0.5, 1.0], [late, late], validate=False)
    assert proc.piece_for_bin(3) is late


def test_step_process_breakpoint_errors():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 2)
    ident = identity_operator(basis)
    with pytest.raises(RefinementMismatch):
        AdaptedStepProcess(grid, [0.0, 1.0], [])
    with pytest.raises(RefinementMismatch):
        AdaptedStepProcess(grid, [0.0, 0.25, 1.0], [ident])
    with pytest.raises(RefinementMismatch):
        AdaptedStepProcess(grid, [0.25, 1.0], [ident])
    with pytest.raises(RefinementMismatch):
        AdaptedStepProcess(grid, [0.0, 0.5], [ident])


def test_integrand_requires_smearing_vectors():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 2)
    step = AdaptedStepProcess.constant(grid, identity_operator(basis))
    with pytest.raises(ValueError):
        WickIntegrand(grid, basis, x10=step)
    with pytest.raises(ValueError):
        WickIntegrand(grid, basis, x01=step)
    with pytest.raises(ValueError):
        WickIntegrand(grid, enumerate_basis("fermi", 4, 2), x00=None)


def test_route_equality_on_probe_states():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 6)
    rng = np.random.default_rng(21)
    ix = make_integrand(grid, basis, rng, scale=5e-3)
    w = 1.0 / np.sqrt(grid.omega_max)
    f = sample_function(grid, lambda om: 5e-3 * w * (1.0 + 0.3j * om))
    g = sample_function(grid, lambda om: 5e-3 * w * np.exp(-om))
    u = np.ones(1)
    for omega in (0.5, 1.0):
        bra = np.kron(u, exponential_vector(basis, f.coeffs))
        ket = np.kron(u, exponential_vector(basis, g.coeffs))
        assembled = complex(np.vdot(bra, wick_integral(ix, omega).matrix @ ket))
        formed = matrix_element_form(ix, omega, u, f, u, g)
        assert abs(assembled - formed) <= 1e-12


def test_abel_summation_is_algebraic():
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 3)
    rng = np.random.default_rng(22)
    ix = make_integrand(grid, basis, rng)
    iy = make_integrand(grid, basis, rng)
    assert abel_defect(ix, iy, 1.0) <= 1e-12
    assert abel_defect(ix, iy, 0.5) <= 1e-12


def test_starred_adjoint_matches_dagger_under_compression():
    grid = build_grid(1.0, 4, 1)
    m = 4
    basis = enumerate_basis("bose", 4, m)
    rng = np.random.default_rng(23)
    ix = make_integrand(grid, basis, rng)
    gap = adjoint_integral(ix, 1.0, starred=True) - wick_integral(ix, 1.0).dag()
    assert gap.norm(grade_cap=m - 1) <= 1e-12
    # the unstarred variant drops the conserve twist and differs
    rough = adjoint_integral(ix, 1.0, starred=False) - wick_integral(ix, 1.0).dag()
    assert rough.norm(grade_cap=m - 1) > 1e-6


def test_ito_exact_pairs_match_table():
    grid = build_grid(1.0, 8, 1)
    basis = enumerate_basis("bose", 8, 3)
    w = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda om: 0.6 * w * np.exp(1j * om))
    psi = sample_function(grid, lambda om: 0.5 * w / (1.0 + om))
    f = sample_function(grid, lambda om: 0.4 * w * (1.0 - 0.2j * om))
    g = sample_function(grid, lambda om: 0.3 * w * np.exp(-om))
    for row, col in EXACT_PAIRS:
        emp, pred = ito_table_probe(grid, basis, row, col, 3, phi, psi, f, g)
        assert abs(emp - pred) <= 1e-13, (row, col)


def test_ito_null_pairs_shrink_with_refinement():
    defects = {}
    for n in (4, 16):
        grid = build_grid(1.0, n, 1)
        basis = enumerate_basis("bose", n, 3)
        w = 1.0 / np.sqrt(grid.omega_max)
        phi = sample_function(grid, lambda om: 0.6 * w * np.exp(1j * om))
        psi = sample_function(grid, lambda om: 0.5 * w / (1.0 + om))
        f = sample_function(grid, lambda om: 0.4 * w * (1.0 - 0.2j * om))
        g = sample_function(grid, lambda om: 0.3 * w * np.exp(-om))
        worst = 0.0
        for row, col in NULL_PAIRS:
            emp, pred = ito_table_probe(grid, basis, row, col, n // 2, phi, psi, f, g)
            assert pred == 0.0
            worst = max(worst, abs(emp))
        defects[n] = worst
    assert defects[4] > 0.0
    assert defects[16] < defects[4] / 4.0  # second order in the bin width


def test_ito_probe_hand_value():
    # constant smearing phi = psi = 1 on [0,1): each bin carries weight 1/4,
    # so <vac| dB- dB+ |vac> over one bin is exactly 0.25
    grid = build_grid(1.0, 4, 1)
    basis = enumerate_basis("bose", 4, 2)
    one = sample_function(grid, lambda w: 1.0 + 0.0j)
    emp, pred = ito_table_probe(
        grid, basis, "annihilate", "create", 2, one, one, one, one,
        bra="vacuum", ket="vacuum",
    )
    assert emp == pytest.approx(0.25)
    assert pred == pytest.approx(0.25)
    assert complex(bin_inner(one, one, 2)) == pytest.approx(0.25)


def test_ito_correction_defect_shrinks():
    defects = {}
    for n in (4, 16):
        grid = build_grid(1.0, n, 1)
        basis = enumerate_basis("bose", n, 3)
        w = 1.0 / np.sqrt(grid.omega_max)
        phi = sample_function(grid, lambda om: 0.5 * w * np.exp(1j * om))
        psi = sample_function(grid, lambda om: 0.4 * w / (1.0 + om))
        ident = AdaptedStepProcess.constant(grid, identity_operator(basis))
        ix = WickIntegrand(grid, basis, x10=ident, phi=phi)
        iy = WickIntegrand(grid, basis, x01=ident, psi=psi)
        f = sample_function(grid, lambda om: 0.3 * w * (1.0 + 0.1j * om))
        u = np.ones(1)
        defects[n] = ito_correction_defect(ix, iy, 1.0, [(u, f, u, f)])
    assert defects[16] < defects[4] / 2.0  # first order in the bin width


def test_estimate_bound_holds():
    grid = build_grid(1.0, 8, 1)
    basis = enumerate_basis("bose", 8, 2)
    rng = np.random.default_rng(24)
    w = 1.0 / np.sqrt(grid.omega_max)
    f = sample_function(grid, lambda om: 0.5 * w * np.exp(0.2j * om))
    for _ in range(5):
        ix = make_integrand(grid, basis, rng, scale=0.2)
        lhs, rhs = estimate_bound(ix, 1.0, np.ones(1), f)
        assert lhs <= rhs * (1.0 + 1e-12)
