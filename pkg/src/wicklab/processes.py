"""Frequency-indexed operator processes over a grid-bound Fock space.

Every process is evaluated at bin edges only; a cut inside a bin raises
MisalignedCut.  Fermi processes are built on the *bose* space by dressing
each mode's creation with the parity of all lower modes, so that
annihilation is exactly the adjoint of creation.
"""

import numpy as np
import scipy.sparse as sp

from .errors import DimMismatch, GridMismatch
from .fock import SparseOperator, diagonal_operator, field_operator, spectral_norm
from .grid import OneParticleVector

FIELD_KINDS = ("create", "annihilate")


def _check_space(grid, basis):
    if grid.num_modes != basis.num_modes:
        raise DimMismatch(
            f"grid has {grid.num_modes} modes, basis has {basis.num_modes}"
        )


def _check_phi(grid, phi):
    if phi.grid != grid:
        raise GridMismatch("coefficient vector lives on a different grid")


def _mode_cut(grid, omega):
    return int(grid.mode_offsets[grid.edge_index(omega)])


def prefix_parity_signs(basis):
    """(dim, modes) array of (-1)^(number of particles strictly below mode)."""
    cached = getattr(basis, "_prefix_parity", None)
    if cached is None:
        below = np.cumsum(basis.occs, axis=1, dtype=np.int64) - basis.occs
        cached = (1.0 - 2.0 * (below & 1)).astype(np.float64)
        basis._prefix_parity = cached
    return cached


def counting_diag(grid, basis, omega):
    """Per-state particle count in the bins below the cut."""
    cut = _mode_cut(grid, omega)
    return basis.occs[:, :cut].sum(axis=1).astype(np.float64)


def spectral_process(grid, basis, kind, phi=None, omega=None):
    """B+/B-/Lambda evaluated on the window up to an aligned cut.

    kind 'create' and 'annihilate' need phi; 'conserve' counts particles
    below the cut.
    """
    _check_space(grid, basis)
    if omega is None:
        raise ValueError("omega is required")
    if kind == "conserve":
        return diagonal_operator(basis, counting_diag(grid, basis, omega))
    if kind not in FIELD_KINDS:
        raise ValueError(f"unknown process kind {kind!r}")
    _check_phi(grid, phi)
    cut = _mode_cut(grid, omega)
    masked = np.where(np.arange(grid.num_modes) < cut, phi.coeffs, 0.0)
    return field_operator(basis, kind, masked)


def parity_process(grid, basis, omega):
    """J = (-1)^(particle count below the cut), a diagonal involution."""
    _check_space(grid, basis)
    counts = basis.occs[:, : _mode_cut(grid, omega)].sum(axis=1)
    return diagonal_operator(basis, 1.0 - 2.0 * (counts & 1))


def fermi_process(grid, basis, kind, phi, omega):
    """Jordan-Wigner fermi field on the bose space up to an aligned cut.

    F+ = sum over modes below the cut of phi_m S_m b+_m, with S_m the
    parity of all lower modes; 'annihilate' is exactly the adjoint.
    """
    _check_space(grid, basis)
    _check_phi(grid, phi)
    if kind not in FIELD_KINDS:
        raise ValueError(f"unknown process kind {kind!r}")
    cut = _mode_cut(grid, omega)
    signs = prefix_parity_signs(basis)
    trips = basis.ladder_triplets()
    srcs, tgts, data = [], [], []
    for m in range(cut):
        c = phi.coeffs[m]
        if c == 0:
            continue
        src, tgt, amp = trips[m]
        srcs.append(src)
        tgts.append(tgt)
        # the prefix parity is the same seen from source or target
        data.append(c * amp * signs[src, m])
    if srcs:
        src = np.concatenate(srcs)
        tgt = np.concatenate(tgts)
        val = np.concatenate(data)
    else:
        src = tgt = np.zeros(0, dtype=np.int64)
        val = np.zeros(0, dtype=np.complex128)
    create = sp.coo_matrix((val, (tgt, src)), shape=(basis.dim, basis.dim)).tocsr()
    op = SparseOperator(create, basis)
    return op if kind == "create" else op.dag()


def bin_increment(grid, basis, kind, j, phi=None):
    """Single-bin increment of a process over bin j.

    'conserve': particle count in bin j.  'create'/'annihilate': field of
    phi restricted to bin j.  'fermi-create'/'fermi-annihilate': the
    parity-dressed increment J_(left edge) x (bin field).  'parity':
    J(right edge) - J(left edge).
    """
    _check_space(grid, basis)
    sl = grid.bin_modes(j)
    if kind == "conserve":
        return diagonal_operator(
            basis, basis.occs[:, sl].sum(axis=1).astype(np.float64)
        )
    if kind == "parity":
        lo = grid.bin_edges[j]
        hi = grid.bin_edges[j + 1]
        return parity_process(grid, basis, hi) - parity_process(grid, basis, lo)
    _check_phi(grid, phi)
    mask = np.zeros(grid.num_modes, dtype=bool)
    mask[sl] = True
    masked = np.where(mask, phi.coeffs, 0.0)
    if kind in FIELD_KINDS:
        return field_operator(basis, kind, masked)
    if kind in ("fermi-create", "fermi-annihilate"):
        base = kind.split("-")[1]
        hi = grid.bin_edges[j + 1]
        return fermi_process(grid, basis, base, OneParticleVector(grid, masked), hi)
    raise ValueError(f"unknown increment kind {kind!r}")


class ProcessFamily:
    """A process evaluated lazily at aligned cuts, with cached evaluations."""

    def __init__(self, grid, basis, kind, phi=None):
        _check_space(grid, basis)
        if phi is not None:
            _check_phi(grid, phi)
        self.grid = grid
        self.basis = basis
        self.kind = kind
        self.phi = phi
        self._cache = {}

    def at(self, omega):
        key = self.grid.edge_index(omega)
        op = self._cache.get(key)
        if op is None:
            if self.kind == "parity":
                op = parity_process(self.grid, self.basis, omega)
            elif self.kind in ("fermi-create", "fermi-annihilate"):
                op = fermi_process(
                    self.grid, self.basis, self.kind.split("-")[1], self.phi, omega
                )
            else:
                op = spectral_process(
                    self.grid, self.basis, self.kind, self.phi, omega
                )
            self._cache[key] = op
        return op

    def increment(self, j):
        return bin_increment(self.grid, self.basis, self.kind, j, self.phi)


def adaptedness_defect(op, grid, omega, grade_cap=None):
    """Max compressed commutator norm with ladder operators beyond the cut.

    An operator adapted to [0, omega] commutes with every creation and
    annihilation operator of the later modes; the commutators are cut to
    grades <= truncation - 1 before taking norms so that boundary-grade
    truncation artifacts are not counted.
    """
    basis = op.basis
    _check_space(grid, basis)
    if grade_cap is None:
        grade_cap = basis.truncation - 1
    start = _mode_cut(grid, omega)
    keep = np.tile(basis.grade_mask(grade_cap), op.initial_dim)
    keep = np.flatnonzero(keep)
    eye_init = sp.identity(op.initial_dim, dtype=np.complex128, format="csr")
    worst = 0.0
    for m in range(start, grid.num_modes):
        ladder = sp.kron(eye_init, basis.creation_matrix(m), format="csr")
        for lad in (ladder, ladder.getH().tocsr()):
            comm = op.matrix @ lad - lad @ op.matrix
            if comm.count_nonzero() == 0:
                continue
            worst = max(worst, spectral_norm(comm[keep][:, keep]))
    return worst
