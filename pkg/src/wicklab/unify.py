"""The boson-to-fermion unification map and its covariance checks.

Xi sends each at-most-singly-occupied bose occupation state to the fermi
state with the same label, with coefficient +1: ascending mode order makes
the wedge relabeling sign-free.  Xi is a partial isometry; conjugation by
it turns the Jordan-Wigner fields of the bose space into the intrinsic
fermi fields of the projected smearing vector, exactly, because creation
out of the top grade is truncated to zero on both sides.
"""

import itertools

import numpy as np
import scipy.sparse as sp

from .errors import TruncationTooSmall
from .fock import (
    SparseOperator,
    enumerate_basis,
    field_operator,
    spectral_norm,
    vacuum_vector,
)
from .grid import OneParticleVector, project
from .processes import bin_increment, counting_diag, fermi_process


class XiMap:
    """Partial isometry from the bose space onto the fermi space."""

    def __init__(self, grid, truncation):
        self.grid = grid
        self.truncation = truncation
        self.bose = enumerate_basis("bose", grid.num_modes, truncation)
        self.fermi = enumerate_basis("fermi", grid.num_modes, truncation)
        single = ~np.any(self.bose.occs > 1, axis=1)
        cols = np.flatnonzero(single)
        rows = np.array(
            [self.fermi.index_of(self.bose.occs[c]) for c in cols], dtype=np.int64
        )
        data = np.ones(cols.size, dtype=np.complex128)
        self.matrix = sp.coo_matrix(
            (data, (rows, cols)), shape=(self.fermi.dim, self.bose.dim)
        ).tocsr()
        self.single_mask = single

    def conjugate(self, bose_op):
        """Xi X Xi^dag as an operator on the fermi basis."""
        mat = self.matrix @ bose_op.matrix @ self.matrix.getH()
        return SparseOperator(mat, self.fermi)

    def occupancy_projector(self):
        """Xi^dag Xi: the at-most-singly-occupied projector on the bose side."""
        return (self.matrix.getH() @ self.matrix).tocsr()


def build_xi(grid, truncation):
    return XiMap(grid, truncation)


def isometry_defects(xi):
    """Deviations of Xi^dag Xi from the occupancy projector and of
    Xi Xi^dag from the fermi identity."""
    p = sp.diags(
        xi.single_mask.astype(np.complex128), 0, format="csr"
    )
    left = spectral_norm(xi.occupancy_projector() - p)
    right = spectral_norm(
        (xi.matrix @ xi.matrix.getH()).tocsr()
        - sp.identity(xi.fermi.dim, dtype=np.complex128, format="csr")
    )
    return {"dagger_xi": left, "xi_dagger": right}


def field_covariance_defect(xi, phi, omega):
    """Covariance of Xi over the fermi fields at an aligned cut.

    Returns the conjugation defects for creation and annihilation together
    with the leakage norms out of the singly-occupied subspace (over its
    whole domain and restricted to one-particle sources).
    """
    projected = project(phi, xi.grid.bin_edges[0], omega)
    out = {}
    for kind in ("create", "annihilate"):
        jw = fermi_process(xi.grid, xi.bose, kind, phi, omega)
        intrinsic = field_operator(xi.fermi, kind, projected.coeffs)
        out[kind] = spectral_norm(xi.conjugate(jw).matrix - intrinsic.matrix)

    jw_plus = fermi_process(xi.grid, xi.bose, "create", phi, omega)
    p = xi.single_mask.astype(np.float64)
    complement = sp.diags(1.0 - p, 0, format="csr")
    keep = sp.diags(p, 0, format="csr")
    out["leakage"] = spectral_norm(complement @ jw_plus.matrix @ keep)
    one = (xi.bose.grades == 1).astype(np.float64)
    out["leakage_one_particle"] = spectral_norm(
        complement @ jw_plus.matrix @ sp.diags(one, 0, format="csr")
    )
    return out


def leakage_closed_form(phi, omega, truncation):
    """sqrt(2 * sum of the truncation-1 largest squared moduli) below the cut.

    The double-occupancy block of F+ has orthogonal columns, one per
    singly-occupied source that still admits creation, so its norm is the
    largest column norm.
    """
    grid = phi.grid
    cut = int(grid.mode_offsets[grid.edge_index(omega)])
    weights = np.sort(np.abs(phi.coeffs[:cut]) ** 2)[::-1]
    take = min(truncation - 1, weights.size)
    return float(np.sqrt(2.0 * weights[:take].sum()))


def number_covariance_defect(xi, omega):
    """Xi gamma_+(P_[0,omega]) Xi^dag against gamma_-(P_[0,omega])."""
    bose_counts = counting_diag(xi.grid, xi.bose, omega)
    fermi_counts = counting_diag(xi.grid, xi.fermi, omega)
    lhs = xi.matrix @ sp.diags(bose_counts, 0, format="csr") @ xi.matrix.getH()
    return spectral_norm(lhs - sp.diags(fermi_counts, 0, format="csr"))


def _perm_sign(perm):
    sign = 1.0
    for i in range(len(perm)):
        for k in range(i + 1, len(perm)):
            if perm[i] > perm[k]:
                sign = -sign
    return sign


def ordered_product_defect(grid, basis, phis, omega, direction):
    """Vector defect of the ordered-product identities on the vacuum.

    direction 'fermi-from-bose': the product of Jordan-Wigner creators
    against the signed sum of time-ordered plain-field increments.
    direction 'bose-from-fermi': the product of plain creators of the
    projected vectors against the unsigned sum of time-ordered
    Jordan-Wigner increments.  Products apply rightmost factor first; the
    increment at the smallest bin carries the first vector of the
    permutation.
    """
    n = len(phis)
    if n > basis.truncation:
        raise TruncationTooSmall(
            f"{n} creators exceed truncation {basis.truncation}"
        )
    if direction not in ("fermi-from-bose", "bose-from-fermi"):
        raise ValueError(f"unknown direction {direction!r}")
    cut = grid.edge_index(omega)
    vac = vacuum_vector(basis)

    lhs = vac
    if direction == "fermi-from-bose":
        for phi in reversed(phis):
            lhs = fermi_process(grid, basis, "create", phi, omega).matrix @ lhs
        inc_kind = "create"
        signed = True
    else:
        for phi in reversed(phis):
            projected = project(phi, grid.bin_edges[0], omega)
            lhs = field_operator(basis, "create", projected.coeffs).matrix @ lhs
        inc_kind = "fermi-create"
        signed = False

    incs = {}

    def inc(i, j):
        op = incs.get((i, j))
        if op is None:
            op = bin_increment(grid, basis, inc_kind, j, phis[i]).matrix
            incs[(i, j)] = op
        return op

    # skip bins where a vector has no support; exact zeros prune the sum
    support = [
        {
            j
            for j in range(cut)
            if np.any(phis[i].coeffs[grid.bin_modes(j)] != 0)
        }
        for i in range(n)
    ]

    rhs = np.zeros_like(vac)
    for bins in itertools.combinations(range(cut), n):
        for perm in itertools.permutations(range(n)):
            # perm[k] is the vector index riding bin bins[k]
            if any(bins[k] not in support[perm[k]] for k in range(n)):
                continue
            vec = vac
            for k in range(n - 1, -1, -1):
                vec = inc(perm[k], bins[k]) @ vec
            rhs = rhs + (_perm_sign(perm) if signed else 1.0) * vec
    return float(np.linalg.norm(lhs - rhs))
