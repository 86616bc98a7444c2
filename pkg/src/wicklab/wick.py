"""Wick (normal-ordered) stochastic integrals against spectral increments.

An integral sums, over the bins below an aligned cut,

    X11 . dLambda  +  X10 . dB+(phi)  +  X01 . dB-(psi)  +  X00 . domega

with step coefficients evaluated at the left bin edge.  Coefficients must
be adapted at their left endpoint; adapted coefficients commute with the
increments of later bins up to boundary-grade truncation effects, which is
what makes the matrix-element route below exact in the untruncated algebra.

The product of two integrals is handled by exact Abel summation

    X Y = sum_j ( X_j dY_j + dX_j Y_j + dX_j dY_j )

whose last term is the Ito correction; the table prediction for it keeps
the four first-order contractions and drops the normal-ordered remainder,
which is second order per bin on exponential-vector panels.
"""

import numpy as np
import scipy.sparse as sp

from .errors import (
    AdaptednessViolation,
    BasisMismatch,
    DimMismatch,
    GridMismatch,
    RefinementMismatch,
)
from .fock import SparseOperator, ampliate, exponential_vector, identity_operator
from .grid import bin_inner
from .processes import adaptedness_defect, bin_increment

ADAPTEDNESS_TOL = 1e-10

INCREMENT_KINDS = ("conserve", "create", "annihilate", "time")


class AdaptedStepProcess:
    """Piecewise constant operator family on bin-edge breakpoints.

    Every piece must pass the adaptedness test at its left endpoint; this
    is checked on construction unless the caller is a trusted builder.
    """

    def __init__(self, grid, breakpoints, pieces, validate=True):
        if not pieces:
            raise RefinementMismatch("need at least one piece")
        if len(breakpoints) != len(pieces) + 1:
            raise RefinementMismatch("need one more breakpoint than pieces")
        idx = [grid.edge_index(b) for b in breakpoints]
        if idx[0] != 0 or idx[-1] != grid.bins or any(
            a >= b for a, b in zip(idx, idx[1:])
        ):
            raise RefinementMismatch(
                "breakpoints must ascend from the grid start to its end"
            )
        for p in pieces[1:]:
            if p.initial_dim != pieces[0].initial_dim or p.basis != pieces[0].basis:
                raise BasisMismatch("pieces live on different spaces")
        if pieces[0].basis.num_modes != grid.num_modes:
            raise DimMismatch("basis modes do not match the grid")
        self.grid = grid
        self.breakpoint_edges = np.asarray(idx, dtype=np.int64)
        self.pieces = list(pieces)
        self.initial_dim = pieces[0].initial_dim
        self.basis = pieces[0].basis
        if validate:
            for k, piece in enumerate(self.pieces):
                left = grid.bin_edges[self.breakpoint_edges[k]]
                defect = adaptedness_defect(piece, grid, left)
                if defect > ADAPTEDNESS_TOL:
                    raise AdaptednessViolation(
                        f"piece {k} has adaptedness defect {defect:.3e} "
                        f"at its left endpoint {left:g}"
                    )

    @classmethod
    def constant(cls, grid, piece, validate=True):
        return cls(
            grid,
            [grid.bin_edges[0], grid.bin_edges[-1]],
            [piece],
            validate=validate,
        )

    def piece_for_bin(self, j):
        k = int(np.searchsorted(self.breakpoint_edges, j, side="right")) - 1
        return self.pieces[k]


def _zero_like(basis, initial_dim):
    n = initial_dim * basis.dim
    return SparseOperator(sp.csr_matrix((n, n), dtype=np.complex128), basis, initial_dim)


class WickIntegrand:
    """The four coefficient slots of a Wick integral plus the smearing
    vectors of its field increments.

    Slots left as None are zero.  phi is required with x10, psi with x01.
    """

    def __init__(self, grid, basis, x11=None, x10=None, x01=None, x00=None,
                 phi=None, psi=None, initial_dim=1):
        if grid.num_modes != basis.num_modes:
            raise DimMismatch("basis modes do not match the grid")
        if basis.statistics != "bose":
            raise ValueError("wick integrals are taken on the bose space")
        slots = {"x11": x11, "x10": x10, "x01": x01, "x00": x00}
        for name, proc in slots.items():
            if proc is None:
                continue
            if proc.grid != grid:
                raise GridMismatch(f"{name} lives on a different grid")
            if proc.initial_dim != initial_dim:
                raise BasisMismatch(f"{name} has a different initial space")
            if proc.basis != basis:
                raise BasisMismatch(f"{name} lives on a different Fock basis")
        if x10 is not None and phi is None:
            raise ValueError("x10 requires the creation smearing phi")
        if x01 is not None and psi is None:
            raise ValueError("x01 requires the annihilation smearing psi")
        for vec in (phi, psi):
            if vec is not None and vec.grid != grid:
                raise GridMismatch("smearing vector lives on a different grid")
        self.grid = grid
        self.basis = basis
        self.initial_dim = initial_dim
        self.x11 = x11
        self.x10 = x10
        self.x01 = x01
        self.x00 = x00
        self.phi = phi
        self.psi = psi
        self._increment_cache = {}

    def _bin_ops(self, j):
        """(dLambda_j, dB+_j, dB-_j) ampliated, built on demand."""
        ops = self._increment_cache.get(j)
        if ops is None:
            lam = dbp = dbm = None
            if self.x11 is not None:
                lam = ampliate(
                    bin_increment(self.grid, self.basis, "conserve", j),
                    self.initial_dim,
                )
            if self.x10 is not None:
                dbp = ampliate(
                    bin_increment(self.grid, self.basis, "create", j, self.phi),
                    self.initial_dim,
                )
            if self.x01 is not None:
                dbm = ampliate(
                    bin_increment(self.grid, self.basis, "annihilate", j, self.psi),
                    self.initial_dim,
                )
            ops = (lam, dbp, dbm)
            self._increment_cache[j] = ops
        return ops

    def increment(self, j):
        """dX over bin j: the four slot contributions summed."""
        lam, dbp, dbm = self._bin_ops(j)
        total = _zero_like(self.basis, self.initial_dim)
        if self.x11 is not None:
            total = total + self.x11.piece_for_bin(j) @ lam
        if self.x10 is not None:
            total = total + self.x10.piece_for_bin(j) @ dbp
        if self.x01 is not None:
            total = total + self.x01.piece_for_bin(j) @ dbm
        if self.x00 is not None:
            total = total + float(self.grid.widths[j]) * self.x00.piece_for_bin(j)
        return total

    def adjoint_increment(self, j, starred=True):
        """Bin increment of the adjoint integral.

        The starred convention conjugates each coefficient and swaps the
        field increments; it reproduces the true adjoint exactly below the
        boundary grade.  starred=False keeps the coefficients as they are.
        """
        lam, dbp, dbm = self._bin_ops(j)
        total = _zero_like(self.basis, self.initial_dim)
        if self.x11 is not None:
            c = self.x11.piece_for_bin(j)
            total = total + (c.dag() if starred else c) @ lam
        if self.x10 is not None:
            c = self.x10.piece_for_bin(j)
            # the creation slot turns into an annihilation increment of phi
            phi_ann = ampliate(
                bin_increment(self.grid, self.basis, "annihilate", j, self.phi),
                self.initial_dim,
            )
            total = total + (c.dag() if starred else c) @ phi_ann
        if self.x01 is not None:
            c = self.x01.piece_for_bin(j)
            psi_cre = ampliate(
                bin_increment(self.grid, self.basis, "create", j, self.psi),
                self.initial_dim,
            )
            total = total + (c.dag() if starred else c) @ psi_cre
        if self.x00 is not None:
            c = self.x00.piece_for_bin(j)
            total = total + float(self.grid.widths[j]) * (c.dag() if starred else c)
        return total


def _common_cut(integrand, omega):
    return integrand.grid.edge_index(omega)


def wick_integral(integrand, omega):
    """The integral over [grid start, omega], an aligned cut."""
    cut = _common_cut(integrand, omega)
    total = _zero_like(integrand.basis, integrand.initial_dim)
    for j in range(cut):
        total = total + integrand.increment(j)
    return total


def adjoint_integral(integrand, omega, starred=True):
    """Integral of the adjoint increments; see adjoint_increment."""
    cut = _common_cut(integrand, omega)
    total = _zero_like(integrand.basis, integrand.initial_dim)
    for j in range(cut):
        total = total + integrand.adjoint_increment(j, starred=starred)
    return total


def _probe_vector(u, fock_coeffs):
    return np.kron(np.asarray(u, dtype=np.complex128), fock_coeffs)


def matrix_element_form(integrand, omega, u, f, v, g):
    """<u x eps(f) | integral | v x eps(g)> via per-bin inner products.

    Exact in the untruncated algebra for adapted step coefficients; under
    truncation it differs from the assembled integral by exponential-tail
    terms, which is what the route-equality check measures.
    """
    cut = _common_cut(integrand, omega)
    bra = _probe_vector(u, exponential_vector(integrand.basis, f.coeffs))
    ket = _probe_vector(v, exponential_vector(integrand.basis, g.coeffs))
    me_cache = {}

    def me(piece):
        key = id(piece)
        val = me_cache.get(key)
        if val is None:
            val = complex(np.vdot(bra, piece.matrix @ ket))
            me_cache[key] = val
        return val

    total = 0.0 + 0.0j
    for j in range(cut):
        if integrand.x11 is not None:
            total += me(integrand.x11.piece_for_bin(j)) * bin_inner(f, g, j)
        if integrand.x10 is not None:
            total += me(integrand.x10.piece_for_bin(j)) * bin_inner(
                f, integrand.phi, j
            )
        if integrand.x01 is not None:
            total += me(integrand.x01.piece_for_bin(j)) * bin_inner(
                integrand.psi, g, j
            )
        if integrand.x00 is not None:
            total += me(integrand.x00.piece_for_bin(j)) * float(
                integrand.grid.widths[j]
            )
    return total


def _check_pair(ix, iy):
    if ix.grid != iy.grid:
        raise RefinementMismatch(
            "integrands live on different grids; no common refinement"
        )
    if ix.basis != iy.basis or ix.initial_dim != iy.initial_dim:
        raise BasisMismatch("integrands live on different spaces")


def _prefixes_and_increments(integrand, cut):
    """X at each left edge (X_0 = 0) and the bin increments."""
    incs = [integrand.increment(j) for j in range(cut)]
    prefixes = [_zero_like(integrand.basis, integrand.initial_dim)]
    for j in range(cut - 1):
        prefixes.append(prefixes[-1] + incs[j])
    return prefixes, incs


def abel_defect(ix, iy, omega):
    """Operator norm of X Y - sum_j (X_j dY_j + dX_j Y_j + dX_j dY_j).

    Pure algebra; zero up to rounding for any pair on a common grid.
    """
    _check_pair(ix, iy)
    cut = _common_cut(ix, omega)
    xp, xi = _prefixes_and_increments(ix, cut)
    yp, yi = _prefixes_and_increments(iy, cut)
    x_full = xp[-1] + xi[-1] if cut else xp[0]
    y_full = yp[-1] + yi[-1] if cut else yp[0]
    total = x_full @ y_full
    for j in range(cut):
        total = total - xp[j] @ yi[j] - xi[j] @ yp[j] - xi[j] @ yi[j]
    return total.norm()


def ito_correction_operators(ix, iy, omega):
    """(measured, predicted) Ito corrections of the product X Y.

    measured: X Y minus both Leibniz sums, which Abel summation makes
    exactly sum_j dX_j dY_j.  predicted: the table contraction
    X11 Y11 dLambda + X11 Y10 dB+(phi_Y) + X01 Y11 dB-(psi_X)
    + X01 Y10 <psi_X | phi_Y>_bin.
    """
    _check_pair(ix, iy)
    cut = _common_cut(ix, omega)
    xp, xi = _prefixes_and_increments(ix, cut)
    yp, yi = _prefixes_and_increments(iy, cut)
    x_full = xp[-1] + xi[-1] if cut else xp[0]
    y_full = yp[-1] + yi[-1] if cut else yp[0]
    measured = x_full @ y_full
    for j in range(cut):
        measured = measured - xp[j] @ yi[j] - xi[j] @ yp[j]

    predicted = _zero_like(ix.basis, ix.initial_dim)
    eye = identity_operator(ix.basis, ix.initial_dim)
    for j in range(cut):
        if ix.x11 is not None and iy.x11 is not None:
            lam = ampliate(
                bin_increment(ix.grid, ix.basis, "conserve", j), ix.initial_dim
            )
            predicted = predicted + (
                ix.x11.piece_for_bin(j) @ iy.x11.piece_for_bin(j) @ lam
            )
        if ix.x11 is not None and iy.x10 is not None:
            dbp = ampliate(
                bin_increment(ix.grid, ix.basis, "create", j, iy.phi),
                ix.initial_dim,
            )
            predicted = predicted + (
                ix.x11.piece_for_bin(j) @ iy.x10.piece_for_bin(j) @ dbp
            )
        if ix.x01 is not None and iy.x11 is not None:
            dbm = ampliate(
                bin_increment(ix.grid, ix.basis, "annihilate", j, ix.psi),
                ix.initial_dim,
            )
            predicted = predicted + (
                ix.x01.piece_for_bin(j) @ iy.x11.piece_for_bin(j) @ dbm
            )
        if ix.x01 is not None and iy.x10 is not None:
            w = bin_inner(ix.psi, iy.phi, j)
            predicted = predicted + w * (
                ix.x01.piece_for_bin(j) @ iy.x10.piece_for_bin(j) @ eye
            )
    return measured, predicted


def ito_correction_defect(ix, iy, omega, panel):
    """Max panel deviation between measured and predicted Ito corrections.

    panel: iterable of (u, f, v, g) with H0 vectors u, v and one-particle
    vectors f, g; deviations are weak matrix elements on u x eps(f).
    """
    measured, predicted = ito_correction_operators(ix, iy, omega)
    diff = measured - predicted
    worst = 0.0
    for u, f, v, g in panel:
        bra = _probe_vector(u, exponential_vector(ix.basis, f.coeffs))
        ket = _probe_vector(v, exponential_vector(ix.basis, g.coeffs))
        worst = max(worst, abs(complex(np.vdot(bra, diff.matrix @ ket))))
    return worst


# ---------------------------------------------------------------------------
# single-bin Ito table probes

_TABLE_ZERO = "zero"

# the seven pairs whose probe matrix elements reproduce the table exactly:
# the four nonzero entries, plus the dB+ row against vacuum bras
EXACT_PAIRS = {
    ("conserve", "conserve"): ("exponential", "one-particle"),
    ("conserve", "create"): ("exponential", "vacuum"),
    ("annihilate", "conserve"): ("exponential", "one-particle"),
    ("annihilate", "create"): ("exponential", "vacuum"),
    ("create", "conserve"): ("vacuum", "exponential"),
    ("create", "create"): ("vacuum", "exponential"),
    ("create", "annihilate"): ("vacuum", "exponential"),
}

NULL_PAIRS = (
    ("conserve", "annihilate"),
    ("conserve", "time"),
    ("annihilate", "annihilate"),
    ("annihilate", "time"),
    ("create", "time"),
    ("time", "conserve"),
    ("time", "create"),
    ("time", "annihilate"),
    ("time", "time"),
)


def _single_increment(grid, basis, kind, j, phi, psi):
    if kind == "conserve":
        return bin_increment(grid, basis, "conserve", j)
    if kind == "create":
        return bin_increment(grid, basis, "create", j, phi)
    if kind == "annihilate":
        return bin_increment(grid, basis, "annihilate", j, psi)
    if kind == "time":
        return float(grid.widths[j]) * identity_operator(basis)
    raise ValueError(f"unknown increment kind {kind!r}")


def _table_entry(grid, basis, row, col, j, phi, psi):
    if (row, col) == ("conserve", "conserve"):
        return bin_increment(grid, basis, "conserve", j)
    if (row, col) == ("conserve", "create"):
        return bin_increment(grid, basis, "create", j, phi)
    if (row, col) == ("annihilate", "conserve"):
        return bin_increment(grid, basis, "annihilate", j, psi)
    if (row, col) == ("annihilate", "create"):
        return bin_inner(psi, phi, j) * identity_operator(basis)
    return None


def ito_table_probe(grid, basis, row, col, j, phi, psi, f, g, bra=None, ket=None):
    """Single-bin product probe: (empirical, predicted) matrix elements.

    row and col name the two increments over bin j ('conserve', 'create',
    'annihilate', 'time'; 'create' smears phi, 'annihilate' smears psi).
    bra/ket choose the probe states ('vacuum', 'exponential' of f or g,
    'one-particle' of g restricted to the bin); defaults come from
    EXACT_PAIRS for the exact seven and are exponential for the rest.
    """
    if bra is None or ket is None:
        default = EXACT_PAIRS.get((row, col), ("exponential", "exponential"))
        bra = bra or default[0]
        ket = ket or default[1]

    def build(mode, vec):
        if mode == "vacuum":
            out = np.zeros(basis.dim, dtype=np.complex128)
            out[0] = 1.0
            return out
        if mode == "exponential":
            return exponential_vector(basis, vec.coeffs)
        if mode == "one-particle":
            vac = np.zeros(basis.dim, dtype=np.complex128)
            vac[0] = 1.0
            out = bin_increment(grid, basis, "create", j, vec).matrix @ vac
            nrm = np.linalg.norm(out)
            if nrm == 0:
                raise ValueError("probe vector vanishes on the bin")
            return out / nrm
        raise ValueError(f"unknown probe mode {mode!r}")

    bra_vec = build(bra, f)
    ket_vec = build(ket, g)
    first = _single_increment(grid, basis, row, j, phi, psi)
    second = _single_increment(grid, basis, col, j, phi, psi)
    empirical = complex(np.vdot(bra_vec, (first @ second).matrix @ ket_vec))
    entry = _table_entry(grid, basis, row, col, j, phi, psi)
    if entry is None:
        predicted = 0.0 + 0.0j
    else:
        predicted = complex(np.vdot(bra_vec, entry.matrix @ ket_vec))
    return empirical, predicted


def estimate_bound(integrand, omega, u, f):
    """(lhs, rhs) of the a priori estimate on ||X_Omega u x eps(f)||^2.

    rhs discretizes the exponential-weight bound with left-edge weights
    and the tail integral starting at the bin's own left edge; slot
    coefficients carry the weights 3, 3, 1, 1.
    """
    cut = _common_cut(integrand, omega)
    grid = integrand.grid
    probe = _probe_vector(u, exponential_vector(integrand.basis, f.coeffs))
    lhs = float(np.linalg.norm(wick_integral(integrand, omega).apply(probe)) ** 2)

    f_bin = np.array([bin_inner(f, f, j).real for j in range(grid.bins)])
    tail = np.concatenate((np.cumsum(f_bin[:cut][::-1])[::-1], [0.0]))
    rhs = 0.0
    for j in range(cut):
        weight = np.exp(
            float(omega - grid.bin_edges[j]) + 3.0 * tail[j]
        )
        term = 0.0
        if integrand.x11 is not None:
            r = np.linalg.norm(integrand.x11.piece_for_bin(j).apply(probe)) ** 2
            term += 3.0 * f_bin[j] * r
        if integrand.x10 is not None:
            r = np.linalg.norm(integrand.x10.piece_for_bin(j).apply(probe)) ** 2
            term += 3.0 * bin_inner(integrand.phi, integrand.phi, j).real * r
        if integrand.x01 is not None:
            r = np.linalg.norm(integrand.x01.piece_for_bin(j).apply(probe)) ** 2
            term += bin_inner(integrand.psi, integrand.psi, j).real * r
        if integrand.x00 is not None:
            r = np.linalg.norm(integrand.x00.piece_for_bin(j).apply(probe)) ** 2
            term += float(grid.widths[j]) * r
        rhs += weight * term
    return lhs, rhs
