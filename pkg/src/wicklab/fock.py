"""Truncated Fock spaces over a finite mode set, bose and fermi.

States are labeled by occupation vectors, ordered by total particle number
(grade) and descending lexicographically inside each grade.  Creation out
of the top grade is truncated to zero; every grade-preserving construction
(second quantization, number operators) is exact under the truncation.

The dense tensor oracle at the bottom rebuilds everything on the explicit
tensor algebra over C^D and is the reference the sparse constructions are
tested against.
"""

import itertools
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import BasisMismatch, DimMismatch, SizeOverflow, TruncationTooSmall

DIM_CAP = 200_000
_NORM_DENSE_MAX = 512
_POWER_ITERS = 20
_POWER_RTOL = 1e-6


def _bose_dim(num_modes, truncation):
    return sum(math.comb(num_modes + n - 1, n) for n in range(truncation + 1))


def _fermi_dim(num_modes, truncation):
    return sum(math.comb(num_modes, n) for n in range(min(truncation, num_modes) + 1))


def _bose_grade_rows(n, width):
    # compositions of n into `width` parts, descending lex
    if width == 1:
        return np.array([[n]], dtype=np.uint8)
    blocks = []
    for k in range(n, -1, -1):
        tail = _bose_grade_rows(n - k, width - 1)
        block = np.empty((tail.shape[0], width), dtype=np.uint8)
        block[:, 0] = k
        block[:, 1:] = tail
        blocks.append(block)
    return np.concatenate(blocks, axis=0)


def _fermi_grade_rows(n, width):
    combos = list(itertools.combinations(range(width), n))
    rows = np.zeros((len(combos), width), dtype=np.uint8)
    for i, c in enumerate(combos):
        rows[i, list(c)] = 1
    return rows


class FockBasis:
    """Occupation basis of a truncated Fock space.

    Use `enumerate_basis` to construct; the constructor trusts its inputs.
    """

    def __init__(self, statistics, num_modes, truncation, occs, grade_offsets):
        self.statistics = statistics
        self.num_modes = num_modes
        self.truncation = truncation
        self.occs = occs
        self.grade_offsets = grade_offsets
        self.dim = occs.shape[0]
        self.grades = occs.sum(axis=1).astype(np.int64)
        self.top_grade = len(grade_offsets) - 2
        self._triplets = None
        self._creation = {}
        self._index = None
        self._sqrt_fact = None

    def __eq__(self, other):
        return (
            isinstance(other, FockBasis)
            and self.statistics == other.statistics
            and self.num_modes == other.num_modes
            and self.truncation == other.truncation
        )

    def __repr__(self):
        return (
            f"FockBasis({self.statistics}, modes={self.num_modes}, "
            f"truncation={self.truncation}, dim={self.dim})"
        )

    def index_of(self, occ):
        """Basis index of an occupation row."""
        if self._index is None:
            self._index = {
                self.occs[i].tobytes(): i for i in range(self.dim)
            }
        key = np.asarray(occ, dtype=np.uint8).tobytes()
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"occupation {occ} not in basis") from None

    def ladder_triplets(self):
        if self._triplets is None:
            self._triplets = kernels.creation_triplets(
                self.occs, self.grade_offsets, self.statistics == "fermi"
            )
        return self._triplets

    def creation_matrix(self, mode):
        """CSR matrix of the mode creation operator (with statistics signs)."""
        mat = self._creation.get(mode)
        if mat is None:
            src, tgt, amp = self.ladder_triplets()[mode]
            mat = sp.coo_matrix(
                (amp.astype(np.complex128), (tgt, src)), shape=(self.dim, self.dim)
            ).tocsr()
            self._creation[mode] = mat
        return mat

    def sqrt_factorials(self):
        """Per-state sqrt(prod_m n_m!), used by exponential vectors."""
        if self._sqrt_fact is None:
            top = int(self.occs.max(initial=0))
            if top > 170:
                raise SizeOverflow("occupation factorials exceed float range")
            fact = np.array(
                [math.factorial(k) for k in range(top + 1)], dtype=np.float64
            )
            self._sqrt_fact = np.sqrt(fact[self.occs].prod(axis=1))
        return self._sqrt_fact

    def grade_mask(self, grade_cap):
        return self.grades <= grade_cap


def enumerate_basis(statistics, num_modes, truncation, dim_cap=DIM_CAP):
    """Build the occupation basis, grade-major, descending lex per grade."""
    if statistics not in ("bose", "fermi"):
        raise ValueError(f"unknown statistics {statistics!r}")
    if num_modes < 1:
        raise DimMismatch("need at least one mode")
    if truncation < 0:
        raise TruncationTooSmall("truncation must be >= 0")
    if statistics == "bose":
        dim = _bose_dim(num_modes, truncation)
        top = truncation
    else:
        dim = _fermi_dim(num_modes, truncation)
        top = min(truncation, num_modes)
    if dim > dim_cap:
        raise SizeOverflow(f"basis dimension {dim} exceeds cap {dim_cap}")
    rows = [np.zeros((1, num_modes), dtype=np.uint8)]
    for n in range(1, top + 1):
        if statistics == "bose":
            rows.append(_bose_grade_rows(n, num_modes))
        else:
            rows.append(_fermi_grade_rows(n, num_modes))
    occs = np.concatenate(rows, axis=0)
    offsets = np.concatenate(
        ([0], np.cumsum([r.shape[0] for r in rows]))
    ).astype(np.int64)
    occs.setflags(write=False)
    offsets.setflags(write=False)
    return FockBasis(statistics, num_modes, truncation, occs, offsets)


def spectral_norm(matrix):
    """Largest singular value of a sparse matrix.

    Exact for diagonal matrices, for matrices whose columns occupy
    disjoint rows (diagonal Gram), and for dimension <= 512 (dense SVD).
    Larger matrices go through ARPACK with a fixed start vector so the
    value is deterministic; plain power iteration on the Gram operator
    is the fallback if ARPACK does not converge.
    """
    m = matrix.tocsr()
    if m.count_nonzero() == 0:
        return 0.0
    if m.shape[0] == m.shape[1]:
        d = m.diagonal()
        off = m - sp.diags(d, 0, shape=m.shape, format="csr")
        if off.count_nonzero() == 0:
            return float(np.abs(d).max())
    if (m.data == 0).any():
        m = m.copy()
        m.eliminate_zeros()
    if np.diff(m.indptr).max() <= 1:
        # one entry per row: the Gram is diagonal, the norm is the
        # largest column norm (power iteration stalls here, the top
        # singular values are typically near-degenerate)
        col_sq = np.zeros(m.shape[1])
        np.add.at(col_sq, m.indices, np.abs(m.data) ** 2)
        return float(np.sqrt(col_sq.max()))
    if min(m.shape) <= _NORM_DENSE_MAX:
        return float(np.linalg.norm(m.toarray(), 2))
    v = np.cos(0.7 * np.arange(min(m.shape))) + 0.3
    v = v.astype(np.complex128) / np.linalg.norm(v)
    try:
        s = spla.svds(m, k=1, v0=v, return_singular_vectors=False)
        return float(s[0])
    except Exception:
        pass
    mh = m.getH().tocsr()
    v = np.cos(0.7 * np.arange(m.shape[1])) + 0.3
    v = v.astype(np.complex128) / np.linalg.norm(v)
    est = 0.0
    for _ in range(_POWER_ITERS):
        w = mh @ (m @ v)
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        v = w / lam
        s = math.sqrt(lam)
        if abs(s - est) <= _POWER_RTOL * s:
            return float(s)
        est = s
    return float(est)


class SparseOperator:
    """Sparse operator on (initial space) x (Fock space).

    The Fock factor is the minor index: full index = i_initial * dim + i_fock.
    """

    def __init__(self, matrix, basis, initial_dim=1):
        matrix = sp.csr_matrix(matrix, dtype=np.complex128)
        full = initial_dim * basis.dim
        if matrix.shape != (full, full):
            raise DimMismatch(
                f"matrix shape {matrix.shape} does not match dim {full}"
            )
        self.matrix = matrix
        self.basis = basis
        self.initial_dim = initial_dim

    def _check(self, other):
        if self.basis != other.basis or self.initial_dim != other.initial_dim:
            raise BasisMismatch("operators live on different spaces")

    def __add__(self, other):
        self._check(other)
        return SparseOperator(self.matrix + other.matrix, self.basis, self.initial_dim)

    def __sub__(self, other):
        self._check(other)
        return SparseOperator(self.matrix - other.matrix, self.basis, self.initial_dim)

    def __matmul__(self, other):
        self._check(other)
        return SparseOperator(self.matrix @ other.matrix, self.basis, self.initial_dim)

    def __rmul__(self, scalar):
        return SparseOperator(scalar * self.matrix, self.basis, self.initial_dim)

    def __neg__(self):
        return SparseOperator(-self.matrix, self.basis, self.initial_dim)

    def dag(self):
        return SparseOperator(self.matrix.getH().tocsr(), self.basis, self.initial_dim)

    def commutator(self, other):
        self._check(other)
        return SparseOperator(
            self.matrix @ other.matrix - other.matrix @ self.matrix,
            self.basis,
            self.initial_dim,
        )

    def anticommutator(self, other):
        self._check(other)
        return SparseOperator(
            self.matrix @ other.matrix + other.matrix @ self.matrix,
            self.basis,
            self.initial_dim,
        )

    def apply(self, vec):
        return self.matrix @ np.asarray(vec, dtype=np.complex128)

    def _grade_rows(self, grade_cap):
        mask = np.tile(self.basis.grade_mask(grade_cap), self.initial_dim)
        return np.flatnonzero(mask)

    def norm(self, grade_cap=None):
        """Spectral norm, optionally of the compression to grades <= grade_cap."""
        if grade_cap is None:
            return spectral_norm(self.matrix)
        keep = self._grade_rows(grade_cap)
        return spectral_norm(self.matrix[keep][:, keep])

    def compress(self, grade_cap):
        """Two-sided cut to grades <= grade_cap (zero elsewhere)."""
        mask = np.tile(self.basis.grade_mask(grade_cap), self.initial_dim)
        p = sp.diags(mask.astype(np.complex128), 0, format="csr")
        return SparseOperator(p @ self.matrix @ p, self.basis, self.initial_dim)


def ampliate(op, initial_dim):
    """I x op on (initial space) x (Fock space)."""
    if initial_dim == 1:
        return op
    eye = sp.identity(initial_dim, dtype=np.complex128, format="csr")
    return SparseOperator(
        sp.kron(eye, op.matrix, format="csr"), op.basis, initial_dim
    )


def initial_operator(matrix, basis, initial_dim):
    """A x I for a matrix acting on the initial space alone."""
    matrix = sp.csr_matrix(matrix, dtype=np.complex128)
    if matrix.shape != (initial_dim, initial_dim):
        raise DimMismatch("initial-space matrix has wrong shape")
    eye = sp.identity(basis.dim, dtype=np.complex128, format="csr")
    return SparseOperator(sp.kron(matrix, eye, format="csr"), basis, initial_dim)


def tensor_operator(matrix, op, initial_dim):
    """A x op for a matrix on the initial space and a Fock-space operator."""
    matrix = sp.csr_matrix(matrix, dtype=np.complex128)
    if matrix.shape != (initial_dim, initial_dim):
        raise DimMismatch("initial-space matrix has wrong shape")
    return SparseOperator(
        sp.kron(matrix, op.matrix, format="csr"), op.basis, initial_dim
    )


def identity_operator(basis, initial_dim=1):
    return SparseOperator(
        sp.identity(initial_dim * basis.dim, dtype=np.complex128, format="csr"),
        basis,
        initial_dim,
    )


def diagonal_operator(basis, diag, initial_dim=1):
    """Operator I x diag(values over the Fock basis)."""
    d = np.asarray(diag, dtype=np.complex128)
    if d.shape != (basis.dim,):
        raise DimMismatch("diagonal length must equal basis dimension")
    full = np.tile(d, initial_dim)
    return SparseOperator(
        sp.diags(full, 0, format="csr"), basis, initial_dim
    )


def field_operator(basis, kind, f):
    """Smeared field B+(f) or B-(f) = B+(f)^dag over mode coefficients f.

    Fermi bases get the intrinsic signed ladder operators.  Creation out of
    the top grade is dropped, so the pair is exactly mutually adjoint.
    """
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (basis.num_modes,):
        raise DimMismatch(
            f"expected {basis.num_modes} mode coefficients, got {f.shape}"
        )
    if kind not in ("create", "annihilate"):
        raise ValueError(f"unknown field kind {kind!r}")
    trips = basis.ladder_triplets()
    srcs, tgts, data = [], [], []
    for m in range(basis.num_modes):
        if f[m] == 0:
            continue
        src, tgt, amp = trips[m]
        srcs.append(src)
        tgts.append(tgt)
        data.append(f[m] * amp)
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


def number_operator(basis, mode=None):
    """Mode occupation number, or the total number when mode is None."""
    if mode is None:
        diag = basis.grades.astype(np.complex128)
    else:
        diag = basis.occs[:, mode].astype(np.complex128)
    return diagonal_operator(basis, diag)


def vacuum_vector(basis):
    v = np.zeros(basis.dim, dtype=np.complex128)
    v[0] = 1.0
    return v


def exponential_vector(basis, f):
    """Coefficients of the truncated exponential vector of f (bose only)."""
    if basis.statistics != "bose":
        raise ValueError("exponential vectors are bosonic")
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (basis.num_modes,):
        raise DimMismatch("mode coefficient count mismatch")
    powers = f[None, :] ** basis.occs
    return powers.prod(axis=1) / basis.sqrt_factorials()


def second_quantize(basis, u):
    """Gamma(u): apply u to every particle.  Permanents for bose (size
    capped by the kernel), determinants for fermi.  Grade-preserving, so
    exact under the truncation."""
    u = np.asarray(u, dtype=np.complex128)
    d = basis.num_modes
    if u.shape != (d, d):
        raise DimMismatch("one-particle matrix has wrong shape")
    if basis.statistics == "bose" and basis.top_grade > kernels.PERMANENT_CAP:
        raise SizeOverflow(
            f"grade {basis.top_grade} permanents exceed cap {kernels.PERMANENT_CAP}"
        )
    blocks = []
    offs = basis.grade_offsets
    for g in range(basis.top_grade + 1):
        lo, hi = int(offs[g]), int(offs[g + 1])
        size = hi - lo
        if g == 0:
            blocks.append(np.ones((1, 1), dtype=np.complex128))
            continue
        reps = [
            np.repeat(np.arange(d), basis.occs[i]) for i in range(lo, hi)
        ]
        block = np.empty((size, size), dtype=np.complex128)
        if basis.statistics == "bose":
            sf = basis.sqrt_factorials()
            for a in range(size):
                for b in range(size):
                    sub = u[np.ix_(reps[a], reps[b])]
                    block[a, b] = kernels.permanent(sub) / (
                        sf[lo + a] * sf[lo + b]
                    )
        else:
            for a in range(size):
                for b in range(size):
                    block[a, b] = np.linalg.det(u[np.ix_(reps[a], reps[b])])
        blocks.append(block)
    return SparseOperator(sp.block_diag(blocks, format="csr"), basis)


def diff_second_quantize(basis, h):
    """gamma(h) = sum_pq h_pq b+_p b-_q, the derivative of Gamma at the
    identity.  Exact under the truncation (annihilate first, then create)."""
    h = np.asarray(h, dtype=np.complex128)
    d = basis.num_modes
    if h.shape != (d, d):
        raise DimMismatch("one-particle matrix has wrong shape")
    diag = np.diag(h)
    out = diagonal_operator(basis, basis.occs @ diag)
    off = h - np.diag(diag)
    if np.any(off):
        for p in range(d):
            cp = basis.creation_matrix(p)
            for q in range(d):
                if off[p, q] == 0:
                    continue
                aq = basis.creation_matrix(q).getH().tocsr()
                out = out + SparseOperator(off[p, q] * (cp @ aq), basis)
    return out


# ---------------------------------------------------------------------------
# split isomorphism


class SplitIsomorphism:
    """Basis-level factorization over a mode cut.

    Maps the combined space into (low factor) x (high factor); the image is
    the joint-grade band n_low + n_high <= truncation.  The column map is a
    pure relabeling with +1 signs: ascending mode order puts every low mode
    before every high mode, so no wedge reordering occurs.
    """

    def __init__(self, basis, num_low):
        if not 0 < num_low < basis.num_modes:
            raise DimMismatch("cut must leave modes on both sides")
        self.basis = basis
        self.low = enumerate_basis(basis.statistics, num_low, basis.truncation)
        self.high = enumerate_basis(
            basis.statistics, basis.num_modes - num_low, basis.truncation
        )
        rows = np.empty(basis.dim, dtype=np.int64)
        for c in range(basis.dim):
            occ = basis.occs[c]
            i_lo = self.low.index_of(occ[:num_low])
            i_hi = self.high.index_of(occ[num_low:])
            rows[c] = i_lo * self.high.dim + i_hi
        data = np.ones(basis.dim, dtype=np.complex128)
        self.isometry = sp.coo_matrix(
            (data, (rows, np.arange(basis.dim))),
            shape=(self.low.dim * self.high.dim, basis.dim),
        ).tocsr()

    def pull_back(self, low_matrix, high_matrix):
        """V^dag (A x B) V as an operator on the combined basis."""
        big = sp.kron(low_matrix, high_matrix, format="csr")
        mat = self.isometry.getH() @ big @ self.isometry
        return SparseOperator(mat, self.basis)

    def push_vector(self, coeffs):
        """Combined-space coefficients mapped into the tensor product."""
        return self.isometry @ np.asarray(coeffs, dtype=np.complex128)

    def band_projector(self):
        """V V^dag: projector onto the joint-grade band in the product."""
        return (self.isometry @ self.isometry.getH()).tocsr()


def split_isomorphism(basis, num_low):
    return SplitIsomorphism(basis, num_low)


# ---------------------------------------------------------------------------
# dense tensor oracle

_ORACLE_MAX_MODES = 3
_ORACLE_MAX_GRADE = 3


def _perm_parity(perm):
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return -1.0 if inv & 1 else 1.0


class _TensorSpace:
    """Explicit tensor algebra over C^d up to a grade cap, with the
    (anti)symmetrizer and free creation built densely."""

    def __init__(self, statistics, d, n_max):
        self.statistics = statistics
        self.d = d
        self.n_max = n_max
        self.tuples = []
        self.offsets = [0]
        for k in range(n_max + 1):
            self.tuples.extend(itertools.product(range(d), repeat=k))
            self.offsets.append(len(self.tuples))
        self.index = {t: i for i, t in enumerate(self.tuples)}
        self.dim = len(self.tuples)
        self.projector = self._build_projector()

    def _build_projector(self):
        p = np.zeros((self.dim, self.dim), dtype=np.complex128)
        p[0, 0] = 1.0
        fermi = self.statistics == "fermi"
        for k in range(1, self.n_max + 1):
            for t in itertools.product(range(self.d), repeat=k):
                col = self.index[t]
                for perm in itertools.permutations(range(k)):
                    s = tuple(t[p_] for p_ in perm)
                    w = _perm_parity(perm) if fermi else 1.0
                    p[self.index[s], col] += w / math.factorial(k)
        return p

    def free_creation(self, h):
        """sqrt(k+1) * (h tensor .) from grade k to k+1."""
        a = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k in range(self.n_max):
            for t in itertools.product(range(self.d), repeat=k):
                col = self.index[t]
                for i in range(self.d):
                    a[self.index[(i,) + t], col] += math.sqrt(k + 1) * h[i]
        return a

    def creation(self, h):
        return self.projector @ self.free_creation(h) @ self.projector

    def gamma_big(self, u):
        """u applied to every slot: blockwise u^{tensor k}."""
        g = np.zeros((self.dim, self.dim), dtype=np.complex128)
        g[0, 0] = 1.0
        block = np.ones((1, 1), dtype=np.complex128)
        for k in range(1, self.n_max + 1):
            block = np.kron(block, u)
            lo, hi = self.offsets[k], self.offsets[k + 1]
            g[lo:hi, lo:hi] = block
        return g

    def gamma_small(self, h):
        """sum over slots of 1 x .. x h x .. x 1."""
        g = np.zeros((self.dim, self.dim), dtype=np.complex128)
        eye = np.eye(self.d, dtype=np.complex128)
        for k in range(1, self.n_max + 1):
            lo, hi = self.offsets[k], self.offsets[k + 1]
            for slot in range(k):
                term = np.ones((1, 1), dtype=np.complex128)
                for j in range(k):
                    term = np.kron(term, h if j == slot else eye)
                g[lo:hi, lo:hi] += term
        return g

    def embedding(self, basis):
        """Isometry from the occupation basis into this tensor space."""
        w = np.zeros((self.dim, basis.dim), dtype=np.complex128)
        fermi = self.statistics == "fermi"
        for i in range(basis.dim):
            occ = basis.occs[i]
            t = tuple(np.repeat(np.arange(self.d), occ))
            n = len(t)
            if fermi:
                scale = math.sqrt(math.factorial(n))
            else:
                scale = math.sqrt(
                    math.factorial(n)
                    / math.prod(math.factorial(int(k)) for k in occ)
                )
            w[:, i] = scale * self.projector[:, self.index[t]]
        return w


def tensor_oracle_compare(statistics, num_modes, n_max, seed=7):
    """Rebuild fields, Gamma(u), and gamma(h) on the explicit tensor space
    and return max absolute deviations from the occupation-basis operators.

    Dense and exponentially sized; capped at 3 modes and grade 3.
    """
    if num_modes > _ORACLE_MAX_MODES or n_max > _ORACLE_MAX_GRADE:
        raise SizeOverflow(
            f"tensor oracle capped at {_ORACLE_MAX_MODES} modes, "
            f"grade {_ORACLE_MAX_GRADE}"
        )
    basis = enumerate_basis(statistics, num_modes, n_max)
    space = _TensorSpace(statistics, num_modes, n_max)
    w = space.embedding(basis)
    rng = np.random.default_rng(seed)

    defects = {}
    gram = w.conj().T @ w
    defects["embedding_isometry"] = float(
        np.abs(gram - np.eye(basis.dim)).max()
    )

    probes = [np.eye(num_modes)[i] for i in range(num_modes)]
    probes.append(
        rng.standard_normal(num_modes) + 1j * rng.standard_normal(num_modes)
    )
    dc, da = 0.0, 0.0
    for h in probes:
        ref = w.conj().T @ space.creation(h) @ w
        ours = field_operator(basis, "create", h).matrix.toarray()
        dc = max(dc, float(np.abs(ref - ours).max()))
        ref_a = w.conj().T @ space.creation(h).conj().T @ w
        ours_a = field_operator(basis, "annihilate", h).matrix.toarray()
        da = max(da, float(np.abs(ref_a - ours_a).max()))
    defects["creation"] = dc
    defects["annihilation"] = da

    z = rng.standard_normal((num_modes, num_modes)) + 1j * rng.standard_normal(
        (num_modes, num_modes)
    )
    u_unitary = np.linalg.qr(z)[0]
    dg = 0.0
    for u in (u_unitary, 0.5 * z):
        ref = w.conj().T @ space.gamma_big(u) @ w
        ours = second_quantize(basis, u).matrix.toarray()
        dg = max(dg, float(np.abs(ref - ours).max()))
    defects["second_quantization"] = dg

    h_herm = 0.5 * (z + z.conj().T)
    dh = 0.0
    for h in (h_herm, z):
        ref = w.conj().T @ space.gamma_small(h) @ w
        ours = diff_second_quantize(basis, h).matrix.toarray()
        dh = max(dh, float(np.abs(ref - ours).max()))
    defects["differential_second_quantization"] = dh

    defects["max"] = max(defects.values())
    return defects
