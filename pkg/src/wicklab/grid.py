"""Discretized frequency axis and sampled one-particle vectors.

A grid covers a frequency interval with consecutive bins; bin j carries an
internal multiplicity d_j, and the global modes are ordered bin-major,
internal-minor.  Sampling absorbs the measure weight sqrt(width) into the
coefficients, so mode-space inner products are plain dot products and
operator constructions never see the measure again.
"""

import numpy as np

from .errors import DimMismatch, EmptyGrid, GridMismatch, MisalignedCut

# tolerance for matching a requested cut against stored bin edges
EDGE_ATOL = 1e-9


class SpectralGrid:
    """Frequency bins with internal multiplicities.

    Parameters
    ----------
    bin_edges : array_like
        Strictly increasing edges, length bins + 1.  Grids produced by
        `build_grid` start at 0; grids from `split_grid` may start later.
    internal_dims : array_like of int
        Multiplicity of each bin, all >= 1.  May be empty (zero bins) for
        the degenerate low part of a split at the origin.
    """

    def __init__(self, bin_edges, internal_dims):
        edges = np.asarray(bin_edges, dtype=np.float64)
        dims = np.asarray(internal_dims, dtype=np.int64)
        if edges.ndim != 1 or edges.size != dims.size + 1:
            raise DimMismatch("need one more edge than bins")
        if edges.size >= 2 and not np.all(np.diff(edges) > 0):
            raise ValueError("bin edges must be strictly increasing")
        if edges[0] < 0:
            raise ValueError("bin edges must be nonnegative")
        if dims.size and dims.min() < 1:
            raise ValueError("internal dims must be >= 1")
        edges.setflags(write=False)
        dims.setflags(write=False)
        self.bin_edges = edges
        self.internal_dims = dims
        self.bins = dims.size
        self.omega_max = float(edges[-1])
        self.widths = np.diff(edges)
        self.centers = 0.5 * (edges[:-1] + edges[1:])
        self.num_modes = int(dims.sum())
        # mode m lives in bin mode_bin[m]; bin j owns modes
        # [mode_offsets[j], mode_offsets[j+1])
        self.mode_offsets = np.concatenate(([0], np.cumsum(dims)))
        self.mode_bin = np.repeat(np.arange(self.bins), dims)
        for arr in (self.widths, self.centers, self.mode_offsets, self.mode_bin):
            arr.setflags(write=False)

    def __eq__(self, other):
        return (
            isinstance(other, SpectralGrid)
            and np.array_equal(self.bin_edges, other.bin_edges)
            and np.array_equal(self.internal_dims, other.internal_dims)
        )

    def __repr__(self):
        return (
            f"SpectralGrid(bins={self.bins}, span=[{self.bin_edges[0]:g}, "
            f"{self.omega_max:g}], modes={self.num_modes})"
        )

    def edge_index(self, omega):
        """Index of the bin edge equal to omega, else MisalignedCut."""
        hits = np.flatnonzero(np.abs(self.bin_edges - omega) <= EDGE_ATOL)
        if hits.size == 0:
            raise MisalignedCut(
                f"cut {omega!r} is not a bin edge of {self!r}"
            )
        return int(hits[0])

    def window_mode_mask(self, lo, hi):
        """Boolean mode mask of the bins covering [lo, hi]; edges must align."""
        i = self.edge_index(lo)
        j = self.edge_index(hi)
        if j < i:
            raise MisalignedCut("window upper edge below lower edge")
        mask = np.zeros(self.num_modes, dtype=bool)
        mask[self.mode_offsets[i] : self.mode_offsets[j]] = True
        return mask

    def bin_modes(self, j):
        """Slice of global mode indices owned by bin j."""
        return slice(int(self.mode_offsets[j]), int(self.mode_offsets[j + 1]))


def build_grid(omega_max, bins, internal_dims=1):
    """Uniform grid on [0, omega_max] with the given bin multiplicities."""
    if bins < 1:
        raise EmptyGrid("need at least one bin")
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    if np.isscalar(internal_dims):
        dims = np.full(bins, int(internal_dims), dtype=np.int64)
    else:
        dims = np.asarray(internal_dims, dtype=np.int64)
        if dims.size != bins:
            raise DimMismatch("internal_dims length must equal bins")
    edges = np.linspace(0.0, float(omega_max), bins + 1)
    return SpectralGrid(edges, dims)


def split_grid(grid, omega):
    """Split at an aligned cut into grids covering [lo, omega] and [omega, hi]."""
    k = grid.edge_index(omega)
    low = SpectralGrid(grid.bin_edges[: k + 1], grid.internal_dims[:k])
    high = SpectralGrid(grid.bin_edges[k:], grid.internal_dims[k:])
    return low, high


class OneParticleVector:
    """Coefficients over the modes of a grid, measure weight absorbed."""

    def __init__(self, grid, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (grid.num_modes,):
            raise DimMismatch(
                f"expected {grid.num_modes} coefficients, got {coeffs.shape}"
            )
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        self.grid = grid
        self.coeffs = coeffs

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other):
        _same_grid(self, other)
        return OneParticleVector(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_grid(self, other)
        return OneParticleVector(self.grid, self.coeffs - other.coeffs)

    def __rmul__(self, scalar):
        return OneParticleVector(self.grid, scalar * self.coeffs)


def _same_grid(u, v):
    if u.grid != v.grid:
        raise GridMismatch("vectors live on different grids")


def sample_function(grid, fn):
    """Sample a frequency function at bin centers, absorbing sqrt(width).

    fn(omega) returns a scalar (multiplicity-1 bins) or a length-d_j
    sequence of components for the bin at that center.
    """
    coeffs = np.zeros(grid.num_modes, dtype=np.complex128)
    for j in range(grid.bins):
        d = int(grid.internal_dims[j])
        val = np.atleast_1d(np.asarray(fn(float(grid.centers[j])), dtype=np.complex128))
        if val.shape != (d,):
            raise DimMismatch(
                f"bin {j} has {d} components, function returned shape {val.shape}"
            )
        coeffs[grid.bin_modes(j)] = val * np.sqrt(grid.widths[j])
    return OneParticleVector(grid, coeffs)


def inner_product(u, v):
    """Hermitian mode-space inner product, antilinear on the left."""
    _same_grid(u, v)
    return complex(np.vdot(u.coeffs, v.coeffs))


def project(u, lo, hi):
    """Restrict a vector to the bins covering [lo, hi] (zero elsewhere)."""
    mask = u.grid.window_mode_mask(lo, hi)
    return OneParticleVector(u.grid, np.where(mask, u.coeffs, 0.0))


def bin_component(u, j):
    """Coefficients of u on bin j as a plain array."""
    return np.array(u.coeffs[u.grid.bin_modes(j)])


def bin_inner(u, v, j):
    """Inner product of the bin-j components of two vectors."""
    _same_grid(u, v)
    sl = u.grid.bin_modes(j)
    return complex(np.vdot(u.coeffs[sl], v.coeffs[sl]))


def one_particle_hamiltonian(grid):
    """Multiplication by frequency: diagonal matrix of bin centers."""
    return np.diag(np.repeat(grid.centers, grid.internal_dims)).astype(np.complex128)


def projection_matrix(grid, lo, hi):
    """Spectral projection onto [lo, hi] as a diagonal 0/1 matrix."""
    return np.diag(grid.window_mode_mask(lo, hi).astype(np.complex128))
