"""Pure-python kernels: Ryser permanents and ladder-operator assembly.

Same contract as the compiled extension ``wicklab._core``; used when the
extension is unavailable or disabled.  The triplet output is ordered
identically to the compiled kernel (modes ascending, sources ascending),
so operator matrices built from either backend coincide entry for entry.
"""

import math

import numpy as np


def permanent(a):
    """Permanent of a square complex matrix via Ryser's formula.

    Vectorized over all nonempty column subsets; the caller enforces the
    size cap, memory here is O(2^n * n).
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0.0j
    subsets = np.arange(1, 1 << n, dtype=np.int64)
    masks = (subsets[:, None] >> np.arange(n)) & 1
    # row_sums[S, i] = sum_{j in S} a[i, j]
    row_sums = masks @ a.T
    signs = 1.0 - 2.0 * (masks.sum(axis=1) & 1)
    total = np.sum(signs * row_sums.prod(axis=1))
    if n & 1:
        total = -total
    return complex(total)


def creation_triplets(occs, grade_offsets, fermi):
    """Sparse structure of every mode's creation operator.

    occs: (dim, D) uint8 occupation rows, grade-major, descending-lex in
    each grade.  grade_offsets: int64 grade boundaries, len = grades + 1.
    Returns a list over modes of (src, tgt, amp) arrays; amp carries the
    bose sqrt(n+1) factor or the fermi reordering sign.  Sources in the
    top grade are dropped (truncation to zero).
    """
    occs = np.ascontiguousarray(occs, dtype=np.uint8)
    dim, num_modes = occs.shape
    index = {occs[i].tobytes(): i for i in range(dim)}
    top_start = int(grade_offsets[-2]) if len(grade_offsets) >= 2 else 0
    out = []
    for m in range(num_modes):
        srcs, tgts, amps = [], [], []
        for s in range(top_start):
            n = occs[s, m]
            if fermi and n:
                continue
            row = occs[s].copy()
            row[m] += 1
            t = index[row.tobytes()]
            if fermi:
                amp = -1.0 if (int(occs[s, :m].sum()) & 1) else 1.0
            else:
                amp = math.sqrt(n + 1.0)
            srcs.append(s)
            tgts.append(t)
            amps.append(amp)
        out.append(
            (
                np.asarray(srcs, dtype=np.int64),
                np.asarray(tgts, dtype=np.int64),
                np.asarray(amps, dtype=np.float64),
            )
        )
    return out
