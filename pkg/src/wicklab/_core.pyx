# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Gray-code Ryser permanents and ladder-operator assembly.

The triplet kernel exploits the basis order (grade-major, descending lex
inside a grade): adding one quantum to a fixed mode preserves the relative
lex order of rows, so targets are found by a forward merge instead of a
hash lookup.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def permanent(object a_in):
    """Permanent of a square complex matrix, Ryser formula with Gray updates."""
    cdef cnp.ndarray a_arr = np.ascontiguousarray(a_in, dtype=np.complex128)
    if a_arr.ndim != 2 or a_arr.shape[0] != a_arr.shape[1]:
        raise ValueError("permanent needs a square matrix")
    cdef const double complex[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    cdef cnp.ndarray row_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] row = row_arr
    cdef double complex total = 0, prod
    cdef unsigned long long k, gray, prev_gray = 0, diff, top
    cdef Py_ssize_t i, j, bits = 0
    top = (<unsigned long long> 1) << n
    for k in range(1, top):
        gray = k ^ (k >> 1)
        diff = gray ^ prev_gray
        prev_gray = gray
        j = 0
        while not (diff & 1):
            diff >>= 1
            j += 1
        if gray & ((<unsigned long long> 1) << j):
            bits += 1
            for i in range(n):
                row[i] = row[i] + a[i, j]
        else:
            bits -= 1
            for i in range(n):
                row[i] = row[i] - a[i, j]
        prod = 1
        for i in range(n):
            prod = prod * row[i]
        if bits & 1:
            total = total - prod
        else:
            total = total + prod
    if n & 1:
        total = -total
    return total


def creation_triplets(object occs_in, object offsets_in, bint fermi):
    """Sparse structure of every mode's creation operator.

    Mirrors wicklab._core_py.creation_triplets; see there for the contract.
    """
    cdef cnp.ndarray occs_arr = np.ascontiguousarray(occs_in, dtype=np.uint8)
    cdef cnp.ndarray offs_arr = np.ascontiguousarray(offsets_in, dtype=np.int64)
    cdef const cnp.uint8_t[:, ::1] occs = occs_arr
    cdef const cnp.int64_t[::1] offsets = offs_arr
    cdef Py_ssize_t D = occs.shape[1]
    cdef Py_ssize_t G = offsets.shape[0] - 1
    cdef Py_ssize_t cap = offsets[G - 1] if G >= 1 else 0
    cdef cnp.ndarray src_arr, tgt_arr, amp_arr
    cdef cnp.int64_t[::1] src, tgt
    cdef double[::1] amp
    cdef Py_ssize_t m, g, s, p, k, cnt, par, hi
    cdef int match
    out = []
    for m in range(D):
        src_arr = np.empty(cap, dtype=np.int64)
        tgt_arr = np.empty(cap, dtype=np.int64)
        amp_arr = np.empty(cap, dtype=np.float64)
        src = src_arr
        tgt = tgt_arr
        amp = amp_arr
        cnt = 0
        for g in range(G - 1):
            p = offsets[g + 1]
            hi = offsets[g + 2]
            for s in range(offsets[g], offsets[g + 1]):
                if fermi and occs[s, m] != 0:
                    continue
                while True:
                    match = 1
                    for k in range(D):
                        if k == m:
                            if occs[p, k] != occs[s, k] + 1:
                                match = 0
                                break
                        elif occs[p, k] != occs[s, k]:
                            match = 0
                            break
                    if match:
                        break
                    p += 1
                    if p >= hi:
                        raise RuntimeError("basis order violated in merge")
                src[cnt] = s
                tgt[cnt] = p
                if fermi:
                    par = 0
                    for k in range(m):
                        par += occs[s, k]
                    amp[cnt] = -1.0 if (par & 1) else 1.0
                else:
                    amp[cnt] = sqrt(occs[s, m] + 1.0)
                cnt += 1
        out.append((src_arr[:cnt].copy(), tgt_arr[:cnt].copy(), amp_arr[:cnt].copy()))
    return out
