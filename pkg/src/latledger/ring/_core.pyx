# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Word-size kernels for R_q with q < 2^62.

Arrays are C-contiguous uint64 with coefficients already reduced into [0, q).
Slots are kept in butterfly (block) order; the Python layer owns the
permutation to the canonical slot index.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t q) {
        return (uint64_t)(((unsigned __int128)a * b) % q);
    }
    static inline uint64_t addmod(uint64_t a, uint64_t b, uint64_t q) {
        uint64_t s = a + b;
        return s >= q ? s - q : s;
    }
    static inline uint64_t submod(uint64_t a, uint64_t b, uint64_t q) {
        return a >= b ? a - b : a + q - b;
    }
    """
    uint64_t mulmod(uint64_t a, uint64_t b, uint64_t q) nogil
    uint64_t addmod(uint64_t a, uint64_t b, uint64_t q) nogil
    uint64_t submod(uint64_t a, uint64_t b, uint64_t q) nogil

NAME = "core"


def ntt_forward(a, tw, uint64_t q, Py_ssize_t levels):
    """Partial negacyclic NTT of every row of a (n x d); returns a new array."""
    cdef uint64_t[:, ::1] x = np.array(a, dtype=np.uint64, order="C", copy=True)
    cdef const uint64_t[::1] w = tw
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t r, L, b, j, nb, half, base, off
    cdef uint64_t t, lo, z
    with nogil:
        for r in range(n):
            off = 0
            nb = 1
            for L in range(levels):
                half = d // (2 * nb)
                for b in range(nb):
                    z = w[off + b]
                    base = 2 * b * half
                    for j in range(half):
                        lo = x[r, base + j]
                        t = mulmod(z, x[r, base + half + j], q)
                        x[r, base + j] = addmod(lo, t, q)
                        x[r, base + half + j] = submod(lo, t, q)
                off += nb
                nb *= 2
    return np.asarray(x)


def ntt_inverse(a, itw, uint64_t inv2, uint64_t q, Py_ssize_t levels):
    """Inverse of ntt_forward; itw holds (2 w)^-1 per block."""
    cdef uint64_t[:, ::1] x = np.array(a, dtype=np.uint64, order="C", copy=True)
    cdef const uint64_t[::1] w = itw
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t r, L, b, j, nb, half, base, off
    cdef uint64_t A, B, z
    with nogil:
        for r in range(n):
            for L in range(levels - 1, -1, -1):
                nb = 1 << L
                off = nb - 1
                half = d // (2 * nb)
                for b in range(nb):
                    z = w[off + b]
                    base = 2 * b * half
                    for j in range(half):
                        A = x[r, base + j]
                        B = x[r, base + half + j]
                        x[r, base + j] = mulmod(addmod(A, B, q), inv2, q)
                        x[r, base + half + j] = mulmod(submod(A, B, q), z, q)
    return np.asarray(x)


cdef inline void _slot_mac(const uint64_t* a, const uint64_t* b, uint64_t* out,
                           const uint64_t* roots, Py_ssize_t d, Py_ssize_t s,
                           uint64_t q) nogil:
    """out += a * b slot-wise, slot k reduced mod X^s - roots[k]."""
    cdef Py_ssize_t k, i, j, base
    cdef uint64_t t, rho
    for k in range(d // s):
        base = k * s
        rho = roots[k]
        for i in range(s):
            for j in range(s):
                t = mulmod(a[base + i], b[base + j], q)
                if i + j >= s:
                    out[base + i + j - s] = addmod(out[base + i + j - s], mulmod(t, rho, q), q)
                else:
                    out[base + i + j] = addmod(out[base + i + j], t, q)


def slot_mul(a, b, roots, uint64_t q, Py_ssize_t s):
    """Row-wise product of NTT-domain arrays a, b (n x d)."""
    cdef const uint64_t[:, ::1] x = a
    cdef const uint64_t[:, ::1] y = b
    cdef const uint64_t[::1] rt = roots
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], r
    out_arr = np.zeros((n, d), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    if n == 0:
        return out_arr
    with nogil:
        for r in range(n):
            _slot_mac(&x[r, 0], &y[r, 0], &out[r, 0], &rt[0], d, s, q)
    return out_arr


def slot_matvec(M, v, roots, uint64_t q, Py_ssize_t s):
    """NTT-domain product of M (rows x cols x d) with v (cols x d)."""
    cdef const uint64_t[:, :, ::1] A = M
    cdef const uint64_t[:, ::1] x = v
    cdef const uint64_t[::1] rt = roots
    cdef Py_ssize_t rows = A.shape[0], cols = A.shape[1], d = A.shape[2], r, c
    out_arr = np.zeros((rows, d), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    if rows == 0 or cols == 0:
        return out_arr
    with nogil:
        for r in range(rows):
            for c in range(cols):
                _slot_mac(&A[r, c, 0], &x[c, 0], &out[r, 0], &rt[0], d, s, q)
    return out_arr


def scale(a, uint64_t k, uint64_t q):
    """Coefficient-wise a * k mod q."""
    cdef uint64_t[::1] x = np.array(a, dtype=np.uint64, order="C", copy=True).reshape(-1)
    cdef Py_ssize_t i, n = x.shape[0]
    with nogil:
        for i in range(n):
            x[i] = mulmod(x[i], k, q)
    return np.asarray(x).reshape(np.shape(a))


def hadamard(a, b, uint64_t q):
    """Coefficient-wise a * b mod q for equal-shape arrays."""
    cdef uint64_t[::1] x = np.array(a, dtype=np.uint64, order="C", copy=True).reshape(-1)
    cdef const uint64_t[::1] y = np.ascontiguousarray(b, dtype=np.uint64).reshape(-1)
    cdef Py_ssize_t i, n = x.shape[0]
    with nogil:
        for i in range(n):
            x[i] = mulmod(x[i], y[i], q)
    return np.asarray(x).reshape(np.shape(a))


def dot_mod(coef, M, uint64_t q):
    """(coef @ M) mod q with coef (n,) and M (n x k), all uint64 in [0, q)."""
    cdef const uint64_t[::1] c = np.ascontiguousarray(coef, dtype=np.uint64)
    cdef const uint64_t[:, ::1] A = np.ascontiguousarray(M, dtype=np.uint64)
    cdef Py_ssize_t n = A.shape[0], k = A.shape[1], i, j
    out_arr = np.zeros(k, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            if c[i] == 0:
                continue
            for j in range(k):
                out[j] = addmod(out[j], mulmod(c[i], A[i, j], q), q)
    return out_arr
