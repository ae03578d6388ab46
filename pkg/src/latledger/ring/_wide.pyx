# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Two-limb kernels for moduli 2^62 <= q < 2^126.

Same interface as ``_pure`` (numpy object arrays of Python ints in [0, q)).
Coefficients are unpacked into 128-bit words, moved into Montgomery form
(R = 2^128), processed in C and packed back into Python ints.
"""

import numpy as np
from cpython.mem cimport PyMem_Malloc, PyMem_Free

from . import _pure

cdef extern from *:
    """
    #include <Python.h>
    #include <stdint.h>
    typedef unsigned __int128 u128;
    typedef struct { u128 q, qinv, r2; } mont_t;

    static inline void mul_wide(u128 a, u128 b, u128 *lo, u128 *hi) {
        uint64_t a0 = (uint64_t)a, a1 = (uint64_t)(a >> 64);
        uint64_t b0 = (uint64_t)b, b1 = (uint64_t)(b >> 64);
        u128 p00 = (u128)a0 * b0, p01 = (u128)a0 * b1;
        u128 p10 = (u128)a1 * b0, p11 = (u128)a1 * b1;
        u128 mid = (p00 >> 64) + (uint64_t)p01 + (uint64_t)p10;
        *lo = (mid << 64) | (uint64_t)p00;
        *hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    }

    /* a * b * 2^-128 mod q for a, b < q < 2^126 */
    static inline u128 mmul(u128 a, u128 b, const mont_t *M) {
        u128 tlo, thi, mlo, mhi;
        mul_wide(a, b, &tlo, &thi);
        u128 m = tlo * M->qinv;
        mul_wide(m, M->q, &mlo, &mhi);
        u128 s = tlo + mlo;
        u128 u = thi + mhi + (s < tlo);
        return u >= M->q ? u - M->q : u;
    }
    static inline u128 madd(u128 a, u128 b, const mont_t *M) {
        u128 s = a + b;
        return s >= M->q ? s - M->q : s;
    }
    static inline u128 msub(u128 a, u128 b, const mont_t *M) {
        return a >= b ? a - b : a + M->q - b;
    }

    static int obj_to_u128(PyObject *o, u128 *out) {
        PyObject *idx = NULL;
        int rc;
        *out = 0;
        if (!PyLong_Check(o)) {
            idx = PyNumber_Index(o);
            if (!idx) return -1;
            o = idx;
        }
    #if PY_VERSION_HEX >= 0x030D0000
        rc = _PyLong_AsByteArray((PyLongObject *)o, (unsigned char *)out, 16, 1, 0, 1);
    #else
        rc = _PyLong_AsByteArray((PyLongObject *)o, (unsigned char *)out, 16, 1, 0);
    #endif
        Py_XDECREF(idx);
        return rc;
    }

    static mont_t *mont_new(PyObject *q, PyObject *qinv, PyObject *r2) {
        mont_t *M = (mont_t *)PyMem_Malloc(sizeof(mont_t));
        if (!M) { PyErr_NoMemory(); return NULL; }
        if (obj_to_u128(q, &M->q) < 0 || obj_to_u128(qinv, &M->qinv) < 0 || obj_to_u128(r2, &M->r2) < 0) {
            PyMem_Free(M);
            return NULL;
        }
        return M;
    }

    static int list_to_mont(PyObject *lst, u128 *out, Py_ssize_t n, const mont_t *M) {
        for (Py_ssize_t i = 0; i < n; i++) {
            u128 v;
            if (obj_to_u128(PyList_GET_ITEM(lst, i), &v) < 0) return -1;
            if (v >= M->q) {
                PyErr_SetString(PyExc_ValueError, "coefficient not reduced mod q");
                return -1;
            }
            out[i] = mmul(v, M->r2, M);
        }
        return 0;
    }

    static PyObject *mont_to_list(const u128 *in, Py_ssize_t n, const mont_t *M) {
        PyObject *lst = PyList_New(n);
        if (!lst) return NULL;
        for (Py_ssize_t i = 0; i < n; i++) {
            u128 v = mmul(in[i], 1, M);
            PyObject *o = _PyLong_FromByteArray((const unsigned char *)&v, 16, 1, 0);
            if (!o) { Py_DECREF(lst); return NULL; }
            PyList_SET_ITEM(lst, i, o);
        }
        return lst;
    }

    static void ntt_fwd(u128 *x, Py_ssize_t n, Py_ssize_t d, const u128 *tw, Py_ssize_t levels,
                        const mont_t *M) {
        for (Py_ssize_t r = 0; r < n; r++) {
            u128 *row = x + r * d;
            Py_ssize_t off = 0, nb = 1;
            for (Py_ssize_t L = 0; L < levels; L++) {
                Py_ssize_t half = d / (2 * nb);
                for (Py_ssize_t b = 0; b < nb; b++) {
                    u128 z = tw[off + b];
                    Py_ssize_t base = 2 * b * half;
                    for (Py_ssize_t j = 0; j < half; j++) {
                        u128 lo = row[base + j];
                        u128 t = mmul(z, row[base + half + j], M);
                        row[base + j] = madd(lo, t, M);
                        row[base + half + j] = msub(lo, t, M);
                    }
                }
                off += nb;
                nb *= 2;
            }
        }
    }

    static void ntt_inv(u128 *x, Py_ssize_t n, Py_ssize_t d, const u128 *itw, u128 inv2,
                        Py_ssize_t levels, const mont_t *M) {
        for (Py_ssize_t r = 0; r < n; r++) {
            u128 *row = x + r * d;
            for (Py_ssize_t L = levels - 1; L >= 0; L--) {
                Py_ssize_t nb = (Py_ssize_t)1 << L, off = nb - 1, half = d / (2 * nb);
                for (Py_ssize_t b = 0; b < nb; b++) {
                    u128 z = itw[off + b];
                    Py_ssize_t base = 2 * b * half;
                    for (Py_ssize_t j = 0; j < half; j++) {
                        u128 A = row[base + j], B = row[base + half + j];
                        row[base + j] = mmul(madd(A, B, M), inv2, M);
                        row[base + half + j] = mmul(msub(A, B, M), z, M);
                    }
                }
            }
        }
    }

    /* out += a * b slot-wise, slot k taken mod X^s - roots[k] */
    static void slot_mac(const u128 *a, const u128 *b, u128 *out, const u128 *roots,
                         Py_ssize_t d, Py_ssize_t s, const mont_t *M) {
        for (Py_ssize_t k = 0; k < d / s; k++) {
            Py_ssize_t base = k * s;
            for (Py_ssize_t i = 0; i < s; i++)
                for (Py_ssize_t j = 0; j < s; j++) {
                    u128 t = mmul(a[base + i], b[base + j], M);
                    if (i + j >= s)
                        out[base + i + j - s] = madd(out[base + i + j - s], mmul(t, roots[k], M), M);
                    else
                        out[base + i + j] = madd(out[base + i + j], t, M);
                }
        }
    }

    static void slot_mul_rows(const u128 *a, const u128 *b, u128 *out, const u128 *roots,
                              Py_ssize_t n, Py_ssize_t d, Py_ssize_t s, const mont_t *M) {
        for (Py_ssize_t r = 0; r < n; r++)
            slot_mac(a + r * d, b + r * d, out + r * d, roots, d, s, M);
    }

    static void slot_matvec_rows(const u128 *A, const u128 *x, u128 *out, const u128 *roots,
                                 Py_ssize_t rows, Py_ssize_t cols, Py_ssize_t d, Py_ssize_t s,
                                 const mont_t *M) {
        for (Py_ssize_t r = 0; r < rows; r++)
            for (Py_ssize_t c = 0; c < cols; c++)
                slot_mac(A + (r * cols + c) * d, x + c * d, out + r * d, roots, d, s, M);
    }
    """
    ctypedef struct u128:
        pass
    ctypedef struct mont_t:
        pass
    mont_t *mont_new(object q, object qinv, object r2) except NULL
    int list_to_mont(object lst, u128 *out, Py_ssize_t n, const mont_t *M) except -1
    object mont_to_list(const u128 *inp, Py_ssize_t n, const mont_t *M)
    void ntt_fwd(u128 *x, Py_ssize_t n, Py_ssize_t d, const u128 *tw, Py_ssize_t levels, const mont_t *M)
    void ntt_inv(u128 *x, Py_ssize_t n, Py_ssize_t d, const u128 *itw, u128 inv2, Py_ssize_t levels,
                 const mont_t *M)
    void slot_mul_rows(const u128 *a, const u128 *b, u128 *out, const u128 *roots, Py_ssize_t n,
                       Py_ssize_t d, Py_ssize_t s, const mont_t *M)
    void slot_matvec_rows(const u128 *A, const u128 *x, u128 *out, const u128 *roots, Py_ssize_t rows,
                          Py_ssize_t cols, Py_ssize_t d, Py_ssize_t s, const mont_t *M)

NAME = "wide"
MAX_BITS = 126
_R = 1 << 128
_consts = {}


cdef mont_t *_mont(q) except NULL:
    q = int(q)
    if q not in _consts:
        if q.bit_length() > MAX_BITS or q % 2 == 0:
            raise ValueError("wide kernels need an odd modulus below 2^126")
        _consts[q] = (q, (-pow(q, -1, _R)) % _R, pow(2, 256, q))
    qq, qinv, r2 = _consts[q]
    return mont_new(qq, qinv, r2)


cdef class _Buf:
    """Owned array of 128-bit words in Montgomery form."""
    cdef u128 *p
    cdef Py_ssize_t n

    def __cinit__(self, Py_ssize_t n):
        self.n = n
        self.p = <u128 *> PyMem_Malloc(max(n, 1) * sizeof(u128))
        if self.p == NULL:
            raise MemoryError()

    def __dealloc__(self):
        PyMem_Free(self.p)


cdef _Buf _load(values, const mont_t *M):
    lst = np.asarray(values, dtype=object).ravel().tolist()
    cdef _Buf b = _Buf(len(lst))
    list_to_mont(lst, b.p, b.n, M)
    return b


cdef _store(_Buf b, shape, const mont_t *M):
    return np.array(mont_to_list(b.p, b.n, M), dtype=object).reshape(shape)


def ntt_forward(a, tw, q, Py_ssize_t levels):
    a = np.asarray(a)
    n, d = a.shape
    cdef mont_t *M = _mont(q)
    cdef _Buf x, w
    try:
        x, w = _load(a, M), _load(tw, M)
        ntt_fwd(x.p, n, d, w.p, levels, M)
        return _store(x, (n, d), M)
    finally:
        PyMem_Free(M)


def ntt_inverse(a, itw, inv2, q, Py_ssize_t levels):
    a = np.asarray(a)
    n, d = a.shape
    cdef mont_t *M = _mont(q)
    cdef _Buf x, w, h
    try:
        x, w, h = _load(a, M), _load(itw, M), _load([inv2], M)
        ntt_inv(x.p, n, d, w.p, h.p[0], levels, M)
        return _store(x, (n, d), M)
    finally:
        PyMem_Free(M)


def slot_mul(a, b, roots, q, Py_ssize_t s):
    a = np.asarray(a)
    n, d = a.shape
    cdef mont_t *M = _mont(q)
    cdef _Buf x, y, rt, out
    try:
        x, y, rt = _load(a, M), _load(b, M), _load(roots, M)
        out = _load(np.zeros(n * d, dtype=object), M)
        slot_mul_rows(x.p, y.p, out.p, rt.p, n, d, s, M)
        return _store(out, (n, d), M)
    finally:
        PyMem_Free(M)


def slot_matvec(Mat, v, roots, q, Py_ssize_t s):
    Mat = np.asarray(Mat)
    rows, cols, d = Mat.shape
    cdef mont_t *M = _mont(q)
    cdef _Buf A, x, rt, out
    try:
        A, x, rt = _load(Mat, M), _load(v, M), _load(roots, M)
        out = _load(np.zeros(rows * d, dtype=object), M)
        slot_matvec_rows(A.p, x.p, out.p, rt.p, rows, cols, d, s, M)
        return _store(out, (rows, d), M)
    finally:
        PyMem_Free(M)


scale = _pure.scale
hadamard = _pure.hadamard
dot_mod = _pure.dot_mod
