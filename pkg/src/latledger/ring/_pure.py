"""Pure-Python kernels mirroring ``_core``.

Works on numpy object arrays of Python ints, so it also serves moduli wider
than a machine word.  uint64 inputs are widened and narrowed back.
"""

import numpy as np

NAME = "pure"


def _wide(a):
    a = np.asarray(a)
    return a.astype(object) if a.dtype != object else a.copy()


def _narrow(x, like):
    return x.astype(np.uint64) if np.asarray(like).dtype == np.uint64 else x


def ntt_forward(a, tw, q, levels):
    x = _wide(a)
    n, d = x.shape
    off, nb = 0, 1
    for _ in range(levels):
        half = d // (2 * nb)
        w = np.asarray(tw[off:off + nb], dtype=object).reshape(1, nb, 1)
        v = x.reshape(n, nb, 2, half)
        lo, hi = v[:, :, 0, :], v[:, :, 1, :]
        t = (hi * w) % q
        x = np.stack(((lo + t) % q, (lo - t) % q), axis=2).reshape(n, d)
        off += nb
        nb *= 2
    return _narrow(x, a)


def ntt_inverse(a, itw, inv2, q, levels):
    x = _wide(a)
    n, d = x.shape
    for L in range(levels - 1, -1, -1):
        nb = 1 << L
        half = d // (2 * nb)
        w = np.asarray(itw[nb - 1:2 * nb - 1], dtype=object).reshape(1, nb, 1)
        v = x.reshape(n, nb, 2, half)
        A, B = v[:, :, 0, :], v[:, :, 1, :]
        x = np.stack((((A + B) * inv2) % q, ((A - B) * w) % q), axis=2).reshape(n, d)
    return _narrow(x, a)


def _slot_product(x, y, roots, q, s):
    """x, y: (..., nslots, s) object arrays; returns slot-wise product."""
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape), dtype=object)
    rho = np.asarray(roots, dtype=object)
    for i in range(s):
        for j in range(s):
            t = x[..., i] * y[..., j]
            if i + j >= s:
                out[..., i + j - s] += t * rho
            else:
                out[..., i + j] += t
    return out % q


def slot_mul(a, b, roots, q, s):
    x, y = _wide(a), _wide(b)
    n, d = x.shape
    out = _slot_product(x.reshape(n, d // s, s), y.reshape(n, d // s, s), roots, q, s)
    return _narrow(out.reshape(n, d), a)


def slot_matvec(M, v, roots, q, s):
    A, x = _wide(M), _wide(v)
    rows, cols, d = A.shape
    prod = _slot_product(A.reshape(rows, cols, d // s, s), x.reshape(1, cols, d // s, s), roots, q, s)
    out = prod.sum(axis=1) % q if cols else np.zeros((rows, d // s, s), dtype=object)
    return _narrow(out.reshape(rows, d), M)


def scale(a, k, q):
    return _narrow((_wide(a) * int(k)) % q, a)


def hadamard(a, b, q):
    return _narrow((_wide(a) * _wide(b)) % q, a)


def dot_mod(coef, M, q):
    c, A = _wide(coef), _wide(M)
    return _narrow(c.dot(A) % q if len(c) else np.zeros(A.shape[1], dtype=object), M)
