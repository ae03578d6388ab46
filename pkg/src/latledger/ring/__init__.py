"""Arithmetic in R_q = Z_q[X]/(X^d + 1) with a partially split NTT.

``RingArray`` holds an array of ring elements of any shape as
a numpy array of shape ``(..., d)``.  Word-size moduli use uint64 storage and
the compiled kernels when present; wider moduli store Python ints and use
the two-limb kernels when present.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np

from ..params import ParamSet, primitive_root_2l
from . import _pure

try:  # compiled kernels are optional
    if os.environ.get("LATLEDGER_PURE"):
        raise ImportError("pure backend forced")
    from . import _core, _wide
except ImportError:  # pragma: no cover - exercised when the extension is absent
    _core = _wide = None

__all__ = [
    "Ring",
    "RingArray",
    "get_ring",
    "mod_pm",
    "norm_inf",
    "norm_l1",
    "norm_l2",
    "norm_l2_sq",
    "schoolbook_mul",
    "backend_name",
    "const_coeff_inner",
    "within_shifted_range",
    "shifted_range_mask",
]

WORD_LIMIT = 1 << 62


def backend_name(q: int | None = None) -> str:
    """Kernel set used for modulus q, or the word-size default."""
    return select_backend(q if q is not None else 3).NAME


def select_backend(q: int):
    """Compiled word kernels, compiled two-limb kernels, or the pure fallback."""
    if _core is None:
        return _pure
    if q < WORD_LIMIT:
        return _core
    return _wide if q.bit_length() <= _wide.MAX_BITS else _pure


def mod_pm(r: int, q: int) -> int:
    """Representative of r mod q in [-(q-1)/2, (q-1)/2] (q odd)."""
    r %= q
    return r - q if r > (q - 1) // 2 else r


class Ring:
    """Precomputed tables for one parameter set."""

    def __init__(self, params: ParamSet, backend=None):
        self.params = params
        self.q = q = params.q
        self.d = d = params.d
        self.l = l = params.l
        self.s = d // l
        self.levels = int(math.log2(l))
        self.zeta = primitive_root_2l(q, l)
        if self.zeta is None:
            raise ValueError("modulus has no primitive 2l-th root of unity")
        self.word = q < WORD_LIMIT
        self.dtype = np.uint64 if self.word else object
        if backend is None:
            backend = select_backend(q)
        self.kernels = backend
        self.width = params.coeff_bytes
        self._build_tables()
        self._auto_cache = {}

    # -- tables -------------------------------------------------------------
    def _build_tables(self):
        q, l, z = self.q, self.l, self.zeta
        exps = [l]  # X^d + 1 = X^d - zeta^l
        tw, itw = [], []
        for _ in range(self.levels):
            nxt = []
            for e in exps:
                w = pow(z, e // 2, q)
                tw.append(w)
                itw.append(pow(2 * w, -1, q))
                nxt += [e // 2, e // 2 + l]
            exps = nxt
        self.block_exp = exps  # odd exponents 2j+1 in butterfly order
        self.roots = self._arr([pow(z, e, q) for e in exps])
        self.tw = self._arr(tw)
        self.itw = self._arr(itw)
        self.inv2 = pow(2, -1, q)
        # canonical slot j lives in block perm[j]
        self.perm = np.array([exps.index(2 * j + 1) for j in range(l)])

    def _arr(self, values):
        return np.array([int(v) for v in values], dtype=self.dtype)

    # -- constructors -------------------------------------------------------
    def zeros(self, *shape) -> "RingArray":
        return RingArray(self, np.zeros(tuple(shape) + (self.d,), dtype=self.dtype))

    def from_ints(self, values) -> "RingArray":
        """Reduce an integer array of shape (..., d) into the ring."""
        x = np.asarray(values)
        if x.shape[-1:] != (self.d,):
            raise ValueError(f"last axis must have length d={self.d}")
        if self.word and x.dtype.kind in "iu" and x.dtype.itemsize <= 8:
            c = (x.astype(np.int64) % np.int64(self.q)).astype(np.uint64)
        else:
            c = np.array([int(v) % self.q for v in x.reshape(-1).tolist()], dtype=object)
            c = c.reshape(x.shape).astype(self.dtype)
        return RingArray(self, c)

    def const(self, k: int) -> "RingArray":
        c = np.zeros(self.d, dtype=self.dtype)
        c[0] = k % self.q
        return RingArray(self, c)

    def consts(self, ks) -> "RingArray":
        """Vector of constant polynomials."""
        ks = list(ks)
        c = np.zeros((len(ks), self.d), dtype=self.dtype)
        for i, k in enumerate(ks):
            c[i, 0] = int(k) % self.q
        return RingArray(self, c)

    def monomial(self, i: int, k: int = 1) -> "RingArray":
        i %= 2 * self.d
        sign = 1 if i < self.d else -1
        c = np.zeros(self.d, dtype=self.dtype)
        c[i % self.d] = (sign * k) % self.q
        return RingArray(self, c)

    def concat(self, parts) -> "RingArray":
        """Join scalars and vectors into one vector."""
        cs = [p.c.reshape(-1, self.d) for p in parts]
        return RingArray(self, np.concatenate(cs, axis=0) if cs else np.zeros((0, self.d), self.dtype))

    def stack(self, parts) -> "RingArray":
        return RingArray(self, np.stack([p.c for p in parts]))

    # -- transforms ---------------------------------------------------------
    def _flat(self, c):
        return np.ascontiguousarray(c.reshape(-1, self.d))

    def ntt_blocks(self, c):
        """Forward NTT of (..., d) coefficients, slots in butterfly order."""
        out = self.kernels.ntt_forward(self._flat(c), self.tw, self.q, self.levels)
        return out.reshape(c.shape)

    def intt_blocks(self, h):
        out = self.kernels.ntt_inverse(self._flat(h), self.itw, self.inv2, self.q, self.levels)
        return out.reshape(h.shape)

    def ntt(self, a: "RingArray") -> np.ndarray:
        """Slots of a single element, shape (l, d/l), slot j = a mod (X^{d/l} - zeta^{2j+1})."""
        blocks = a.hat.reshape(a.shape + (self.l, self.s))
        return blocks[..., self.perm, :]

    def intt(self, slots) -> "RingArray":
        slots = np.asarray(slots, dtype=self.dtype)
        blocks = np.empty_like(slots)
        blocks[..., self.perm, :] = slots
        h = blocks.reshape(slots.shape[:-2] + (self.d,))
        return RingArray(self, self.intt_blocks(h), hat=np.ascontiguousarray(h))

    def automorphism_map(self, i: int):
        i %= 2 * self.d
        if math.gcd(i, 2 * self.d) != 1:
            raise ValueError(f"automorphism index {i} is not a unit mod 2d")
        if i not in self._auto_cache:
            e = (np.arange(self.d) * i) % (2 * self.d)
            pos = e % self.d
            neg = e >= self.d
            self._auto_cache[i] = (pos, neg)
        return self._auto_cache[i]

    def __repr__(self):
        return f"Ring(q={self.q}, d={self.d}, l={self.l}, backend={self.kernels.NAME})"


@lru_cache(maxsize=None)
def get_ring(params: ParamSet) -> Ring:
    return Ring(params)


class RingArray:
    """Array of ring elements; the trailing axis holds the d coefficients."""

    __slots__ = ("ring", "c", "_hat")
    __array_priority__ = 100  # keep numpy scalars from hijacking operators

    def __init__(self, ring: Ring, coeffs, hat=None):
        self.ring = ring
        self.c = coeffs
        self._hat = hat

    # -- structure ----------------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    def __len__(self):
        return self.c.shape[0]

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        idx = idx + (slice(None),)
        hat = self._hat[idx] if self._hat is not None else None
        return RingArray(self.ring, self.c[idx], hat)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape):
        hat = self._hat.reshape(shape + (self.ring.d,)) if self._hat is not None else None
        return RingArray(self.ring, self.c.reshape(shape + (self.ring.d,)), hat)

    @property
    def T(self):
        if len(self.shape) != 2:
            raise ValueError("transpose needs a matrix")
        hat = np.ascontiguousarray(self._hat.transpose(1, 0, 2)) if self._hat is not None else None
        return RingArray(self.ring, np.ascontiguousarray(self.c.transpose(1, 0, 2)), hat)

    def copy(self):
        return RingArray(self.ring, self.c.copy(), None if self._hat is None else self._hat.copy())

    # -- NTT cache ----------------------------------------------------------
    @property
    def hat(self):
        if self._hat is None:
            self._hat = self.ring.ntt_blocks(self.c)
        return self._hat

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RingArray):
            return other
        if isinstance(other, (int, np.integer)):
            return self.ring.const(int(other))
        return NotImplemented

    def _addsub(self, other, sign):
        R = self.ring
        q = R.q
        if R.word:
            qq = np.uint64(q)

            def op(x, y):
                s = x + (y if sign > 0 else (qq - y))
                return np.where(s >= qq, s - qq, s)
        else:
            def op(x, y):
                return (x + y) % q if sign > 0 else (x - y) % q
        c = op(self.c, other.c)
        hat = None
        if self._hat is not None and other._hat is not None:
            hat = op(self._hat, other._hat)
        return RingArray(R, c, hat)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._addsub(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._addsub(other, -1)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other._addsub(self, -1)

    def __neg__(self):
        return self.ring.zeros(*self.shape)._addsub(self, -1)

    def scale(self, k: int) -> "RingArray":
        R = self.ring
        k = int(k) % R.q
        c = R.kernels.scale(self.c, k, R.q) if R.word else (self.c * k) % R.q
        hat = None
        if self._hat is not None:
            hat = R.kernels.scale(self._hat, k, R.q) if R.word else (self._hat * k) % R.q
        return RingArray(R, c, hat)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        if not isinstance(other, RingArray):
            return NotImplemented
        R = self.ring
        shape = np.broadcast_shapes(self.shape, other.shape)
        full = shape + (R.d,)
        ha = np.ascontiguousarray(np.broadcast_to(self.hat, full)).reshape(-1, R.d)
        hb = np.ascontiguousarray(np.broadcast_to(other.hat, full)).reshape(-1, R.d)
        h = R.kernels.slot_mul(ha, hb, R.roots, R.q, R.s).reshape(full)
        return RingArray(R, R.intt_blocks(h), h)

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        return NotImplemented

    def __matmul__(self, other):
        """Matrix-vector product, or inner product of two vectors."""
        if not isinstance(other, RingArray):
            return NotImplemented
        R = self.ring
        A, v = self, other
        inner = len(A.shape) == 1
        if inner:
            A = A.reshape(1, *A.shape)
        if len(A.shape) != 2 or len(v.shape) != 1 or A.shape[1] != v.shape[0]:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        Mh = np.ascontiguousarray(A.hat)
        vh = np.ascontiguousarray(v.hat)
        h = R.kernels.slot_matvec(Mh, vh, R.roots, R.q, R.s)
        out = RingArray(R, R.intt_blocks(h), h)
        return out[0] if inner else out

    def __eq__(self, other):
        if not isinstance(other, RingArray):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.c, other.c))

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None

    # -- ring maps ----------------------------------------------------------
    def sigma(self, i: int) -> "RingArray":
        """Automorphism X -> X^i applied element-wise (i odd)."""
        R = self.ring
        pos, neg = R.automorphism_map(i)
        src = self.c
        moved = np.where(neg, (R.q - src) % R.q, src) if R.word else np.where(neg, (-src) % R.q, src)
        out = np.empty_like(src)
        out[..., pos] = moved
        if R.word:
            out = out.astype(np.uint64)
        return RingArray(R, out)

    def inverse(self) -> "RingArray":
        """Multiplicative inverse of a single element (raises if not a unit)."""
        R = self.ring
        slots = R.ntt(self)
        rho = [pow(R.zeta, 2 * j + 1, R.q) for j in range(R.l)]
        inv = [_field_inverse([int(x) for x in slots[j]], rho[j], R.q) for j in range(R.l)]
        return R.intt(np.array(inv, dtype=object).astype(R.dtype))

    def is_invertible(self) -> bool:
        slots = self.ring.ntt(self)
        return bool(np.all(np.any(slots.astype(object) != 0, axis=-1)))

    def ntt_average(self) -> "RingArray":
        """(1/l) times the sum of the NTT slots, as a polynomial of degree < d/l."""
        R = self.ring
        slots = R.ntt(self).astype(object)
        low = (slots.sum(axis=-2) * pow(R.l, -1, R.q)) % R.q
        c = np.zeros(self.shape + (R.d,), dtype=object)
        c[..., : R.s] = low
        return RingArray(R, c.astype(R.dtype))

    # -- views --------------------------------------------------------------
    def centered(self) -> np.ndarray:
        """Signed representatives in [-(q-1)/2, (q-1)/2]."""
        R = self.ring
        half = (R.q - 1) // 2
        if R.word:
            x = self.c.astype(np.int64)
            return np.where(x > half, x - np.int64(R.q), x)
        return np.where(self.c > half, self.c - R.q, self.c)

    def const_coeffs(self):
        return self.c[..., 0]

    def to_bytes(self, signed: bool = False) -> bytes:
        R = self.ring
        w = R.width
        if R.word and w == 8:
            arr = self.centered().astype("<i8") if signed else self.c.astype("<u8")
            return arr.tobytes()
        vals = self.centered() if signed else self.c
        return b"".join(int(v).to_bytes(w, "little", signed=signed) for v in vals.reshape(-1).tolist())

    @classmethod
    def from_bytes(cls, ring: Ring, data: bytes, shape, signed: bool = False) -> "RingArray":
        w = ring.width
        n = int(np.prod(shape, dtype=np.int64)) * ring.d
        if len(data) != n * w:
            raise ValueError("ring encoding has the wrong length")
        half = (ring.q - 1) // 2
        if ring.word and w == 8:
            raw = np.frombuffer(data, dtype="<i8" if signed else "<u8")
            if signed:
                if np.any(np.abs(raw) > half):
                    raise ValueError("centered coefficient out of range")
                c = (raw % np.int64(ring.q)).astype(np.uint64)
            else:
                if np.any(raw >= np.uint64(ring.q)):
                    raise ValueError("coefficient not reduced")
                c = raw.astype(np.uint64)
        else:
            vals = [int.from_bytes(data[i:i + w], "little", signed=signed) for i in range(0, len(data), w)]
            if signed and any(abs(v) > half for v in vals):
                raise ValueError("centered coefficient out of range")
            if not signed and any(v >= ring.q for v in vals):
                raise ValueError("coefficient not reduced")
            c = np.array([v % ring.q for v in vals], dtype=object).astype(ring.dtype)
        return cls(ring, c.reshape(tuple(shape) + (ring.d,)))

    def __repr__(self):
        return f"RingArray(shape={self.shape}, d={self.ring.d})"


# -- norms (always on centered representatives) ------------------------------

def _centered(w) -> np.ndarray:
    return w.centered() if isinstance(w, RingArray) else np.asarray(w)


def norm_inf(w) -> int:
    x = _centered(w)
    return int(np.max(np.abs(x))) if x.size else 0


def norm_l1(w) -> int:
    x = _centered(w)
    if x.size and x.dtype != object and int(np.max(np.abs(x))) < (1 << 40):
        return int(np.abs(x).sum())
    return int(sum(abs(int(v)) for v in x.reshape(-1).tolist()))


def norm_l2_sq(w) -> int:
    """Exact squared Euclidean norm."""
    x = _centered(w)
    if not x.size:
        return 0
    if x.dtype != object and int(np.max(np.abs(x))) < (1 << 26):
        return int(np.dot(x.reshape(-1).astype(np.int64), x.reshape(-1).astype(np.int64)))
    flat = x.reshape(-1).astype(object)
    return int(flat.dot(flat))


def norm_l2(w) -> float:
    return math.sqrt(norm_l2_sq(w))


def const_coeff_inner(x: RingArray, y: RingArray) -> int:
    """Constant coefficient of sigma_{-1}(x)^T y, i.e. the coefficient inner product mod q."""
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    prod = x.sigma(-1) * y if x.shape == () else x.sigma(-1) @ y
    return int(prod.c[0])


def shifted_range_mask(coeffs, bound: int, q: int) -> np.ndarray:
    """Per coefficient: |mod_pm(r - bound/2)| <= bound/2 (bound even)."""
    half = bound // 2
    x = np.asarray(coeffs).reshape(-1)
    if q < WORD_LIMIT and x.dtype != object:
        y = (x.astype(np.int64) - half) % q
        y = np.where(y > (q - 1) // 2, y - q, y)
        return np.abs(y) <= half
    return np.array([abs(mod_pm(int(r) - half, q)) <= half for r in x.tolist()], dtype=bool)


def within_shifted_range(coeffs, bound: int, q: int) -> bool:
    """||r - s||_inf <= bound/2 for s the all-(bound/2) vector."""
    return bool(shifted_range_mask(coeffs, bound, q).all())


def schoolbook_mul(a, b, q):
    """Reference negacyclic product of coefficient lists (O(d^2))."""
    d = len(a)
    out = [0] * d
    for i, ai in enumerate(a):
        ai = int(ai)
        if not ai:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < d:
                out[k] += ai * int(bj)
            else:
                out[k - d] -= ai * int(bj)
    return [x % q for x in out]


def _poly_divmod(num, den, q):
    num = list(num)
    inv = pow(den[-1], -1, q)
    quo = [0] * max(1, len(num) - len(den) + 1)
    while len(num) >= len(den) and any(num):
        k = len(num) - len(den)
        f = num[-1] * inv % q
        quo[k] = f
        for i, c in enumerate(den):
            num[k + i] = (num[k + i] - f * c) % q
        while num and num[-1] == 0:
            num.pop()
    return quo, num


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _field_inverse(coeffs, rho, q):
    """Inverse of a polynomial in Z_q[X]/(X^s - rho) via extended Euclid."""
    s = len(coeffs)
    a = _trim([c % q for c in coeffs])
    if not a:
        raise ZeroDivisionError("element is not invertible (zero NTT slot)")
    mod = [(-rho) % q] + [0] * (s - 1) + [1]
    r0, r1 = mod, a
    t0, t1 = [0], [1]
    while len(r1) > 1:
        quo, rem = _poly_divmod(r0, r1, q)
        rem = _trim(rem)
        prod = [0] * (len(quo) + len(t1))
        for i, x in enumerate(quo):
            for j, y in enumerate(t1):
                prod[i + j] = (prod[i + j] + x * y) % q
        width = max(len(t0), len(prod))
        t_new = [((t0[i] if i < len(t0) else 0) - (prod[i] if i < len(prod) else 0)) % q for i in range(width)]
        r0, r1 = r1, rem
        t0, t1 = t1, _trim(t_new) or [0]
        if not r1:
            raise ZeroDivisionError("element is not invertible")
    inv_c = pow(r1[0], -1, q)
    out = [(x * inv_c) % q for x in t1] + [0] * s
    return out[:s]
