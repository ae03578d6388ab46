"""Randomness: a SHAKE-256 keystream, the small distributions, Gaussians,
challenges, projection matrices and the rejection step."""

from __future__ import annotations

import hashlib
import math
import os
from fractions import Fraction

import mpmath
import numpy as np

from .ring import Ring, RingArray, norm_l1

__all__ = [
    "Rng",
    "sample_chi",
    "sample_uniform_mod",
    "uniform_ring",
    "chi_ring",
    "GaussianSampler",
    "sample_gaussian",
    "sample_challenge",
    "sample_stable_challenge",
    "sample_proj_matrix",
    "rej",
    "rej_probability",
]

_BLOCK = 1 << 16


class Rng:
    """Deterministic byte stream: SHAKE-256(seed || counter) blocks."""

    def __init__(self, seed=None):
        if seed is None:
            seed = os.urandom(32)
        elif isinstance(seed, int):
            seed = seed.to_bytes(max(1, (seed.bit_length() + 8) // 8), "little", signed=True)
        elif isinstance(seed, str):
            seed = seed.encode()
        self.seed = bytes(seed)
        self._key = hashlib.sha3_256(b"latledger/rng" + self.seed).digest()
        self._ctr = 0
        self._buf = b""
        self._pos = 0

    def bytes(self, n: int) -> bytes:
        out = []
        while n > 0:
            if self._pos >= len(self._buf):
                self._buf = hashlib.shake_256(self._key + self._ctr.to_bytes(8, "little")).digest(_BLOCK)
                self._ctr += 1
                self._pos = 0
            take = min(n, len(self._buf) - self._pos)
            out.append(self._buf[self._pos:self._pos + take])
            self._pos += take
            n -= take
        return b"".join(out)

    def u64(self, n: int) -> np.ndarray:
        return np.frombuffer(self.bytes(8 * n), dtype="<u8").astype(np.uint64)

    def u8(self, n: int) -> np.ndarray:
        return np.frombuffer(self.bytes(n), dtype=np.uint8)

    def floats(self, n: int) -> np.ndarray:
        """Uniform doubles in [0, 1) with 53 random bits."""
        return (self.u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def randbits(self, k: int) -> int:
        return int.from_bytes(self.bytes((k + 7) // 8), "little") & ((1 << k) - 1)

    def spawn(self, label) -> "Rng":
        """Independent child stream named by label."""
        if isinstance(label, str):
            label = label.encode()
        return Rng(hashlib.sha3_256(self._key + b"/" + bytes(label)).digest() + self.bytes(16))


# -- small distributions ------------------------------------------------------

def sample_chi(rng: Rng, count: int) -> np.ndarray:
    """i.i.d. values in {-1, 0, 1} with P(+-1) = 5/16, P(0) = 6/16."""
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    raw = rng.u8((count + 1) // 2)
    nib = np.stack((raw & 15, raw >> 4), axis=1).reshape(-1)[:count].astype(np.int64)
    out = np.zeros(count, dtype=np.int64)
    out[nib < 5] = -1
    out[(nib >= 5) & (nib < 10)] = 1
    return out


def chi_ring(ring: Ring, rng: Rng, *shape) -> RingArray:
    n = int(np.prod(shape, dtype=np.int64)) * ring.d
    return ring.from_ints(sample_chi(rng, n).reshape(tuple(shape) + (ring.d,)))


def sample_uniform_mod(rng: Rng, q: int, count: int) -> np.ndarray:
    """Uniform integers in [0, q) by masked rejection."""
    bits = q.bit_length()
    if bits <= 63:
        mask = np.uint64((1 << bits) - 1)
        out = np.empty(0, dtype=np.uint64)
        while len(out) < count:
            need = count - len(out)
            cand = rng.u64(2 * need + 8) & mask
            out = np.concatenate((out, cand[cand < np.uint64(q)][:need]))
        return out
    w = (bits + 7) // 8
    mask = (1 << bits) - 1
    vals = []
    while len(vals) < count:
        chunk = rng.bytes(w * 2 * (count - len(vals)))
        for i in range(0, len(chunk), w):
            x = int.from_bytes(chunk[i:i + w], "little") & mask
            if x < q:
                vals.append(x)
                if len(vals) == count:
                    break
    return np.array(vals, dtype=object)


def uniform_ring(ring: Ring, rng: Rng, *shape) -> RingArray:
    n = int(np.prod(shape, dtype=np.int64)) * ring.d
    c = sample_uniform_mod(rng, ring.q, n).astype(ring.dtype)
    return RingArray(ring, c.reshape(tuple(shape) + (ring.d,)))


# -- discrete Gaussian --------------------------------------------------------

TABLE_LIMIT = 64.0  # widths up to this use an inverse-CDF table


class GaussianSampler:
    """Centered discrete Gaussian with density proportional to exp(-x^2 / (2 s^2)).

    Narrow widths use an inverse-CDF table; wide widths round a continuous
    normal and correct the rounding bias with an exact acceptance ratio.
    """

    def __init__(self, sigma_sq):
        self.sigma_sq = sigma_sq
        self.sigma = math.sqrt(sigma_sq)
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.sigma <= TABLE_LIMIT:
            tail = int(math.ceil(14 * self.sigma)) + 1
            xs = np.arange(-tail, tail + 1)
            with mpmath.workdps(30):
                w = [mpmath.exp(-mpmath.mpf(int(x) * int(x)) / (2 * mpmath.mpf(sigma_sq))) for x in xs]
                tot = mpmath.fsum(w)
                cdf = np.array([float(v) for v in np.cumsum([wi / tot for wi in w])])
            cdf[-1] = 1.0
            self._xs, self._cdf = xs, cdf
        else:
            self._xs = None
            # max of target/rounded-normal mass ratio is attained at 0
            self._bound = self._ratio(np.array([0.0]))[0] * (1 + 1e-12)

    def _ratio(self, z):
        from scipy.special import ndtr
        s = self.sigma
        a = np.abs(z)
        # lower tail on both sides keeps the difference well conditioned
        mass = ndtr((0.5 - a) / s) - ndtr((-0.5 - a) / s)
        return np.exp(-z * z / (2 * s * s)) / (math.sqrt(2 * math.pi) * s * mass)

    def sample(self, rng: Rng, count: int) -> np.ndarray:
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        if self._xs is not None:
            idx = np.searchsorted(self._cdf, rng.floats(count), side="right")
            return self._xs[idx].astype(np.int64)
        out = np.empty(0, dtype=np.int64)
        while len(out) < count:
            need = count - len(out) + 8
            u1, u2, u3 = rng.floats(need), rng.floats(need), rng.floats(need)
            normal = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2 * math.pi * u2)
            z = np.rint(normal * self.sigma)
            keep = u3 * self._bound < self._ratio(z)
            out = np.concatenate((out, z[keep].astype(np.int64)))
        return out[:count]

    def ring(self, ring: Ring, rng: Rng, *shape) -> RingArray:
        n = int(np.prod(shape, dtype=np.int64)) * ring.d
        return ring.from_ints(self.sample(rng, n).reshape(tuple(shape) + (ring.d,)))


def sample_gaussian(sampler: GaussianSampler, rng: Rng, count: int) -> np.ndarray:
    return sampler.sample(rng, count)


# -- challenges ---------------------------------------------------------------

def _ternary(rng: Rng, count: int) -> np.ndarray:
    """P(0) = 1/2, P(1) = P(-1) = 1/4 from two bits each."""
    raw = rng.u8((count + 3) // 4)
    pairs = np.stack([(raw >> k) & 3 for k in (0, 2, 4, 6)], axis=1).reshape(-1)[:count]
    out = np.zeros(count, dtype=np.int64)
    out[pairs == 2] = 1
    out[pairs == 3] = -1
    return out


def sample_challenge(ring: Ring, rng: Rng, omega: int | None = None) -> RingArray:
    omega = ring.params.omega if omega is None else omega
    while True:
        c = _ternary(rng, ring.d)
        if int(np.abs(c).sum()) <= omega:
            return ring.from_ints(c)


def sample_stable_challenge(ring: Ring, rng: Rng, omega: int | None = None) -> RingArray:
    """Ternary challenge fixed by X -> X^-1: c_{d-i} = -c_i and c_{d/2} = 0."""
    omega = ring.params.omega if omega is None else omega
    d = ring.d
    while True:
        free = _ternary(rng, d // 2)
        c = np.zeros(d, dtype=np.int64)
        c[: d // 2] = free
        c[d // 2] = 0
        c[d // 2 + 1:] = -free[1: d // 2][::-1]
        if int(np.abs(c).sum()) <= omega:
            return ring.from_ints(c)


def sample_proj_matrix(rng: Rng, rows: int, cols: int) -> np.ndarray:
    """Entries a - b for independent fair bits a, b (int8)."""
    n = rows * cols
    bits = np.unpackbits(rng.u8((2 * n + 7) // 8), bitorder="little")[: 2 * n].astype(np.int8)
    return (bits[0::2] - bits[1::2]).reshape(rows, cols)


# -- rejection sampling -------------------------------------------------------

def _ints(x):
    if isinstance(x, RingArray):
        x = x.centered()
    return np.asarray(x).reshape(-1)


def _dot(a, b) -> int:
    if a.dtype != object and b.dtype != object:
        if a.size and max(int(np.abs(a).max()), int(np.abs(b).max())) < (1 << 26):
            return int(np.dot(a.astype(np.int64), b.astype(np.int64)))
    return int(a.astype(object).dot(b.astype(object))) if a.size else 0


def rej_probability(z, v, sigma_sq, M: int = 3) -> mpmath.mpf:
    """min(1, exp((-2<z,v> + ||v||^2) / (2 s^2)) / M) at 160-bit precision."""
    zi, vi = _ints(z), _ints(v)
    num = -2 * _dot(zi, vi) + _dot(vi, vi)
    s2 = Fraction(sigma_sq)
    with mpmath.workprec(160):
        p = mpmath.exp(mpmath.mpf(num * s2.denominator) / (2 * mpmath.mpf(s2.numerator))) / M
        return min(p, mpmath.mpf(1))


def rej(z, v, sigma_sq, rng: Rng, M: int = 3) -> bool:
    """True when z is accepted and may be released."""
    p = rej_probability(z, v, sigma_sq, M)
    u = rng.randbits(128)
    with mpmath.workprec(160):
        return mpmath.mpf(u) / mpmath.mpf(2) ** 128 < p


def challenge_l1(c: RingArray) -> int:
    return norm_l1(c)
