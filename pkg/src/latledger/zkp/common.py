"""Shared helpers for the protocols: projections, challenge-weighted row sums,
shape checks and the restart loop."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..ring import Ring, RingArray, norm_inf, norm_l2_sq
from ..sampling import GaussianSampler
from .transcript import MAX_RESTARTS, ProverAborted, Verdict, reject, ACCEPT

LIMB = 31


@lru_cache(maxsize=64)
def gaussian(sigma_sq) -> GaussianSampler:
    return GaussianSampler(sigma_sq)


def flat_centered(x: RingArray) -> np.ndarray:
    return x.centered().reshape(-1)


def project(R: np.ndarray, vec) -> np.ndarray:
    """Exact integer product R @ vec (vec: centered ints or RingArray)."""
    if isinstance(vec, RingArray):
        vec = flat_centered(vec)
    vec = np.asarray(vec)
    if not vec.size or max(abs(int(vec.max())), abs(int(vec.min()))) < (1 << 40):
        return R.astype(np.int64) @ vec.astype(np.int64)
    return R.astype(object) @ vec.astype(object)


def weighted_rows(ring: Ring, weights: np.ndarray, R: np.ndarray) -> np.ndarray:
    """(weights^T R) mod q for weights in [0, q) and R with entries in {-1, 0, 1}."""
    q = ring.q
    w = [int(x) for x in np.asarray(weights).tolist()]
    Rt = R.astype(np.int64)
    acc = np.zeros(R.shape[1], dtype=object)
    mask = (1 << LIMB) - 1
    for k in range(-(-q.bit_length() // LIMB)):
        limb = np.array([(x >> (LIMB * k)) & mask for x in w], dtype=np.int64)
        acc = acc + (limb @ Rt).astype(object) * (1 << (LIMB * k))
    return np.array([int(x) % q for x in acc], dtype=object).astype(ring.dtype)


def as_ring_vec(ring: Ring, flat, k: int) -> RingArray:
    """Coefficient array of length k*d (already reduced or signed ints) as k ring elements."""
    flat = np.asarray(flat)
    if flat.dtype == ring.dtype and flat.dtype == np.uint64:
        return RingArray(ring, np.ascontiguousarray(flat.reshape(k, ring.d)))
    return ring.from_ints(flat.reshape(k, ring.d))


def ints_to_ring(ring: Ring, ints, k: int) -> RingArray:
    return ring.from_ints(np.asarray(ints).reshape(k, ring.d))


def conj(x: RingArray) -> RingArray:
    """The automorphism X -> X^-1."""
    return x.sigma(-1)


def l2_ok(z: RingArray, sigma_sq, dim_factor: int) -> bool:
    """||z||^2 <= sigma^2 * dim_factor, exactly."""
    return norm_l2_sq(z) <= sigma_sq * dim_factor


def inf_ok(z: RingArray, bound_sq) -> bool:
    return norm_inf(z) ** 2 <= bound_sq


def check_shapes(proof, expected: dict) -> Verdict:
    for name, shape in expected.items():
        val = proof.fields.get(name)
        if val is None or getattr(val, "shape", None) != tuple(shape):
            return reject("format", f"field {name} has wrong shape")
    return ACCEPT


def restart_loop(attempt):
    """Run attempt(i) until it returns a proof; cap at MAX_RESTARTS."""
    for i in range(MAX_RESTARTS):
        out = attempt(i)
        if out is not None:
            out.attempts = i + 1
            return out
    raise ProverAborted(f"rejection sampling failed {MAX_RESTARTS} times")


def low_zero_poly(ring: Ring, rng, zeros: int) -> RingArray:
    """Uniform element whose first `zeros` coefficients vanish."""
    from ..sampling import uniform_ring
    g = uniform_ring(ring, rng)
    c = g.c.copy()
    c[:zeros] = 0
    return RingArray(ring, c)
