"""Proof of asset: the value in a re-commitment is in [0, 2^value_bits).

The value is written in binary with bit j in NTT slot j of a polynomial v_bin.
A quadratic check forces every slot to {0, 1}; a random linear functional of
the slots, read off the low coefficients of h, ties the bits to the value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..commit import Commitment, PublicKeys
from ..ring import RingArray
from ..sampling import Rng, rej
from .common import check_shapes, gaussian, l2_ok, low_zero_poly, restart_loop
from .transcript import ACCEPT, FiatShamir, Proof, Replay, keys_tag, reject, statement_bytes


@dataclass
class RangeStatement:
    pk: tuple
    com: Commitment

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1], self.com.to_bytes())


def _source(keys, stmt, challenger):
    if challenger is not None:
        return challenger()
    return FiatShamir(keys.ring, "PoA", stmt.to_bytes(keys))


def bit_poly(ring, value: int, bits: int) -> RingArray:
    """Polynomial whose slot j is the constant bit j of value (low `bits` bits)."""
    value %= ring.q
    slots = np.zeros((ring.l, ring.s), dtype=object)
    for j in range(bits):
        slots[j, 0] = (value >> j) & 1
    return ring.intt(slots.astype(ring.dtype))


def _functionals(keys, phi):
    """P = intt(Q^T phi) and F = intt(phi) for the slot challenge phi."""
    R, p = keys.ring, keys.params
    q = R.q
    phi = np.array([int(x) for x in phi], dtype=object).reshape(R.l, R.s)
    total = phi.sum(axis=0) % q
    qt = np.zeros((R.l, R.s), dtype=object)
    for j in range(p.value_bits):
        qt[j] = (total * pow(2, j, q)) % q
    return R.intt(qt.astype(R.dtype)), R.intt(phi.astype(R.dtype))


def prove_poa(keys: PublicKeys, stmt: RangeStatement, r: RingArray, value: int, rng: Rng,
              challenger=None, v_bin: RingArray | None = None) -> Proof:
    """``v_bin`` overrides the bit polynomial (soundness tests only)."""
    R, p = keys.ring, keys.params
    s2 = p.sigma_sq["poa"]
    pk1 = stmt.pk[0]
    if v_bin is None:
        v_bin = bit_poly(R, value, p.value_bits)
    one_minus = 1 - v_bin.scale(2)

    def attempt(_):
        ch = _source(keys, stmt, challenger)
        y = gaussian(s2).ring(R, rng, p.m)
        g = low_zero_poly(R, rng, R.s)
        t = keys.a_bin @ y
        F = {"f0": keys.A @ r, "f1": keys.a_bin @ r + v_bin,
             "u1": keys.a_bin2 @ r + t * one_minus, "u2": keys.a_g @ r + g,
             "u3": t * t + keys.a_bin2 @ y, "w": keys.A @ y}
        for name in ("f0", "f1", "u1", "u2", "u3", "w"):
            ch.absorb(name, F[name])
        P, Fx = _functionals(keys, ch.scalars("phi", p.d))
        F["h"] = v_bin * P - Fx.scale(value) + g
        F["u4"] = (keys.a_g + P * keys.a_bin - Fx * pk1) @ y
        ch.absorb("h", F["h"])
        ch.absorb("u4", F["u4"])
        c = ch.challenge("c")
        cr = c * r
        z = y + cr
        if not rej(z, cr, s2, rng, p.rej_M):
            return None
        F["z"] = z
        return Proof("PoA", F, ch.record)

    return restart_loop(attempt)


def shapes(keys) -> dict:
    p = keys.params
    return {"f0": (p.kappa,), "f1": (), "u1": (), "u2": (), "u3": (), "w": (p.kappa,),
            "h": (), "u4": (), "z": (p.m,)}


def verify_poa(keys: PublicKeys, stmt: RangeStatement, proof: Proof, interactive: bool = False):
    R, p = keys.ring, keys.params
    bad = check_shapes(proof, shapes(keys))
    if not bad:
        return bad
    F = proof.fields
    ch = Replay(R, proof.challenges) if interactive else _source(keys, stmt, None)
    for name in ("f0", "f1", "u1", "u2", "u3", "w"):
        ch.absorb(name, F[name])
    P, Fx = _functionals(keys, ch.scalars("phi", p.d))
    ch.absorb("h", F["h"])
    ch.absorb("u4", F["u4"])
    c = ch.challenge("c")
    z = F["z"]
    pk1 = stmt.pk[0]
    if not l2_ok(z, p.sigma_sq["poa"], 2 * p.m * p.d):
        return reject("a", "||z|| too large")
    if F["f0"] != stmt.com.com0:
        return reject("b", "f0 differs from the commitment")
    if keys.A @ z != F["w"] + c * F["f0"]:
        return reject("b", "A z != w + c f0")
    tb = keys.a_bin @ z - c * F["f1"]
    if tb * (tb + c) + keys.a_bin2 @ z - c * F["u1"] - F["u3"] != R.zeros():
        return reject("c", "bit relation fails")
    lhs = c * (P * F["f1"] - Fx * stmt.com.com1 + F["u2"] - F["h"]) + F["u4"]
    rhs = keys.a_g @ z + P * (keys.a_bin @ z) - Fx * (pk1 @ z)
    if lhs != rhs:
        return reject("d", "linear relation fails")
    if any(int(x) for x in F["h"].c[:R.s]):
        return reject("e", "low coefficients of h are nonzero")
    return ACCEPT
