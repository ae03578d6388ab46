"""Proof of consistency for a transaction commitment.

Shows the commitment is well formed: short randomness, the same value in
the three message rows (with the sqrt(q) factor in the second), and, for
scalar ledgers, a constant value polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..commit import Commitment, PublicKeys
from ..ring import RingArray
from ..sampling import Rng, chi_ring, rej
from .common import (
    as_ring_vec, check_shapes, conj, flat_centered, gaussian, inf_ok, ints_to_ring,
    l2_ok, low_zero_poly, project, restart_loop, weighted_rows,
)
from .transcript import ACCEPT, FiatShamir, Proof, Replay, keys_tag, reject, statement_bytes


@dataclass
class ConsistencyStatement:
    pk: tuple          # (pk1, pk2)
    com: Commitment
    scalar: bool = True  # also prove the value is a constant polynomial

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1], self.com.to_bytes(),
                               b"\x01" if self.scalar else b"\x00")


def zero_slots(keys, stmt) -> int:
    """Number of non-constant coefficients forced to zero."""
    return min(128, keys.params.d) - 1 if stmt.scalar else 0


def _source(keys, stmt, challenger):
    if challenger is not None:
        return challenger()
    return FiatShamir(keys.ring, "PoC", stmt.to_bytes(keys))


def _weights(keys, stmt, ch, Rm):
    """Challenge-weighted row combinations: (sum d1 r_j, sum d2 e'_j, sum d1 e_j) under X -> X^-1."""
    R, p = keys.ring, keys.params
    d1 = ch.scalars("d1", p.proj_rows)
    n2 = zero_slots(keys, stmt)
    d2 = ch.scalars("d2", n2) if n2 else np.zeros(0, dtype=R.dtype)
    Dr = conj(as_ring_vec(R, weighted_rows(R, d1, Rm), p.m))
    coeffs = np.zeros(p.d, dtype=object)
    coeffs[1:1 + n2] = [int(x) for x in d2]
    Dv = conj(R.from_ints(coeffs))
    De = conj(as_ring_vec(R, d1, p.proj_polys))
    return Dr, Dv, De


def prove_poc(keys: PublicKeys, stmt: ConsistencyStatement, r: RingArray, v: RingArray, rng: Rng,
              challenger=None, cheat: frozenset = frozenset()) -> Proof:
    """``cheat`` names deliberate deviations used by soundness tests
    (``g_const``: mask polynomial with nonzero constant term, ``norej``: skip rejection)."""
    R, p = keys.ring, keys.params
    s1, s2, s3 = (p.sigma_sq[k] for k in ("poc_1", "poc_2", "poc_3"))
    g1, g2, g3 = gaussian(s1), gaussian(s2), gaussian(s3)
    pk1, pk2 = stmt.pk
    npp = p.proj_polys
    r_flat = flat_centered(r)

    def attempt(_):
        ch = _source(keys, stmt, challenger)
        s = chi_ring(R, rng, p.m)
        g = low_zero_poly(R, rng, 1)
        if "g_const" in cheat:
            g = g + 1
        f0 = keys.A1 @ r + keys.A2 @ s
        f1 = keys.B1[0] @ s + v
        y1, y2 = g1.ring(R, rng, p.m), g2.ring(R, rng, p.m)
        y3 = g3.sample(rng, p.proj_rows)
        y3r = ints_to_ring(R, y3, npp)
        u1 = keys.Bc_proj @ s + y3r
        u2 = keys.Bc_mask[0] @ s + g
        for name, val in (("f0", f0), ("f1", f1), ("u1", u1), ("u2", u2)):
            ch.absorb(name, val)
        Rm = ch.proj("R", p.proj_rows, p.m * p.d)
        Rr = project(Rm, r_flat)
        z3 = y3 + Rr
        if "norej" not in cheat and not rej(z3, Rr, s3, rng, p.rej_M):
            return None
        z3r = ints_to_ring(R, z3, npp)
        ch.absorb("z3", z3r)
        Dr, Dv, De = _weights(keys, stmt, ch, Rm)
        x = Dr @ r + Dv * v + De @ (y3r - z3r)
        h = g + x
        w = keys.A1 @ y1 + keys.A2 @ y2
        t1 = -(keys.B1[0] @ y2)
        tp = -(keys.Bc_proj @ y2)
        tm = -(keys.Bc_mask[0] @ y2)
        vv = R.concat([
            keys.A @ y1,
            pk1 @ y1 + t1,
            pk2 @ y1 + t1.scale(p.sqrt_q),
            keys.B @ y1 + t1,
            Dr @ y1 + Dv * t1 + De @ tp + tm,
        ])
        for name, val in (("h", h), ("w", w), ("v", vv)):
            ch.absorb(name, val)
        c = ch.challenge("c")
        cr, cs = c * r, c * s
        z1, z2 = y1 + cr, y2 + cs
        if "norej" not in cheat:
            if not rej(z1, cr, s1, rng, p.rej_M) or not rej(z2, cs, s2, rng, p.rej_M):
                return None
        fields = {"f0": f0, "f1": f1, "u1": u1, "u2": u2, "z3": z3r,
                  "h": h, "w": w, "v": vv, "z1": z1, "z2": z2}
        return Proof("PoC", fields, ch.record)

    return restart_loop(attempt)


ROW_NAMES = ("com0", "com1", "com2", "com3")


def verify_poc(keys: PublicKeys, stmt: ConsistencyStatement, proof: Proof, interactive: bool = False):
    R, p = keys.ring, keys.params
    k = p.kappa
    shapes = {"f0": (k,), "f1": (), "u1": (p.proj_polys,), "u2": (), "z3": (p.proj_polys,),
              "h": (), "w": (k,), "v": (k + 4,), "z1": (p.m,), "z2": (p.m,)}
    bad = check_shapes(proof, shapes)
    if not bad:
        return bad
    F = proof.fields
    ch = Replay(R, proof.challenges) if interactive else _source(keys, stmt, None)
    for name in ("f0", "f1", "u1", "u2"):
        ch.absorb(name, F[name])
    Rm = ch.proj("R", p.proj_rows, p.m * p.d)
    ch.absorb("z3", F["z3"])
    Dr, Dv, De = _weights(keys, stmt, ch, Rm)
    for name in ("h", "w", "v"):
        ch.absorb(name, F[name])
    c = ch.challenge("c")

    s1, s2, s3 = (p.sigma_sq[x] for x in ("poc_1", "poc_2", "poc_3"))
    z1, z2, z3 = F["z1"], F["z2"], F["z3"]
    if not l2_ok(z1, s1, 2 * p.m * p.d):
        return reject("a", "||z1|| too large")
    if not l2_ok(z2, s2, 2 * p.m * p.d):
        return reject("b", "||z2|| too large")
    if not inf_ok(z3, p.proj_rows * s3):
        return reject("c", "||z3||_inf too large")
    if int(F["h"].c[0]) != 0:
        return reject("d", "constant coefficient of h is nonzero")
    if keys.A1 @ z1 + keys.A2 @ z2 != F["w"] + c * F["f0"]:
        return reject("e", "A1 z1 + A2 z2 != w + c f0")
    com = stmt.com
    pk1, pk2 = stmt.pk
    a1 = c * F["f1"] - keys.B1[0] @ z2
    ap = c * F["u1"] - keys.Bc_proj @ z2
    am = c * F["u2"] - keys.Bc_mask[0] @ z2
    vv = F["v"]
    rows = [
        ("f.com0", vv[:k], keys.A @ z1 - c * com.com0),
        ("f.com1", vv[k], pk1 @ z1 + a1 - c * com.com1),
        ("f.com2", vv[k + 1], pk2 @ z1 + a1.scale(p.sqrt_q) - c * com.com2),
        ("f.com3", vv[k + 2], keys.B @ z1 + a1 - c * com.com3),
        ("f.eval", vv[k + 3], Dr @ z1 + Dv * a1 + De @ ap + am - c * (F["h"] + De @ z3)),
    ]
    for name, lhs, rhs in rows:
        if lhs != rhs:
            return reject(name, "linear relation fails")
    return ACCEPT
