"""Compact range proof: every coefficient of the committed value polynomial
lies in [0, 2^beta_bits).

Each coefficient is one asset.  Bits go into beta_bits "bin" polynomials;
the prover commits them in an ABDLOP commitment, projects them to show they
are short, and proves one quadratic relation whose constant coefficient
encodes (i) bits are 0/1, (ii) bits rebuild the value and (iii) the
projection was computed honestly.  The quadratic part is handled with a
stable challenge (invariant under X -> X^-1) and a committed garbage term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..commit import Commitment, PublicKeys
from ..ring import RingArray, norm_l2_sq
from ..sampling import Rng, chi_ring, rej
from .common import (
    as_ring_vec, check_shapes, conj, gaussian, ints_to_ring, l2_ok, low_zero_poly,
    project, restart_loop, weighted_rows,
)
from .transcript import ACCEPT, FiatShamir, Proof, Replay, keys_tag, reject, statement_bytes


@dataclass
class CompactRangeStatement:
    pk: tuple
    com: Commitment

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1], self.com.to_bytes())


def _source(keys, stmt, challenger):
    if challenger is not None:
        return challenger()
    return FiatShamir(keys.ring, "PoAc", stmt.to_bytes(keys))


def bin_layout(d: int, beta: int):
    """(bin, coefficient offset) of value j's lowest bit."""
    per = d // beta
    return [(j // per, (j % per) * beta) for j in range(d)]


def bins_from_values(ring, values, beta: int) -> RingArray:
    """Bits of each value mod 2^beta laid out in beta bin polynomials."""
    out = np.zeros((beta, ring.d), dtype=np.int64)
    for j, (a, off) in enumerate(bin_layout(ring.d, beta)):
        v = int(values[j]) % ring.q
        for i in range(beta):
            out[a, off + i] = (v >> i) & 1
    return ring.from_ints(out)


class _Weights:
    """Challenge-dependent public polynomials of the quadratic relation."""

    def __init__(self, keys, ch, Rm):
        R, p = keys.ring, keys.params
        beta, q = p.beta_bits, R.q
        self.dd = ch.scalars("dd", p.proj_rows)
        self.dp = [int(x) for x in ch.scalars("dp", beta)]
        dpp = [int(x) for x in ch.scalars("dpp", p.d)]
        self.Dr = conj(as_ring_vec(R, weighted_rows(R, self.dd, Rm), beta))
        self.De = conj(as_ring_vec(R, self.dd, p.proj_polys))
        rec = np.zeros((beta, p.d), dtype=object)
        for j, (a, off) in enumerate(bin_layout(p.d, beta)):
            for i in range(beta):
                rec[a, off + i] = dpp[j] * (1 << i) % q
        self.Drec = conj(R.from_ints(rec))
        self.Dval = conj(R.from_ints(np.array(dpp, dtype=object)))
        self.neg1 = conj(R.from_ints(-np.ones(p.d, dtype=np.int64)))
        self.R = R

    def quad(self, a: RingArray, b: RingArray) -> RingArray:
        """sum_k dp_k sigma(a_k) b_k."""
        acc = self.R.zeros()
        for k, w in enumerate(self.dp):
            acc = acc + (conj(a[k]) * b[k]).scale(w)
        return acc

    def linear(self, zb, zy, zv, zg) -> RingArray:
        acc = self.Dr @ zb + self.De @ zy + self.Drec @ zb - self.Dval * zv + zg
        for k, w in enumerate(self.dp):
            acc = acc + (self.neg1 * zb[k]).scale(w)
        return acc


def prove_poa_compact(keys: PublicKeys, stmt: CompactRangeStatement, r: RingArray, values, rng: Rng,
                      challenger=None) -> Proof:
    """``values``: the d coefficients of the committed value polynomial."""
    R, p = keys.ring, keys.params
    beta = p.beta_bits
    s1, s2, s3 = (p.sigma_sq[f"poac_{i}"] for i in (1, 2, 3))
    bins = bins_from_values(R, values, beta)
    vpoly = R.from_ints(np.array([int(x) for x in values], dtype=object))
    bins_flat = bins.centered().reshape(-1)

    def attempt(_):
        ch = _source(keys, stmt, challenger)
        s = chi_ring(R, rng, p.m + beta)
        g = low_zero_poly(R, rng, 1)
        y1 = gaussian(s1).ring(R, rng, p.m + beta)
        y2 = gaussian(s2).sample(rng, p.proj_rows)
        y2r = ints_to_ring(R, y2, p.proj_polys)
        y3 = gaussian(s3).ring(R, rng, p.m)
        F = {"u0": keys.Aa @ s, "uy": keys.Bc_y @ s + y2r, "ug": keys.Bc_g[0] @ s + g,
             "ubin": keys.Bc_bin @ s + bins, "w1": keys.Aa @ y1, "w2": keys.A @ y3}
        for name in ("u0", "uy", "ug", "ubin", "w1", "w2"):
            ch.absorb(name, F[name])
        Rm = ch.proj("R", p.proj_rows, beta * p.d)
        Rl = project(Rm, bins_flat)
        z2 = y2 + Rl
        if not rej(z2, Rl, s2, rng, p.rej_M):
            return None
        F["z2"] = z2r = ints_to_ring(R, z2, p.proj_polys)
        ch.absorb("z2", z2r)
        W = _Weights(keys, ch, Rm)
        # h = g + x where x has zero constant coefficient for an honest prover
        F["h"] = W.quad(bins, bins) + W.linear(bins, y2r, vpoly, g) - W.De @ z2r
        # masked openings: z_k = c m_k + yt_k
        yt_y, yt_g = -(keys.Bc_y @ y1), -(keys.Bc_g[0] @ y1)
        yt_bin, yt_v = -(keys.Bc_bin @ y1), -(keys.B @ y3)
        g0 = W.quad(yt_bin, yt_bin)
        g1 = W.quad(bins, yt_bin) + W.quad(yt_bin, bins) + W.linear(yt_bin, yt_y, yt_v, yt_g)
        F["ug1"] = keys.Bc_g1[0] @ s + g1
        F["v"] = g0 + keys.Bc_g1[0] @ y1
        for name in ("h", "ug1", "v"):
            ch.absorb(name, F[name])
        c = ch.stable_challenge("c")
        cs, cr = c * s, c * r
        z1, z3 = y1 + cs, y3 + cr
        if not rej(z1, cs, s1, rng, p.rej_M) or not rej(z3, cr, s3, rng, p.rej_M):
            return None
        F["z1"], F["z3"] = z1, z3
        return Proof("PoAc", F, ch.record)

    return restart_loop(attempt)


def shapes(keys) -> dict:
    p = keys.params
    k, b = p.kappa, p.beta_bits
    return {"u0": (k,), "uy": (p.proj_polys,), "ug": (), "ubin": (b,), "w1": (k,), "w2": (k,),
            "z2": (p.proj_polys,), "h": (), "ug1": (), "v": (), "z1": (p.m + b,), "z3": (p.m,)}


def verify_poa_compact(keys: PublicKeys, stmt: CompactRangeStatement, proof: Proof, interactive: bool = False):
    R, p = keys.ring, keys.params
    bad = check_shapes(proof, shapes(keys))
    if not bad:
        return bad
    F = proof.fields
    ch = Replay(R, proof.challenges) if interactive else _source(keys, stmt, None)
    for name in ("u0", "uy", "ug", "ubin", "w1", "w2"):
        ch.absorb(name, F[name])
    Rm = ch.proj("R", p.proj_rows, p.beta_bits * p.d)
    ch.absorb("z2", F["z2"])
    W = _Weights(keys, ch, Rm)
    for name in ("h", "ug1", "v"):
        ch.absorb(name, F[name])
    c = ch.stable_challenge("c")

    s1, s2, s3 = (p.sigma_sq[f"poac_{i}"] for i in (1, 2, 3))
    z1, z2, z3 = F["z1"], F["z2"], F["z3"]
    if not l2_ok(z1, s1, 2 * (p.m + p.beta_bits) * p.d):
        return reject("a", "||z1|| too large")
    if not l2_ok(z3, s3, 2 * p.m * p.d):
        return reject("a", "||z3|| too large")
    if norm_l2_sq(z2) * 10000 > 164 ** 2 * p.proj_rows * s2:
        return reject("b", "||z2|| too large")
    if int(F["h"].c[0]) != 0:
        return reject("c", "constant coefficient of h is nonzero")
    if keys.Aa @ z1 != F["w1"] + c * F["u0"]:
        return reject("d", "Aa z1 != w1 + c u0")
    if keys.A @ z3 != F["w2"] + c * stmt.com.com0:
        return reject("d", "A z3 != w2 + c com0")
    zy = c * F["uy"] - keys.Bc_y @ z1
    zg = c * F["ug"] - keys.Bc_g[0] @ z1
    zb = c * F["ubin"] - keys.Bc_bin @ z1
    zv = c * stmt.com.com3 - keys.B @ z3
    rhs = (W.quad(zb, zb) + c * W.linear(zb, zy, zv, zg) + (c * c) * (-F["h"] - W.De @ z2)
           - (c * F["ug1"] - keys.Bc_g1[0] @ z1))
    if F["v"] != rhs:
        return reject("e", "quadratic relation fails")
    return ACCEPT
