"""Proof of equivalence (two commitments to one owner hold the same value)
and proof of key well-formedness, which share one protocol engine.

The equivalence proof projects l = C m - u_diff, where m = s1||e1||s2||e2 is
the owner's secret key and C, u_diff come from com - com'.  The key proof
projects m itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..commit import Commitment, PublicKeys
from ..ring import RingArray
from ..sampling import Rng, chi_ring, rej, uniform_ring
from .common import (
    as_ring_vec, check_shapes, conj, flat_centered, gaussian, inf_ok, ints_to_ring,
    l2_ok, low_zero_poly, project, restart_loop, weighted_rows,
)
from .transcript import ACCEPT, FiatShamir, Proof, Replay, keys_tag, reject, statement_bytes


@dataclass
class EquivalenceStatement:
    """Owner pk, the (column-sum) commitment and its re-commitment com'."""

    pk: tuple
    com: Commitment
    com_new: Commitment

    kind = "PoE"

    @property
    def diff(self) -> Commitment:
        return self.com - self.com_new

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1], self.com.to_bytes(), self.com_new.to_bytes())


@dataclass
class KeyStatement:
    pk: tuple

    kind = "PoKW"

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1])


FIRST = ("f", "u1", "u2")
FINAL = ("h", "w", "v")


class _Shape:
    """Dimensions and helpers for one statement kind."""

    def __init__(self, keys: PublicKeys, stmt):
        p = keys.params
        self.keys, self.stmt, self.p = keys, stmt, p
        self.R = keys.ring
        self.equiv = stmt.kind == "PoE"
        self.role = "poe" if self.equiv else "pokw"
        self.s1, self.s2, self.s3 = (p.sigma_sq[f"{self.role}_{i}"] for i in (1, 2, 3))
        self.l_len = 2 if self.equiv else p.key_len  # ring elements projected

    def split(self, mvec: RingArray):
        k, m = self.p.kappa, self.p.m
        return mvec[:k], mvec[k:k + m], mvec[k + m:2 * k + m], mvec[2 * k + m:]

    def key_image(self, mvec: RingArray) -> RingArray:
        """[A^T s1 + e1 ; A^T s2 + e2]."""
        s1, e1, s2, e2 = self.split(mvec)
        At = self.keys.A.T
        return self.R.concat([At @ s1 + e1, At @ s2 + e2])

    def target(self) -> RingArray:
        return self.R.concat([self.stmt.pk[0], self.stmt.pk[1]])

    def cmap_row(self, Dr: RingArray) -> RingArray:
        """Row vector Dr^T C over the key coordinates."""
        R, p = self.R, self.p
        cd0 = self.stmt.diff.com0
        zero = R.zeros(p.m)
        return R.concat([Dr[0] * cd0, zero, Dr[1] * cd0, zero])

    def udiff(self) -> RingArray:
        d = self.stmt.diff
        return self.R.stack([d.com1, d.com2])

    def projected(self, mvec: RingArray) -> RingArray:
        """l: C m - u_diff, or m itself for the key proof."""
        if not self.equiv:
            return mvec
        s1, _, s2, _ = self.split(mvec)
        cd0 = self.stmt.diff.com0
        return self.R.stack([cd0 @ s1, cd0 @ s2]) - self.udiff()

    def weights(self, ch, Rm):
        """(row vector acting on m, De, extra constant) for the evaluation row."""
        R, p = self.R, self.p
        d1 = ch.scalars("d1", p.proj_rows)
        Dr = conj(as_ring_vec(R, weighted_rows(R, d1, Rm), self.l_len))
        De = conj(as_ring_vec(R, d1, p.proj_polys))
        if self.equiv:
            return self.cmap_row(Dr), De, Dr @ self.udiff()
        return Dr, De, R.zeros()


def _source(keys, stmt, challenger):
    if challenger is not None:
        return challenger()
    return FiatShamir(keys.ring, stmt.kind, stmt.to_bytes(keys))


# -- prover phases (shared with the OR composition) ---------------------------

def first_phase(sh: _Shape, mvec: RingArray, rng: Rng, ch, cheat=frozenset()):
    """Moves before the final challenge; None when the projection is rejected."""
    R, p, keys = sh.R, sh.p, sh.keys
    s = chi_ring(R, rng, p.m)
    g = low_zero_poly(R, rng, 1)
    f = keys.A3 @ mvec + keys.A4 @ s
    y1 = gaussian(sh.s1).ring(R, rng, p.key_len)
    y2 = gaussian(sh.s2).ring(R, rng, p.m)
    y3 = gaussian(sh.s3).sample(rng, p.proj_rows)
    y3r = ints_to_ring(R, y3, p.proj_polys)
    u1 = keys.Beq_proj @ s + y3r
    u2 = keys.Beq_mask[0] @ s + g
    for name, val in (("f", f), ("u1", u1), ("u2", u2)):
        ch.absorb(name, val)
    Rm = ch.proj("R", p.proj_rows, sh.l_len * p.d)
    lvec = sh.projected(mvec)
    Rl = project(Rm, flat_centered(lvec))
    z3 = y3 + Rl
    if "norej" not in cheat and not rej(z3, Rl, sh.s3, rng, p.rej_M):
        return None
    z3r = ints_to_ring(R, z3, p.proj_polys)
    ch.absorb("z3", z3r)
    row, De, extra = sh.weights(ch, Rm)
    x = row @ mvec + De @ (y3r - z3r) - extra
    h = g + x
    w = keys.A3 @ y1 + keys.A4 @ y2
    tp = -(keys.Beq_proj @ y2)
    tm = -(keys.Beq_mask[0] @ y2)
    vv = R.concat([sh.key_image(y1), row @ y1 + De @ tp + tm])
    for name, val in (("h", h), ("w", w), ("v", vv)):
        ch.absorb(name, val)
    fields = {"f": f, "u1": u1, "u2": u2, "z3": z3r, "h": h, "w": w, "v": vv}
    return fields, (y1, y2, s)


def respond(sh: _Shape, mvec, secrets, c, rng, cheat=frozenset()):
    y1, y2, s = secrets
    cm, cs = c * mvec, c * s
    z1, z2 = y1 + cm, y2 + cs
    if "norej" not in cheat:
        if not rej(z1, cm, sh.s1, rng, sh.p.rej_M) or not rej(z2, cs, sh.s2, rng, sh.p.rej_M):
            return None
    return {"z1": z1, "z2": z2}


def prove_poe(keys: PublicKeys, stmt, mvec: RingArray, rng: Rng, challenger=None,
              cheat: frozenset = frozenset()) -> Proof:
    """Prove an ``EquivalenceStatement`` or ``KeyStatement`` with secret key vector mvec."""
    sh = _Shape(keys, stmt)

    def attempt(_):
        ch = _source(keys, stmt, challenger)
        first = first_phase(sh, mvec, rng, ch, cheat)
        if first is None:
            return None
        fields, secrets = first
        c = ch.challenge("c")
        resp = respond(sh, mvec, secrets, c, rng, cheat)
        if resp is None:
            return None
        fields.update(resp)
        return Proof(stmt.kind, fields, ch.record)

    return restart_loop(attempt)


def prove_pokw(keys: PublicKeys, pk, mvec: RingArray, rng: Rng, **kw) -> Proof:
    return prove_poe(keys, KeyStatement(pk), mvec, rng, **kw)


# -- verifier -------------------------------------------------------------------

def shapes(keys, stmt) -> dict:
    p = keys.params
    return {"f": (p.kappa,), "u1": (p.proj_polys,), "u2": (), "z3": (p.proj_polys,), "h": (),
            "w": (p.kappa,), "v": (2 * p.m + 1,), "z1": (p.key_len,), "z2": (p.m,)}


def replay_first(sh: _Shape, F: dict, ch):
    """Re-derive R and d1 from the first moves; returns the evaluation weights."""
    p = sh.p
    for name in FIRST:
        ch.absorb(name, F[name])
    Rm = ch.proj("R", p.proj_rows, sh.l_len * p.d)
    ch.absorb("z3", F["z3"])
    weights = sh.weights(ch, Rm)
    for name in FINAL:
        ch.absorb(name, F[name])
    return weights


def check_equations(sh: _Shape, F: dict, c: RingArray, weights):
    p, keys = sh.p, sh.keys
    row, De, extra = weights
    z1, z2, z3 = F["z1"], F["z2"], F["z3"]
    if not l2_ok(z1, sh.s1, 2 * p.key_len * p.d):
        return reject("a", "||z1|| too large")
    if not l2_ok(z2, sh.s2, 2 * p.m * p.d):
        return reject("b", "||z2|| too large")
    if not inf_ok(z3, p.proj_rows * sh.s3):
        return reject("c", "||z3||_inf too large")
    if int(F["h"].c[0]) != 0:
        return reject("d", "constant coefficient of h is nonzero")
    if keys.A3 @ z1 + keys.A4 @ z2 != F["w"] + c * F["f"]:
        return reject("e", "A3 z1 + A4 z2 != w + c f")
    ap = c * F["u1"] - keys.Beq_proj @ z2
    am = c * F["u2"] - keys.Beq_mask[0] @ z2
    vv = F["v"]
    if vv[:2 * p.m] != sh.key_image(z1) - c * sh.target():
        return reject("f.key", "key rows of the linear relation fail")
    if vv[2 * p.m] != row @ z1 + De @ ap + am - c * (F["h"] + De @ z3 + extra):
        return reject("f.eval", "evaluation row of the linear relation fails")
    return ACCEPT


def verify_poe(keys: PublicKeys, stmt, proof: Proof, interactive: bool = False):
    if proof.kind != stmt.kind:
        return reject("format", "proof kind does not match statement")
    bad = check_shapes(proof, shapes(keys, stmt))
    if not bad:
        return bad
    sh = _Shape(keys, stmt)
    ch = Replay(keys.ring, proof.challenges) if interactive else _source(keys, stmt, None)
    weights = replay_first(sh, proof.fields, ch)
    c = ch.challenge("c")
    return check_equations(sh, proof.fields, c, weights)


def verify_pokw(keys: PublicKeys, pk, proof: Proof, interactive: bool = False):
    return verify_poe(keys, KeyStatement(pk), proof, interactive)


# -- simulation ---------------------------------------------------------------

def simulate_first(sh: _Shape, rng: Rng, ch):
    """Witness-free first moves: uniform f, u1, u2, Gaussian z3 and h with h_0 = 0."""
    R, p = sh.R, sh.p
    fields = {"f": uniform_ring(R, rng, p.kappa), "u1": uniform_ring(R, rng, p.proj_polys),
              "u2": uniform_ring(R, rng)}
    for name in FIRST:
        ch.absorb(name, fields[name])
    Rm = ch.proj("R", p.proj_rows, sh.l_len * p.d)
    fields["z3"] = ints_to_ring(R, gaussian(sh.s3).sample(rng, p.proj_rows), p.proj_polys)
    ch.absorb("z3", fields["z3"])
    weights = sh.weights(ch, Rm)
    fields["h"] = low_zero_poly(R, rng, 1)
    return fields, weights


def simulate_final(sh: _Shape, fields: dict, weights, c: RingArray, rng: Rng):
    """Sample z1, z2 and solve the verification equations for w and v."""
    R, p, keys = sh.R, sh.p, sh.keys
    row, De, extra = weights
    z1 = gaussian(sh.s1).ring(R, rng, p.key_len)
    z2 = gaussian(sh.s2).ring(R, rng, p.m)
    fields["w"] = keys.A3 @ z1 + keys.A4 @ z2 - c * fields["f"]
    ap = c * fields["u1"] - keys.Beq_proj @ z2
    am = c * fields["u2"] - keys.Beq_mask[0] @ z2
    fields["v"] = R.concat([sh.key_image(z1) - c * sh.target(),
                            row @ z1 + De @ ap + am - c * (fields["h"] + De @ fields["z3"] + extra)])
    fields["z1"], fields["z2"] = z1, z2
    return fields
