"""Equality of two commitments under the same public key, from their randomness.

Used by receivers and decoys: com' re-commits the value of com with fresh r'.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..commit import Commitment, PublicKeys, tx_key_rows
from ..ring import RingArray
from ..sampling import Rng, rej
from .common import check_shapes, gaussian, l2_ok, restart_loop
from .transcript import ACCEPT, FiatShamir, Proof, Replay, keys_tag, reject, statement_bytes


@dataclass
class RecommitStatement:
    pk: tuple
    com: Commitment
    com_new: Commitment

    kind = "PoE2"

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1], self.com.to_bytes(), self.com_new.to_bytes())


def _source(keys, stmt, challenger):
    if challenger is not None:
        return challenger()
    return FiatShamir(keys.ring, "PoE2", stmt.to_bytes(keys))


def first_phase(keys, stmt, rng, ch):
    R, p = keys.ring, keys.params
    g = gaussian(p.sigma_sq["poe2"])
    y, yp = g.ring(R, rng, p.m), g.ring(R, rng, p.m)
    K = tx_key_rows(keys, stmt.pk)
    fields = {"w": keys.A @ y, "wp": keys.A @ yp, "u": K @ y - K @ yp}
    for name in ("w", "wp", "u"):
        ch.absorb(name, fields[name])
    return fields, (y, yp)


def respond(keys, r, rp, secrets, c, rng, force=False):
    s2 = keys.params.sigma_sq["poe2"]
    y, yp = secrets
    cr, crp = c * r, c * rp
    z, zp = y + cr, yp + crp
    if not force and not (rej(z, cr, s2, rng, keys.params.rej_M) and rej(zp, crp, s2, rng, keys.params.rej_M)):
        return None
    return {"z": z, "zp": zp}


def prove_poe2(keys: PublicKeys, stmt: RecommitStatement, r: RingArray, rp: RingArray, rng: Rng,
               challenger=None, force: bool = False) -> Proof:
    def attempt(_):
        ch = _source(keys, stmt, challenger)
        fields, secrets = first_phase(keys, stmt, rng, ch)
        c = ch.challenge("c")
        resp = respond(keys, r, rp, secrets, c, rng, force)
        if resp is None:
            return None
        fields.update(resp)
        return Proof("PoE2", fields, ch.record)

    return restart_loop(attempt)


def shapes(keys) -> dict:
    p = keys.params
    return {"w": (p.kappa,), "wp": (p.kappa,), "u": (3,), "z": (p.m,), "zp": (p.m,)}


def check_equations(keys, stmt, F, c):
    p = keys.params
    s2 = p.sigma_sq["poe2"]
    z, zp = F["z"], F["zp"]
    if not l2_ok(z, s2, 2 * p.m * p.d) or not l2_ok(zp, s2, 2 * p.m * p.d):
        return reject("norm", "response too large")
    if keys.A @ z != F["w"] + c * stmt.com.com0:
        return reject("ajtai", "A z != w + c com0")
    if keys.A @ zp != F["wp"] + c * stmt.com_new.com0:
        return reject("ajtai'", "A z' != w' + c com0'")
    K = tx_key_rows(keys, stmt.pk)
    if K @ z - K @ zp != F["u"] + c * (stmt.com.msg_rows - stmt.com_new.msg_rows):
        return reject("equal", "message rows differ")
    return ACCEPT


def verify_poe2(keys: PublicKeys, stmt: RecommitStatement, proof: Proof, interactive: bool = False):
    bad = check_shapes(proof, shapes(keys))
    if not bad:
        return bad
    ch = Replay(keys.ring, proof.challenges) if interactive else _source(keys, stmt, None)
    for name in ("w", "wp", "u"):
        ch.absorb(name, proof[name])
    return check_equations(keys, stmt, proof.fields, ch.challenge("c"))


def simulate(keys, stmt, c, rng) -> dict:
    """Accepting transcript for challenge c, built from the responses backwards."""
    R, p = keys.ring, keys.params
    g = gaussian(p.sigma_sq["poe2"])
    z, zp = g.ring(R, rng, p.m), g.ring(R, rng, p.m)
    K = tx_key_rows(keys, stmt.pk)
    return {"w": keys.A @ z - c * stmt.com.com0, "wp": keys.A @ zp - c * stmt.com_new.com0,
            "u": K @ z - K @ zp - c * (stmt.com.msg_rows - stmt.com_new.msg_rows), "z": z, "zp": zp}
