"""Proof of balance: the values committed in one asset row sum to zero."""

from __future__ import annotations

from dataclasses import dataclass

from ..commit import Commitment, PublicKeys, sum_commitments
from ..ring import RingArray
from ..sampling import Rng, rej
from .common import check_shapes, gaussian, l2_ok, restart_loop
from .transcript import ACCEPT, FiatShamir, Proof, Replay, keys_tag, reject, statement_bytes


@dataclass
class BalanceStatement:
    coms: list  # Commitment per participant cell

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), *[c.to_bytes() for c in self.coms])

    def total(self) -> Commitment:
        return sum_commitments(self.coms)


def _sigma_sq(keys, stmt):
    return keys.params.sigma_sq["pob"] * len(stmt.coms)


def _source(keys, stmt, challenger):
    if challenger is not None:
        return challenger()
    return FiatShamir(keys.ring, "PoB", stmt.to_bytes(keys))


def prove_pob(keys: PublicKeys, stmt: BalanceStatement, r_sum: RingArray, rng: Rng,
              challenger=None, force: bool = False) -> Proof:
    R, p = keys.ring, keys.params
    s2 = _sigma_sq(keys, stmt)
    sampler = gaussian(s2)

    def attempt(_):
        ch = _source(keys, stmt, challenger)
        y = sampler.ring(R, rng, p.m)
        w, u = keys.A @ y, keys.B @ y
        ch.absorb("w", w)
        ch.absorb("u", u)
        c = ch.challenge("c")
        cr = c * r_sum
        z = y + cr
        if not force and not rej(z, cr, s2, rng, p.rej_M):
            return None
        return Proof("PoB", {"w": w, "u": u, "z": z}, ch.record)

    return restart_loop(attempt)


def check_pob(keys: PublicKeys, stmt: BalanceStatement, proof: Proof, c: RingArray):
    p = keys.params
    z = proof["z"]
    if not l2_ok(z, _sigma_sq(keys, stmt), 2 * p.m * p.d):
        return reject("norm", "||z|| exceeds s sqrt(2 m d)")
    total = stmt.total()
    if keys.A @ z != proof["w"] + c * total.com0:
        return reject("ajtai", "A z != w + c sum(com0)")
    if keys.B @ z != proof["u"] + c * total.com3:
        return reject("balance", "B^T z != u + c sum(com3)")
    return ACCEPT


def verify_pob(keys: PublicKeys, stmt: BalanceStatement, proof: Proof, interactive: bool = False):
    p = keys.params
    bad = check_shapes(proof, {"w": (p.kappa,), "u": (), "z": (p.m,)})
    if not bad:
        return bad
    ch = Replay(keys.ring, proof.challenges) if interactive else _source(keys, stmt, None)
    ch.absorb("w", proof["w"])
    ch.absorb("u", proof["u"])
    c = ch.challenge("c")
    return check_pob(keys, stmt, proof, c)


def simulate_pob(keys: PublicKeys, stmt: BalanceStatement, c: RingArray, rng: Rng) -> Proof:
    """Transcript with the given challenge and no witness: z first, then w and u."""
    R, p = keys.ring, keys.params
    z = gaussian(_sigma_sq(keys, stmt)).ring(R, rng, p.m)
    total = stmt.total()
    w = keys.A @ z - c * total.com0
    u = keys.B @ z - c * total.com3
    return Proof("PoB", {"w": w, "u": u, "z": z}, {"c": c})


def extract_pob(keys: PublicKeys, stmt: BalanceStatement, first: Proof, second: Proof):
    """Special-soundness extractor from two accepting transcripts sharing (w, u).

    Returns (r*, v*) with r* = zbar / cbar and v* = sum(com3) - cbar^-1 B^T zbar.
    """
    zbar = first["z"] - second["z"]
    cbar = first.challenges["c"] - second.challenges["c"]
    inv = cbar.inverse()
    r_star = inv * zbar
    v_star = stmt.total().com3 - inv * (keys.B @ zbar)
    return r_star, v_star, cbar
