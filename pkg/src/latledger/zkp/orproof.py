"""OR composition of the equivalence proof and the re-commitment proof.

A spender knows the secret key (equivalence branch); a receiver or decoy
knows the randomness of both commitments (re-commitment branch).  The other
branch is simulated with a challenge chosen in advance, and the two branch
challenges must add up to the hashed ternary challenge modulo 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..commit import Commitment, PublicKeys
from ..ring import RingArray, norm_l1
from ..sampling import Rng
from . import poe, poe2
from .common import check_shapes, restart_loop
from .transcript import ACCEPT, ChallengeSource, FiatShamir, Proof, keys_tag, reject, statement_bytes


@dataclass
class OrStatement:
    pk: tuple
    column: Commitment   # sum of the owner's column including com
    com: Commitment      # this transaction's commitment
    com_new: Commitment  # re-commitment com'

    def to_bytes(self, keys) -> bytes:
        return statement_bytes(keys_tag(keys), self.pk[0], self.pk[1], self.column.to_bytes(),
                               self.com.to_bytes(), self.com_new.to_bytes())

    def branches(self):
        return (poe.EquivalenceStatement(self.pk, self.column, self.com_new),
                poe2.RecommitStatement(self.pk, self.com, self.com_new))


def ternary_diff(ring, a: RingArray, b: RingArray) -> RingArray:
    """(a - b) reduced into {-1, 0, 1} coefficientwise modulo 3."""
    x = (a.centered().astype(np.int64) - b.centered().astype(np.int64)) % 3
    x[x == 2] = -1
    return ring.from_ints(x)


def _ternary(ring, rng: Rng) -> RingArray:
    from ..sampling import sample_uniform_mod
    return ring.from_ints(sample_uniform_mod(rng, 3, ring.d).astype(np.int64) - 1)


def _sources(keys, stmt, challenger):
    if challenger is not None:
        src = challenger()
        return src, src
    tag = stmt.to_bytes(keys)
    return FiatShamir(keys.ring, "Or/PoE", tag), FiatShamir(keys.ring, "Or", tag)


def _absorb_branches(outer, poe_fields, poe2_fields):
    for name in ("f", "u1", "u2", "z3", "h", "w", "v"):
        outer.absorb("poe." + name, poe_fields[name])
    for name in ("w", "wp", "u"):
        outer.absorb("poe2." + name, poe2_fields[name])


def prove_or(keys: PublicKeys, stmt: OrStatement, rng: Rng, secret: RingArray | None = None,
             randomness: tuple | None = None, challenger=None, cheat: frozenset = frozenset()) -> Proof:
    """Give ``secret`` (owner key vector) for the equivalence branch or
    ``randomness`` = (r, r') for the re-commitment branch.  ``cheat`` is
    passed to the equivalence prover (soundness tests only)."""
    if (secret is None) == (randomness is None):
        raise ValueError("exactly one branch witness is required")
    R, p = keys.ring, keys.params
    st_eq, st_rc = stmt.branches()
    sh = poe._Shape(keys, st_eq)

    def attempt(_):
        inner, outer = _sources(keys, stmt, challenger)
        c_fake = _ternary(R, rng)
        if secret is not None:
            first = poe.first_phase(sh, secret, rng, inner, cheat)
            if first is None:
                return None
            eq_fields, secrets = first
            rc_fields = poe2.simulate(keys, st_rc, c_fake, rng)
        else:
            eq_fields, weights = poe.simulate_first(sh, rng, inner)
            eq_fields = poe.simulate_final(sh, eq_fields, weights, c_fake, rng)
            rc_fields, secrets = poe2.first_phase(keys, st_rc, rng, ChallengeSource(R))
        _absorb_branches(outer, eq_fields, rc_fields)
        c_sum = outer.ternary_split("c")
        c_real = ternary_diff(R, c_sum, c_fake)
        if norm_l1(c_real) > p.omega or norm_l1(c_fake) > p.omega:
            return None
        if secret is not None:
            resp = poe.respond(sh, secret, secrets, c_real, rng, cheat)
            if resp is None:
                return None
            eq_fields.update(resp)
            c_eq = c_real
        else:
            resp = poe2.respond(keys, randomness[0], randomness[1], secrets, c_real, rng)
            if resp is None:
                return None
            rc_fields.update(resp)
            c_eq = c_fake
        fields = {"poe": Proof("PoE", eq_fields), "poe2": Proof("PoE2", rc_fields), "c_poe": c_eq}
        return Proof("Or", fields, dict(inner.record, **outer.record))

    return restart_loop(attempt)


def verify_or(keys: PublicKeys, stmt: OrStatement, proof: Proof, interactive: bool = False):
    from .transcript import Replay

    R, p = keys.ring, keys.params
    F = proof.fields
    if proof.kind != "Or" or not isinstance(F.get("poe"), Proof) or not isinstance(F.get("poe2"), Proof):
        return reject("format", "malformed OR proof")
    if F["poe"].kind != "PoE" or F["poe2"].kind != "PoE2":
        return reject("format", "wrong branch kinds")
    st_eq, st_rc = stmt.branches()
    for sub, shp in ((F["poe"], poe.shapes(keys, st_eq)), (F["poe2"], poe2.shapes(keys))):
        bad = check_shapes(sub, shp)
        if not bad:
            return bad
    c_eq = F.get("c_poe")
    if not isinstance(c_eq, RingArray) or c_eq.shape != ():
        return reject("format", "branch challenge missing")
    if interactive:
        inner = outer = Replay(R, proof.challenges)
    else:
        inner, outer = _sources(keys, stmt, None)
    sh = poe._Shape(keys, st_eq)
    weights = poe.replay_first(sh, F["poe"].fields, inner)
    _absorb_branches(outer, F["poe"].fields, F["poe2"].fields)
    c_sum = outer.ternary_split("c")
    if int(np.abs(c_eq.centered()).max(initial=0)) > 1:
        return reject("split", "branch challenge is not ternary")
    c_rc = ternary_diff(R, c_sum, c_eq)
    if norm_l1(c_eq) > p.omega or norm_l1(c_rc) > p.omega:
        return reject("split", "branch challenge too heavy")
    v = poe.check_equations(sh, F["poe"].fields, c_eq, weights)
    if not v:
        return reject("poe." + v.failed, v.detail)
    v = poe2.check_equations(keys, st_rc, F["poe2"].fields, c_rc)
    if not v:
        return reject("poe2." + v.failed, v.detail)
    return ACCEPT
