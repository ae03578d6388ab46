"""Structured tamperings per proof kind, each with the check expected to fail.

Cases are built from honest instances: either the statement is edited after
proving, the prover is handed a bad witness (with its own rejection step
switched off where the bad witness would otherwise stall it), or a response
field is damaged on the wire.
"""

import dataclasses

import numpy as np

from latledger import zkp
from latledger.commit import Commitment, commit_tx, keygen
from latledger.ring import RingArray
from latledger.sampling import Rng, chi_ring, uniform_ring

NOREJ = frozenset({"norej"})


@dataclasses.dataclass
class Case:
    kind: str
    name: str
    stmt: object
    proof: object
    expect: str
    interactive: bool = False

    def verify(self, keys):
        return zkp.verify(keys, self.stmt, self.proof, self.interactive)


def bump(com: Commitment, row: str, amount=1) -> Commitment:
    rows = dict(com0=com.com0, com1=com.com1, com2=com.com2, com3=com.com3)
    R = com.com0.ring
    rows[row] = rows[row] + (amount if isinstance(amount, RingArray) else R.const(amount))
    return Commitment(**rows)


def inflate(proof, field, amount=10**7, sub=None):
    """Add ``amount`` to the first coefficient of a response field."""
    fields = dict(proof.fields)
    target = fields[sub].fields if sub else fields
    z = target[field]
    c = z.c.copy()
    flat = c.reshape(-1)
    flat[0] = (int(flat[0]) + amount) % z.ring.q
    new = dict(target, **{field: RingArray(z.ring, c)})
    if sub:
        fields[sub] = zkp.Proof(fields[sub].kind, new, fields[sub].challenges)
    else:
        fields = new
    return zkp.Proof(proof.kind, fields, proof.challenges)


def flip_byte(proof, field, index=0, sub=None):
    """Flip the low bit of one byte in a field's canonical encoding."""
    fields = dict(proof.fields)
    target = fields[sub].fields if sub else fields
    x = target[field]
    raw = bytearray(x.to_bytes())
    raw[index] ^= 1
    new = dict(target, **{field: RingArray.from_bytes(x.ring, bytes(raw), x.shape)})
    if sub:
        fields[sub] = zkp.Proof(fields[sub].kind, new, fields[sub].challenges)
    else:
        fields = new
    return zkp.Proof(proof.kind, fields, proof.challenges)


def cases(keys, seed=b"tamper"):
    R, p = keys.ring, keys.params
    g = Rng(seed)
    kp, kp2 = keygen(keys, g), keygen(keys, g)
    r, r2 = chi_ring(R, g, p.m), chi_ring(R, g, p.m)
    v = 1234
    out = []

    def add(kind, name, stmt, proof, expect, interactive=False):
        out.append(Case(kind, name, stmt, proof, expect, interactive))

    # balance
    c1, c2 = commit_tx(keys, kp.pk, R.const(v), r), commit_tx(keys, kp2.pk, R.const(-v), r2)
    st = zkp.BalanceStatement([c1, c2])
    good = zkp.prove_pob(keys, st, r + r2, g)
    add("PoB", "wrong value", zkp.BalanceStatement([bump(c1, "com3"), c2]), good, "balance", True)
    add("PoB", "unbalanced witness", zkp.BalanceStatement([commit_tx(keys, kp.pk, R.const(v + 1), r), c2]),
        zkp.prove_pob(keys, zkp.BalanceStatement([commit_tx(keys, kp.pk, R.const(v + 1), r), c2]), r + r2, g),
        "balance")
    add("PoB", "wrong randomness", st, zkp.prove_pob(keys, st, r + r, g, force=True), "ajtai")
    add("PoB", "inflated norm", st, inflate(good, "z"), "norm")
    add("PoB", "flipped byte", st, flip_byte(good, "u"), "ajtai")
    add("PoB", "moved commitment", zkp.BalanceStatement([c1, bump(c2, "com0", R.const(1))]), good, "ajtai", True)

    # consistency
    com = commit_tx(keys, kp.pk, R.const(v), r)
    st = zkp.ConsistencyStatement(kp.pk, com)
    good = zkp.prove_poc(keys, st, r, R.const(v), g)
    add("PoC", "wrong value", st, zkp.prove_poc(keys, st, r, R.const(v + 1), g), "f.com1")
    st_k = zkp.ConsistencyStatement(kp2.pk, com)
    add("PoC", "wrong key", st_k, zkp.prove_poc(keys, st_k, r, R.const(v), g), "f.com1")
    st_s = zkp.ConsistencyStatement(kp.pk, bump(com, "com2"))
    add("PoC", "sqrt(q) slot", st_s, zkp.prove_poc(keys, st_s, r, R.const(v), g), "f.com2")
    add("PoC", "masking constant", st, zkp.prove_poc(keys, st, r, R.const(v), g, cheat=frozenset({"g_const"})), "d")
    poly = R.from_ints(np.array([v, 1] + [0] * (p.d - 2)))
    st_p = zkp.ConsistencyStatement(kp.pk, commit_tx(keys, kp.pk, poly, r))
    add("PoC", "non-constant value", st_p, zkp.prove_poc(keys, st_p, r, poly, g), "d")
    long_r = r.c.copy()
    long_r[0, 0] = 10**6
    long_r = RingArray(R, long_r)
    st_l = zkp.ConsistencyStatement(kp.pk, commit_tx(keys, kp.pk, R.const(v), long_r))
    add("PoC", "long randomness", st_l, zkp.prove_poc(keys, st_l, long_r, R.const(v), g, cheat=NOREJ), "a")
    add("PoC", "inflated norm", st, inflate(good, "z3"), "c")
    add("PoC", "flipped byte", st, flip_byte(good, "f1"), "e")

    # equivalence
    prior = commit_tx(keys, kp.pk, R.const(v), chi_ring(R, g, p.m))
    honest_new = commit_tx(keys, kp.pk, R.const(v), r2)
    st = zkp.EquivalenceStatement(kp.pk, prior, honest_new)
    good = zkp.prove_poe(keys, st, kp.secret, g)
    st_v = zkp.EquivalenceStatement(kp.pk, prior, commit_tx(keys, kp.pk, R.const(v + 1), r2))
    add("PoE", "wrong value", st_v, zkp.prove_poe(keys, st_v, kp.secret, g, cheat=NOREJ), "c")
    add("PoE", "wrong key", st, zkp.prove_poe(keys, st, kp2.secret, g, cheat=NOREJ), "c")
    st_s = zkp.EquivalenceStatement(kp.pk, prior, bump(honest_new, "com2", p.sqrt_q))
    add("PoE", "sqrt(q) slot", st_s, zkp.prove_poe(keys, st_s, kp.secret, g, cheat=NOREJ), "c")
    add("PoE", "inflated norm", st, inflate(good, "z3"), "c")
    add("PoE", "flipped byte", st, flip_byte(good, "u1"), "e")

    # key well-formedness
    st = zkp.KeyStatement(kp.pk)
    good = zkp.prove_pokw(keys, kp.pk, kp.secret, g)
    bad = dataclasses.replace(kp, e1=uniform_ring(R, g, p.m))
    bad = dataclasses.replace(bad, pk1=keys.A.T @ bad.s1 + bad.e1)
    add("PoKW", "long key noise", zkp.KeyStatement(bad.pk),
        zkp.prove_pokw(keys, bad.pk, bad.secret, g, cheat=NOREJ), "a")
    pk_b = (kp.pk[0], kp.pk[1] + R.const(1))
    add("PoKW", "perturbed key", zkp.KeyStatement(pk_b), zkp.prove_pokw(keys, pk_b, kp.secret, g, cheat=NOREJ),
        "f.key")
    add("PoKW", "wrong key", st, zkp.prove_pokw(keys, kp.pk, kp2.secret, g, cheat=NOREJ), "f.key")
    add("PoKW", "inflated norm", st, inflate(good, "z3"), "c")
    add("PoKW", "flipped byte", st, flip_byte(good, "u1"), "e")

    # range
    def range_case(value, committed, **kw):
        c = commit_tx(keys, kp.pk, R.const(committed), r)
        s = zkp.RangeStatement(kp.pk, c)
        return s, zkp.prove_poa(keys, s, r, value, g, **kw)

    st, good = range_case(77, 77)
    add("PoA", "wrong value", *range_case(5, 6), "d")
    add("PoA", "too large", *range_case(1 << p.value_bits, 1 << p.value_bits), "e")
    add("PoA", "negative", *range_case(-1, -1), "e")
    slots = np.zeros((R.l, R.s), dtype=object)
    slots[1, 0] = 2
    add("PoA", "non-binary digit", *range_case(4, 4, v_bin=R.intt(slots.astype(R.dtype))), "c")
    st_k = zkp.RangeStatement(kp2.pk, st.com)
    add("PoA", "wrong key", st_k, zkp.prove_poa(keys, st_k, r, 77, g), "d")
    add("PoA", "inflated norm", st, inflate(good, "z"), "a")
    add("PoA", "flipped byte", st, flip_byte(good, "f0"), "b")

    # compact multi-asset range
    def compact_case(values, committed, rand=r):
        c = commit_tx(keys, kp.pk, R.from_ints(np.array(committed)), r)
        s = zkp.CompactRangeStatement(kp.pk, c)
        return s, zkp.prove_poa_compact(keys, s, rand, values, g)

    ok_vals = [int(x) for x in Rng(b"vals").u64(p.d) % (1 << p.beta_bits)]
    st, good = compact_case(ok_vals, ok_vals)
    neg = [3, -1] + [0] * (p.d - 2)
    add("PoAc", "negative coefficient", *compact_case(neg, neg), "c")
    top = [1 << p.beta_bits] + [0] * (p.d - 1)
    add("PoAc", "too large", *compact_case(top, top), "c")
    add("PoAc", "wrong values", *compact_case([5] * p.d, [4] * p.d), "e")
    add("PoAc", "wrong randomness", *compact_case([4] * p.d, [4] * p.d, rand=r2), "d")
    add("PoAc", "inflated norm", st, inflate(good, "z1"), "a")
    add("PoAc", "flipped byte", st, flip_byte(good, "u0"), "d")

    # re-commitment
    a = commit_tx(keys, kp.pk, R.const(v), r)
    b = commit_tx(keys, kp.pk, R.const(v), r2)
    st = zkp.RecommitStatement(kp.pk, a, b)
    good = zkp.prove_poe2(keys, st, r, r2, g)
    st_v = zkp.RecommitStatement(kp.pk, a, commit_tx(keys, kp.pk, R.const(v + 1), r2))
    add("PoE2", "wrong value", st_v, zkp.prove_poe2(keys, st_v, r, r2, g), "equal")
    st_k = zkp.RecommitStatement(kp.pk, a, commit_tx(keys, kp2.pk, R.const(v), r2))
    add("PoE2", "wrong key", st_k, zkp.prove_poe2(keys, st_k, r, r2, g), "equal")
    st_s = zkp.RecommitStatement(kp.pk, a, bump(b, "com2"))
    add("PoE2", "sqrt(q) slot", st_s, zkp.prove_poe2(keys, st_s, r, r2, g), "equal")
    add("PoE2", "wrong randomness", st, zkp.prove_poe2(keys, st, r, r, g), "ajtai'")
    add("PoE2", "inflated norm", st, inflate(good, "z"), "norm")
    add("PoE2", "flipped byte", st, flip_byte(good, "u"), "ajtai")

    # OR composition
    prior = commit_tx(keys, kp.pk, R.const(v + 7), chi_ring(R, g, p.m))
    spend = commit_tx(keys, kp.pk, R.const(-7), r)
    st = zkp.OrStatement(kp.pk, prior + spend, spend, commit_tx(keys, kp.pk, R.const(v), r2))
    good = zkp.prove_or(keys, st, g, secret=kp.secret)
    add("Or", "wrong key", st, zkp.prove_or(keys, st, g, secret=kp2.secret, cheat=NOREJ), "poe.c")
    st_i = zkp.OrStatement(kp.pk, prior + spend, spend, commit_tx(keys, kp.pk, R.const(v + 5), r2))
    add("Or", "inflated value", st_i, zkp.prove_or(keys, st_i, g, secret=kp.secret, cheat=NOREJ), "poe.c")
    add("Or", "receiver mismatch", st_i, zkp.prove_or(keys, st_i, g, randomness=(r, r2)), "poe2.equal")
    add("Or", "inflated norm", st, inflate(good, "z3", sub="poe"), "poe.c")
    add("Or", "flipped byte", st, flip_byte(good, "u", sub="poe2"), "poe2.ajtai")
    heavy = dict(good.fields, c_poe=R.const(2))
    add("Or", "non-ternary split", st, zkp.Proof("Or", heavy, good.challenges), "split")
    return out
