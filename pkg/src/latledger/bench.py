"""Honest statement/witness generators for every proof kind and a timing loop.

``instance(kind, keys, rng)`` returns an ``Instance`` whose ``prove()`` runs the
prover on fresh randomness and whose ``stmt`` verifies the result; tests and
the CLI bench share it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from statistics import mean
from typing import Callable

import numpy as np

from .commit import PublicKeys, commit_tx, keygen
from .sampling import Rng, chi_ring
from . import zkp

KINDS = ("PoB", "PoC", "PoE", "PoKW", "PoA", "PoAc", "PoE2", "Or")


@dataclass
class Instance:
    kind: str
    stmt: object
    prove: Callable[[Rng], zkp.Proof]
    witness: dict
    keys: PublicKeys

    def verify(self, proof, interactive=False):
        return zkp.verify(self.keys, self.stmt, proof, interactive)


def instance(kind: str, keys: PublicKeys, rng: Rng, value: int | None = None) -> Instance:
    R, p = keys.ring, keys.params
    kp = keygen(keys, rng)
    r, r2 = chi_ring(R, rng, p.m), chi_ring(R, rng, p.m)
    limit = 1 << min(p.value_bits, 20)
    v = int(rng.randbits(20)) % limit if value is None else value

    if kind == "PoB":
        other = keygen(keys, rng)
        c1, c2 = commit_tx(keys, kp.pk, R.const(-v), r), commit_tx(keys, other.pk, R.const(v), r2)
        stmt = zkp.BalanceStatement([c1, c2])
        wit = {"r_sum": r + r2}
        prove = lambda g, **kw: zkp.prove_pob(keys, stmt, wit["r_sum"], g, **kw)
    elif kind == "PoC":
        com = commit_tx(keys, kp.pk, R.const(v), r)
        stmt = zkp.ConsistencyStatement(kp.pk, com)
        wit = {"r": r, "v": R.const(v)}
        prove = lambda g, **kw: zkp.prove_poc(keys, stmt, r, wit["v"], g, **kw)
    elif kind in ("PoE", "Or"):
        prior = commit_tx(keys, kp.pk, R.const(v + 7), chi_ring(R, rng, p.m))
        com = commit_tx(keys, kp.pk, R.const(-7), r)
        com_new = commit_tx(keys, kp.pk, R.const(v), r2)
        wit = {"sk": kp, "r": r, "r_new": r2}
        if kind == "PoE":
            stmt = zkp.EquivalenceStatement(kp.pk, prior + com, com_new)
            prove = lambda g, **kw: zkp.prove_poe(keys, stmt, kp.secret, g, **kw)
        else:
            stmt = zkp.OrStatement(kp.pk, prior + com, com, com_new)
            prove = lambda g, **kw: zkp.prove_or(keys, stmt, g, secret=kp.secret, **kw)
    elif kind == "PoKW":
        stmt = zkp.KeyStatement(kp.pk)
        wit = {"sk": kp}
        prove = lambda g, **kw: zkp.prove_pokw(keys, kp.pk, kp.secret, g, **kw)
    elif kind == "PoE2":
        com = commit_tx(keys, kp.pk, R.const(v), r)
        com_new = commit_tx(keys, kp.pk, R.const(v), r2)
        stmt = zkp.RecommitStatement(kp.pk, com, com_new)
        wit = {"r": r, "r_new": r2}
        prove = lambda g, **kw: zkp.prove_poe2(keys, stmt, r, r2, g, **kw)
    elif kind == "PoA":
        com = commit_tx(keys, kp.pk, R.const(v), r)
        stmt = zkp.RangeStatement(kp.pk, com)
        wit = {"r": r, "value": v}
        prove = lambda g, **kw: zkp.prove_poa(keys, stmt, r, v, g, **kw)
    elif kind == "PoAc":
        vals = [int(x) for x in rng.u64(p.d) % (1 << p.beta_bits)]
        com = commit_tx(keys, kp.pk, R.from_ints(np.array(vals, dtype=object)), r)
        stmt = zkp.CompactRangeStatement(kp.pk, com)
        wit = {"r": r, "values": vals}
        prove = lambda g, **kw: zkp.prove_poa_compact(keys, stmt, r, vals, g, **kw)
    else:
        raise ValueError(f"unknown proof kind {kind}")
    wit["pk"] = kp.pk
    return Instance(kind, stmt, prove, wit, keys)


def bench(keys: PublicKeys, kinds=KINDS, n: int = 10, seed=0) -> list:
    """Mean prove / verify milliseconds and mean restarts per kind over n runs."""
    rng = Rng(seed)
    rows = []
    for kind in kinds:
        inst = instance(kind, keys, rng.spawn(kind))
        tp, tv, att, size = [], [], [], 0
        for i in range(n):
            t = time.perf_counter()
            proof = inst.prove(rng)
            tp.append(time.perf_counter() - t)
            t = time.perf_counter()
            ok = inst.verify(proof)
            tv.append(time.perf_counter() - t)
            if not ok:
                raise AssertionError(f"{kind} failed to verify in bench: {ok}")
            att.append(proof.attempts)
            size = len(zkp.encode_proof(proof))
        rows.append({"kind": kind, "n": n, "prove_ms": 1000 * mean(tp), "verify_ms": 1000 * mean(tv),
                     "attempts": mean(att), "bytes": size})
    return rows
