"""Zero-knowledge proofs over transaction commitments.

Every proof kind has ``prove_*`` and ``verify_*`` functions, a statement
class, and a wire layout in ``LAYOUTS`` (field name, encoding).  ``verify``
dispatches on the proof kind and accepts either a ``Proof`` or its bytes.
"""

from __future__ import annotations

LAYOUTS = {
    "PoB": [("w", "ring"), ("u", "ring"), ("z", "zring")],
    "PoC": [("f0", "ring"), ("f1", "ring"), ("u1", "ring"), ("u2", "ring"), ("z3", "zring"),
            ("h", "ring"), ("w", "ring"), ("v", "ring"), ("z1", "zring"), ("z2", "zring")],
    "PoE": [("f", "ring"), ("u1", "ring"), ("u2", "ring"), ("z3", "zring"), ("h", "ring"),
            ("w", "ring"), ("v", "ring"), ("z1", "zring"), ("z2", "zring")],
    "PoA": [("f0", "ring"), ("f1", "ring"), ("u1", "ring"), ("u2", "ring"), ("u3", "ring"),
            ("w", "ring"), ("h", "ring"), ("u4", "ring"), ("z", "zring")],
    "PoAc": [("u0", "ring"), ("uy", "ring"), ("ug", "ring"), ("ubin", "ring"), ("w1", "ring"),
             ("w2", "ring"), ("z2", "zring"), ("h", "ring"), ("ug1", "ring"), ("v", "ring"),
             ("z1", "zring"), ("z3", "zring")],
    "PoE2": [("w", "ring"), ("wp", "ring"), ("u", "ring"), ("z", "zring"), ("zp", "zring")],
    "Or": [("poe", "proof"), ("poe2", "proof"), ("c_poe", "zring")],
}
LAYOUTS["PoKW"] = LAYOUTS["PoE"]

from .transcript import (  # noqa: E402
    ACCEPT, KINDS, Proof, ProofFormatError, ProverAborted, Verdict, decode_proof, encode_proof, reject,
)
from .pob import BalanceStatement, prove_pob, verify_pob  # noqa: E402
from .poc import ConsistencyStatement, prove_poc, verify_poc  # noqa: E402
from .poe import EquivalenceStatement, KeyStatement, prove_poe, prove_pokw, verify_poe  # noqa: E402
from .poe2 import RecommitStatement, prove_poe2, verify_poe2  # noqa: E402
from .orproof import OrStatement, prove_or, verify_or  # noqa: E402
from .poa import RangeStatement, prove_poa, verify_poa  # noqa: E402
from .poa_compact import CompactRangeStatement, prove_poa_compact, verify_poa_compact  # noqa: E402

VERIFIERS = {
    "PoB": verify_pob, "PoC": verify_poc, "PoE": verify_poe, "PoKW": verify_poe,
    "PoE2": verify_poe2, "Or": verify_or, "PoA": verify_poa, "PoAc": verify_poa_compact,
}


def verify(keys, stmt, proof, interactive: bool = False) -> Verdict:
    """Verify a proof object or its encoding; malformed bytes are rejected, never raised."""
    if isinstance(proof, (bytes, bytearray)):
        try:
            proof = decode_proof(keys.ring, bytes(proof))
        except ProofFormatError as exc:
            return reject("format", str(exc))
    fn = VERIFIERS.get(proof.kind)
    if fn is None:
        return reject("format", f"unknown kind {proof.kind}")
    try:
        return fn(keys, stmt, proof, interactive)
    except (ValueError, TypeError, KeyError, AttributeError) as exc:
        return reject("format", f"{type(exc).__name__}: {exc}")


def fiat_shamir(kind: str, prover) -> bytes:
    """Run a prover with hash-derived challenges and return the proof encoding.

    ``prover`` is called with no arguments (its default challenge source is
    the Fiat-Shamir transcript); the result must be of the expected kind.
    """
    proof = prover()
    if proof.kind != kind:
        raise ValueError(f"prover produced {proof.kind}, expected {kind}")
    return encode_proof(proof)


def fs_verify(kind: str, keys, stmt, data: bytes) -> bool:
    """Decode and verify a non-interactive proof of the given kind."""
    try:
        proof = decode_proof(keys.ring, bytes(data))
    except ProofFormatError:
        return False
    if proof.kind != kind:
        return False
    return bool(verify(keys, stmt, proof))


__all__ = [
    "LAYOUTS", "KINDS", "VERIFIERS", "ACCEPT", "Proof", "ProofFormatError", "ProverAborted", "Verdict",
    "encode_proof", "decode_proof", "verify", "reject", "fiat_shamir", "fs_verify",
    "BalanceStatement", "ConsistencyStatement", "EquivalenceStatement", "KeyStatement",
    "RecommitStatement", "OrStatement", "RangeStatement", "CompactRangeStatement",
    "prove_pob", "prove_poc", "prove_poe", "prove_pokw", "prove_poe2", "prove_or", "prove_poa",
    "prove_poa_compact",
    "verify_pob", "verify_poc", "verify_poe", "verify_poe2", "verify_or", "verify_poa",
    "verify_poa_compact",
]
