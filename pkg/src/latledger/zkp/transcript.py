"""Proof containers, wire encoding and challenge sources.

A challenge source is either ``FiatShamir`` (hash of everything absorbed so
far), ``Interactive`` (fresh randomness, optionally scripted) or ``Replay``
(the challenges stored in an interactive proof).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from ..ring import Ring, RingArray
from ..sampling import (
    Rng,
    sample_challenge,
    sample_proj_matrix,
    sample_stable_challenge,
    sample_uniform_mod,
)

VERSION = 1
MAX_RESTARTS = 1000

KINDS = {"PoB": 1, "PoC": 2, "PoE": 3, "PoKW": 4, "PoA": 5, "PoAc": 6, "PoE2": 7, "Or": 8}
KIND_NAMES = {v: k for k, v in KINDS.items()}

# encodings: "ring" canonical mod q, "zring" centered (norm-checked), "proof" nested
ENC_CODES = {"ring": 1, "zring": 2, "proof": 3}
ENC_NAMES = {v: k for k, v in ENC_CODES.items()}


class ProverAborted(RuntimeError):
    """Rejection sampling failed MAX_RESTARTS times in a row."""


class ProofFormatError(ValueError):
    pass


@dataclass
class Verdict:
    ok: bool
    failed: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return "Verdict(ok)" if self.ok else f"Verdict(failed={self.failed!r}, {self.detail})"


ACCEPT = Verdict(True)


def reject(check: str, detail: str = "") -> Verdict:
    return Verdict(False, check, detail)


@dataclass
class Proof:
    kind: str
    fields: dict
    challenges: dict = field(default_factory=dict, repr=False)
    attempts: int = field(default=1, repr=False)

    def __getitem__(self, name):
        return self.fields[name]

    def replace(self, **changes) -> "Proof":
        new = dict(self.fields)
        new.update(changes)
        return Proof(self.kind, new, dict(self.challenges), self.attempts)


# -- wire format ----------------------------------------------------------------

def _encode_value(enc: str, value) -> bytes:
    if enc == "proof":
        return encode_proof(value)
    return value.to_bytes(signed=(enc == "zring"))


def encode_proof(proof: Proof, layout=None) -> bytes:
    """kind || version || sections, each: enc | ndim | dims | u32 length | payload."""
    from . import LAYOUTS

    layout = layout or LAYOUTS[proof.kind]
    out = [bytes([KINDS[proof.kind], VERSION])]
    for name, enc in layout:
        value = proof.fields[name]
        shape = () if enc == "proof" else value.shape
        payload = _encode_value(enc, value)
        head = bytes([ENC_CODES[enc], len(shape)]) + b"".join(struct.pack("<I", s) for s in shape)
        out.append(head + struct.pack("<I", len(payload)) + payload)
    return b"".join(out)


def decode_proof(ring: Ring, data: bytes) -> Proof:
    from . import LAYOUTS

    proof, pos = _decode(ring, data, 0, LAYOUTS)
    if pos != len(data):
        raise ProofFormatError("trailing bytes")
    return proof


def _decode(ring: Ring, data: bytes, pos: int, layouts):
    try:
        kind_code, version = data[pos], data[pos + 1]
    except IndexError:
        raise ProofFormatError("truncated header") from None
    if kind_code not in KIND_NAMES:
        raise ProofFormatError(f"unknown proof kind {kind_code}")
    if version != VERSION:
        raise ProofFormatError(f"unsupported version {version}")
    kind = KIND_NAMES[kind_code]
    pos += 2
    fields = {}
    for name, enc in layouts[kind]:
        if pos + 2 > len(data):
            raise ProofFormatError("truncated section")
        code, ndim = data[pos], data[pos + 1]
        if ENC_NAMES.get(code) != enc:
            raise ProofFormatError(f"section {name}: wrong encoding")
        pos += 2
        if ndim > 3:
            raise ProofFormatError("too many dimensions")
        shape = struct.unpack_from(f"<{ndim}I", data, pos) if ndim else ()
        pos += 4 * ndim
        if pos + 4 > len(data):
            raise ProofFormatError("truncated length")
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        payload = data[pos:pos + n]
        if len(payload) != n:
            raise ProofFormatError("truncated payload")
        pos += n
        try:
            if enc == "proof":
                sub, used = _decode(ring, payload, 0, layouts)
                if used != len(payload):
                    raise ProofFormatError("trailing bytes in nested proof")
                fields[name] = sub
            else:
                fields[name] = RingArray.from_bytes(ring, payload, shape, signed=(enc == "zring"))
        except ValueError as exc:
            raise ProofFormatError(f"section {name}: {exc}") from None
    return Proof(kind, fields), pos


# -- challenge sources ----------------------------------------------------------

def _message_bytes(value) -> bytes:
    if isinstance(value, RingArray):
        return struct.pack("<B", len(value.shape)) + b"".join(struct.pack("<I", s) for s in value.shape) + value.to_bytes()
    if isinstance(value, (bytes, bytearray)):
        return bytes(value)
    if isinstance(value, np.ndarray):
        return value.astype(object).tobytes() if value.dtype == object else value.tobytes()
    raise TypeError(f"cannot absorb {type(value).__name__}")


class ChallengeSource:
    """Common challenge samplers; subclasses decide where the randomness comes from."""

    def __init__(self, ring: Ring):
        self.ring = ring
        self.record = {}

    def absorb(self, label: str, value):
        pass

    def _rng(self, label: str) -> Rng:
        raise NotImplementedError

    def _get(self, label, make):
        value = make(self._rng(label))
        self.record[label] = value
        return value

    def challenge(self, label: str) -> RingArray:
        return self._get(label, lambda g: sample_challenge(self.ring, g))

    def stable_challenge(self, label: str) -> RingArray:
        return self._get(label, lambda g: sample_stable_challenge(self.ring, g))

    def proj(self, label: str, rows: int, cols: int) -> np.ndarray:
        return self._get(label, lambda g: sample_proj_matrix(g, rows, cols))

    def scalars(self, label: str, n: int) -> np.ndarray:
        R = self.ring
        return self._get(label, lambda g: sample_uniform_mod(g, R.q, n).astype(R.dtype))

    def ternary_split(self, label: str) -> RingArray:
        """Uniform element of {-1,0,1}^d used as the OR-proof challenge sum."""
        def make(g):
            vals = np.zeros(self.ring.d, dtype=np.int64)
            raw = sample_uniform_mod(g, 3, self.ring.d).astype(np.int64)
            vals[:] = raw - 1
            return self.ring.from_ints(vals)
        return self._get(label, make)


class FiatShamir(ChallengeSource):
    """Challenges derived by SHAKE-256 over the statement and every prover message."""

    def __init__(self, ring: Ring, kind: str, statement: bytes):
        super().__init__(ring)
        self.h = hashlib.shake_256()
        self._put(b"latledger/fs/v1/" + kind.encode())
        self._put(statement)

    def _put(self, data: bytes):
        self.h.update(struct.pack("<Q", len(data)) + data)

    def absorb(self, label: str, value):
        self._put(label.encode())
        self._put(_message_bytes(value))

    def _rng(self, label: str) -> Rng:
        h = self.h.copy()
        h.update(b"challenge/" + label.encode())
        seed = h.digest(32)
        # later challenges depend on this one as well
        self._put(b"derived/" + label.encode() + seed)
        return Rng(seed)

    def digest(self) -> bytes:
        return self.h.copy().digest(32)


class Interactive(ChallengeSource):
    """Verifier coins from an RNG; ``script`` pins chosen challenges by label."""

    def __init__(self, ring: Ring, rng: Rng, script: dict | None = None):
        super().__init__(ring)
        self.rng = rng
        self.script = dict(script or {})

    def _rng(self, label):
        return self.rng.spawn(label)

    def _get(self, label, make):
        if label in self.script:
            self.record[label] = self.script[label]
            return self.script[label]
        return super()._get(label, make)


class Replay(ChallengeSource):
    """Hands back the challenges recorded in an interactive transcript."""

    def __init__(self, ring: Ring, recorded: dict):
        super().__init__(ring)
        self.recorded = recorded

    def _get(self, label, make):
        if label not in self.recorded:
            raise ProofFormatError(f"transcript lacks challenge {label}")
        value = self.recorded[label]
        self.record[label] = value
        return value


def statement_bytes(*parts) -> bytes:
    """Length-prefixed concatenation of statement components."""
    out = []
    for p in parts:
        b = _message_bytes(p) if not isinstance(p, str) else p.encode()
        out.append(struct.pack("<Q", len(b)) + b)
    return b"".join(out)


def keys_tag(keys) -> bytes:
    """Binds a statement to the parameter set and public key seed."""
    p = keys.params
    return hashlib.sha3_256(f"{p.name}|{p.q}|{p.d}|{p.l}|{p.kappa}|{p.lam}".encode() + keys.seed).digest()
