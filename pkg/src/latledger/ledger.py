"""Encrypted table ledger: rows are transactions, columns are participants,
and every cell is a commitment to a signed amount under the owner's key.

A transaction carries, per (asset, participant) cell, the amount commitment
com, a re-commitment com' to either the owner's new balance (spender) or the
same amount (receiver / decoy), and the proofs PoC(com), PoC(com'),
OR(PoE, PoE2) and a range proof on com'.  One balance proof per asset row
shows the row sums to zero.  In compact mode there is a single row whose
value polynomials hold one asset per coefficient.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .commit import (
    Commitment, ExtractionError, KeyPair, PublicKeys, commit_tx, expand_keys, extract, keygen,
)
from .params import ParamSet, validate
from .ring import RingArray
from .sampling import Rng, chi_ring
from .zkp import (
    BalanceStatement, CompactRangeStatement, ConsistencyStatement, KeyStatement, OrStatement,
    Proof, ProofFormatError, RangeStatement, Verdict, decode_proof, encode_proof, prove_or,
    prove_pob, prove_poc, prove_pokw, prove_poa, prove_poa_compact, reject, verify,
)
from .zkp.transcript import ACCEPT

MAGIC = b"LATLEDG1"
REC_HEADER, REC_PARTY, REC_GENESIS, REC_TX = 1, 2, 3, 4


class LedgerError(ValueError):
    """Invalid request, such as an unbalanced value list or a missing key."""


class TxRejected(Exception):
    def __init__(self, verdict: Verdict):
        super().__init__(f"{verdict.failed}: {verdict.detail}")
        self.verdict = verdict


class LedgerIOError(OSError):
    def __init__(self, msg, record=None):
        super().__init__(msg if record is None else f"record {record}: {msg}")
        self.record = record


# -- framing ------------------------------------------------------------------

def _pack(*blobs) -> bytes:
    return b"".join(struct.pack("<I", len(b)) + b for b in blobs)


def _unpack(data: bytes, count: int | None = None):
    out, pos = [], 0
    while pos < len(data) and (count is None or len(out) < count):
        if pos + 4 > len(data):
            raise ValueError("truncated blob length")
        (n,) = struct.unpack_from("<I", data, pos)
        blob = data[pos + 4:pos + 4 + n]
        if len(blob) != n:
            raise ValueError("truncated blob")
        out.append(blob)
        pos += 4 + n
    if pos != len(data) or (count is not None and len(out) != count):
        raise ValueError("framing mismatch")
    return out


# -- transactions ---------------------------------------------------------------

@dataclass
class Cell:
    com: Commitment
    com_new: Commitment
    poc: Proof
    poc_new: Proof
    link: Proof   # OR(PoE, PoE2)
    range: Proof  # PoA or PoAc

    PROOFS = ("poc", "poc_new", "link", "range")

    def to_bytes(self) -> bytes:
        return _pack(self.com.to_bytes(), self.com_new.to_bytes(),
                     *(encode_proof(getattr(self, n)) for n in self.PROOFS))

    @classmethod
    def from_bytes(cls, ring, kappa, data: bytes) -> "Cell":
        parts = _unpack(data, 6)
        coms = [Commitment.from_bytes(ring, b, kappa) for b in parts[:2]]
        return cls(*coms, *(decode_proof(ring, b) for b in parts[2:]))


@dataclass
class Transaction:
    cells: list   # [row][party] of Cell
    balance: list  # PoB per row
    timings: dict = field(default_factory=dict, compare=False, repr=False)

    def to_bytes(self) -> bytes:
        rows, parties = len(self.cells), len(self.cells[0])
        head = struct.pack("<HH", rows, parties)
        body = [c.to_bytes() for row in self.cells for c in row] + [encode_proof(p) for p in self.balance]
        return head + _pack(*body)

    @classmethod
    def from_bytes(cls, ring, kappa, data: bytes) -> "Transaction":
        try:
            rows, parties = struct.unpack_from("<HH", data, 0)
            blobs = _unpack(data[4:], rows * parties + rows)
            cells = [[Cell.from_bytes(ring, kappa, blobs[a * parties + i]) for i in range(parties)]
                     for a in range(rows)]
            balance = [decode_proof(ring, b) for b in blobs[rows * parties:]]
        except (struct.error, ValueError) as exc:
            raise ProofFormatError(f"malformed transaction: {exc}") from None
        return cls(cells, balance)


# -- ledger state ---------------------------------------------------------------

@dataclass
class Participant:
    pk: tuple
    pokw: Proof


class Ledger:
    """In-memory ledger state; ``LedgerFile`` persists it."""

    def __init__(self, params: ParamSet, seed: bytes, n_parties: int, n_assets: int, compact: bool = False):
        ok = validate(params)
        if not ok:
            raise LedgerError(f"invalid parameters: {ok}")
        if n_parties < 2:
            raise LedgerError("need at least two participants")
        if n_assets < 1 or (compact and n_assets > params.d):
            raise LedgerError("bad asset count")
        self.params, self.seed = params, bytes(seed)
        self.keys: PublicKeys = expand_keys(params, pp_seed(seed))
        self.ring = self.keys.ring
        self.n_parties, self.n_assets, self.compact = n_parties, n_assets, compact
        self.participants: list[Participant] = []
        self.genesis_values = None
        self.genesis_rand = None
        self.txs: list[Transaction] = []
        self.columns = None  # [row][party] running commitment sums
        self.length = 0      # rows per column, genesis included

    @property
    def rows(self) -> int:
        return 1 if self.compact else self.n_assets

    # -- setup -------------------------------------------------------------

    def register(self, pk, pokw: Proof):
        if any(_pk_bytes(p.pk) == _pk_bytes(pk) for p in self.participants):
            raise LedgerError("duplicate participant")
        if len(self.participants) >= self.n_parties:
            raise LedgerError("participant table is full")
        v = verify(self.keys, KeyStatement(pk), pokw)
        if not v:
            raise TxRejected(reject("PoKW." + str(v.failed), v.detail))
        self.participants.append(Participant(pk, pokw))

    def set_genesis(self, values, randomness):
        """values[a][i] >= 0; randomness[row][i] ring vectors (published)."""
        vals = np.array(values, dtype=object).reshape(self.n_assets, self.n_parties)
        if any(int(v) < 0 for v in vals.flat):
            raise LedgerError("genesis values must be non-negative")
        if len(self.participants) != self.n_parties:
            raise LedgerError("register every participant before genesis")
        self.genesis_values, self.genesis_rand = vals, randomness
        self.columns = [[commit_tx(self.keys, self.participants[i].pk, self.cell_value(vals, a, i),
                                   randomness[a][i]) for i in range(self.n_parties)] for a in range(self.rows)]
        self.length = 1

    def cell_value(self, values, row: int, party: int) -> RingArray:
        if self.compact:
            coeffs = np.zeros(self.params.d, dtype=object)
            coeffs[:self.n_assets] = [int(values[a][party]) for a in range(self.n_assets)]
            return self.ring.from_ints(coeffs)
        return self.ring.const(int(values[row][party]))

    def _poly(self, vals) -> RingArray:
        """Value polynomial: coefficients in compact mode, a constant otherwise."""
        if self.compact:
            coeffs = np.zeros(self.params.d, dtype=object)
            coeffs[:len(vals)] = [int(v) for v in vals]
            return self.ring.from_ints(coeffs)
        return self.ring.const(int(vals[0]))

    def column(self, row: int, party: int) -> Commitment:
        return self.columns[row][party]

    # -- transactions ---------------------------------------------------------

    def check_values(self, values):
        vals = np.array(values, dtype=object).reshape(self.n_assets, self.n_parties)
        for a in range(self.n_assets):
            if sum(int(v) for v in vals[a]) != 0:
                raise LedgerError(f"asset {a} amounts do not sum to zero")
        return vals

    def balances(self, sk: KeyPair, party: int) -> list:
        return [self.check_balance(sk, party, a) for a in range(self.n_assets)]

    def check_balance(self, sk: KeyPair, party: int, asset: int) -> int:
        if _pk_bytes(sk.pk) != _pk_bytes(self.participants[party].pk):
            raise LedgerError("secret key does not belong to this participant")
        row = 0 if self.compact else asset
        v = extract(self.column(row, party), sk, self.params).centered()
        if self.compact:
            return int(v[asset])
        if any(int(x) for x in v[1:]):
            raise ExtractionError("column value is not a constant polynomial")
        return int(v[0])

    def create_tx(self, values, sks: dict, rng: Rng | None = None, force: bool = False) -> Transaction:
        """Build a transaction for amounts values[a][i].  ``sks`` maps party index
        to KeyPair for every spender.  ``force`` skips the honest-caller checks
        (balanced amounts, no overspend) so negative tests can build bad rows."""
        rng = rng or Rng()
        keys, p = self.keys, self.params
        vals = np.array(values, dtype=object).reshape(self.n_assets, self.n_parties)
        if not force:
            self.check_values(vals)
        if self.length >= p.column_budget:
            raise LedgerError("column budget exhausted; extraction would fail")
        timings = {}

        def timed(kind, fn, *a, **kw):
            t = time.perf_counter()
            out = fn(*a, **kw)
            timings.setdefault(kind, []).append(time.perf_counter() - t)
            return out

        spenders = {i for i in range(self.n_parties) if any(int(vals[a][i]) < 0 for a in range(self.n_assets))}
        for i in spenders:
            if i not in sks:
                raise LedgerError(f"missing secret key for spending participant {i}")
        cells, balance = [], []
        for row in range(self.rows):
            row_cells, r_sum = [], None
            for i in range(self.n_parties):
                pk = self.participants[i].pk
                v = self.cell_value(vals, row, i)
                r = chi_ring(self.ring, rng, p.m)
                com = commit_tx(keys, pk, v, r)
                r_new = chi_ring(self.ring, rng, p.m)
                column = self.column(row, i) + com
                if i in spenders:
                    sk = sks[i]
                    if self.compact:
                        new_vals = [self.check_balance(sk, i, a) + int(vals[a][i]) for a in range(self.n_assets)]
                    else:
                        new_vals = [self.check_balance(sk, i, row) + int(vals[row][i])]
                    if not force and min(new_vals) < 0:
                        raise LedgerError(f"participant {i} would overspend")
                    v_new = self._poly(new_vals)
                    com_new = commit_tx(keys, pk, v_new, r_new)
                    link = timed("Or", prove_or, keys, OrStatement(pk, column, com, com_new), rng, secret=sk.secret)
                else:
                    new_vals = [int(vals[a][i]) for a in range(self.n_assets)] if self.compact else [int(vals[row][i])]
                    v_new = v
                    com_new = commit_tx(keys, pk, v_new, r_new)
                    link = timed("Or", prove_or, keys, OrStatement(pk, column, com, com_new), rng,
                                 randomness=(r, r_new))
                scalar = not self.compact
                poc = timed("PoC", prove_poc, keys, ConsistencyStatement(pk, com, scalar), r, v, rng)
                poc_new = timed("PoC", prove_poc, keys, ConsistencyStatement(pk, com_new, scalar), r_new, v_new, rng)
                if self.compact:
                    coeffs = new_vals + [0] * (p.d - len(new_vals))
                    rng_proof = timed("PoAc", prove_poa_compact, keys, CompactRangeStatement(pk, com_new),
                                      r_new, coeffs, rng)
                else:
                    rng_proof = timed("PoA", prove_poa, keys, RangeStatement(pk, com_new), r_new, new_vals[0], rng)
                row_cells.append(Cell(com, com_new, poc, poc_new, link, rng_proof))
                r_sum = r if r_sum is None else r_sum + r
            stmt = BalanceStatement([c.com for c in row_cells])
            balance.append(timed("PoB", prove_pob, keys, stmt, r_sum, rng))
            cells.append(row_cells)
        return Transaction(cells, balance, timings)

    def verify_tx(self, tx) -> Verdict:
        """Check every proof against the current column sums; report the first failure."""
        keys = self.keys
        if isinstance(tx, (bytes, bytearray)):
            try:
                tx = Transaction.from_bytes(self.ring, self.params.kappa, bytes(tx))
            except ProofFormatError as exc:
                return reject("format", str(exc))
        if len(tx.cells) != self.rows or any(len(r) != self.n_parties for r in tx.cells) \
                or len(tx.balance) != self.rows:
            return reject("format", "transaction shape does not match the ledger")
        if self.length >= self.params.column_budget:
            return reject("budget", "column budget exhausted")
        range_kind = "PoAc" if self.compact else "PoA"
        for row in range(self.rows):
            for i, cell in enumerate(tx.cells[row]):
                pk = self.participants[i].pk
                column = self.column(row, i) + cell.com
                scalar = not self.compact
                checks = [
                    ("PoC", ConsistencyStatement(pk, cell.com, scalar), cell.poc, "PoC"),
                    ("PoC'", ConsistencyStatement(pk, cell.com_new, scalar), cell.poc_new, "PoC"),
                    ("Or", OrStatement(pk, column, cell.com, cell.com_new), cell.link, "Or"),
                    (range_kind, (CompactRangeStatement if self.compact else RangeStatement)(pk, cell.com_new),
                     cell.range, range_kind),
                ]
                for label, stmt, proof, kind in checks:
                    where = f"{label}[a={row},i={i}]"
                    if proof.kind != kind:
                        return reject(where, f"expected {kind} proof")
                    v = verify(keys, stmt, proof)
                    if not v:
                        return reject(where, f"check {v.failed}: {v.detail}")
            stmt = BalanceStatement([c.com for c in tx.cells[row]])
            if tx.balance[row].kind != "PoB":
                return reject(f"PoB[a={row}]", "expected PoB proof")
            v = verify(keys, stmt, tx.balance[row])
            if not v:
                return reject(f"PoB[a={row}]", f"check {v.failed}: {v.detail}")
        return ACCEPT

    def apply(self, tx: Transaction):
        """Fold a verified transaction into the column sums."""
        for row in range(self.rows):
            for i in range(self.n_parties):
                self.columns[row][i] = self.columns[row][i] + tx.cells[row][i].com
        self.txs.append(tx)
        self.length += 1

    def append(self, tx: Transaction) -> int:
        v = self.verify_tx(tx)
        if not v:
            raise TxRejected(v)
        self.apply(tx)
        return len(self.txs) - 1

    # -- persistence records ----------------------------------------------------

    def header_bytes(self) -> bytes:
        meta = {"params": json.loads(self.params.to_json()), "seed": self.seed.hex(),
                "parties": self.n_parties, "assets": self.n_assets, "compact": self.compact}
        return json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_header(cls, data: bytes) -> "Ledger":
        meta = json.loads(data)
        params = ParamSet.from_json(json.dumps(meta["params"]))
        return cls(params, bytes.fromhex(meta["seed"]), meta["parties"], meta["assets"], meta["compact"])

    def party_bytes(self, i: int) -> bytes:
        pt = self.participants[i]
        return _pack(pt.pk[0].to_bytes(), pt.pk[1].to_bytes(), encode_proof(pt.pokw))

    def read_party(self, data: bytes):
        a, b, proof = _unpack(data, 3)
        pk = (RingArray.from_bytes(self.ring, a, (self.params.m,)), RingArray.from_bytes(self.ring, b, (self.params.m,)))
        self.register(pk, decode_proof(self.ring, proof))

    def genesis_bytes(self) -> bytes:
        vals = [int(v) for v in self.genesis_values.flat]
        rand = [self.genesis_rand[a][i].to_bytes(signed=True) for a in range(self.rows) for i in range(self.n_parties)]
        return _pack(json.dumps(vals).encode(), *rand)

    def read_genesis(self, data: bytes):
        blobs = _unpack(data, 1 + self.rows * self.n_parties)
        vals = json.loads(blobs[0])
        if len(vals) != self.n_assets * self.n_parties:
            raise ValueError("genesis size mismatch")
        rand = [[RingArray.from_bytes(self.ring, blobs[1 + a * self.n_parties + i], (self.params.m,), signed=True)
                 for i in range(self.n_parties)] for a in range(self.rows)]
        self.set_genesis(np.array(vals, dtype=object).reshape(self.n_assets, self.n_parties), rand)


def pp_seed(seed: bytes) -> bytes:
    return hashlib.sha3_256(b"latledger/pp" + bytes(seed)).digest()


def _pk_bytes(pk) -> bytes:
    return pk[0].to_bytes() + pk[1].to_bytes()


def setup(n_parties: int, genesis, params: ParamSet, seed: bytes, compact: bool = False, n_assets: int | None = None):
    """Create public keys, participants (with key proofs) and the genesis row.

    Returns (ledger, secret keys).  Genesis values are given as
    genesis[a][i] (or a flat asset-major list)."""
    flat = [int(v) for v in np.array(genesis, dtype=object).flat]
    if n_assets is None:
        n_assets = len(flat) // n_parties
    if len(flat) != n_assets * n_parties:
        raise LedgerError("genesis must list one value per (asset, participant)")
    if any(v < 0 for v in flat):
        raise LedgerError("genesis values must be non-negative")
    led = Ledger(params, seed, n_parties, n_assets, compact)
    root = Rng(b"latledger/setup" + bytes(seed))
    sks = []
    for i in range(n_parties):
        g = root.spawn(f"party/{i}")
        kp = keygen(led.keys, g)
        led.register(kp.pk, prove_pokw(led.keys, kp.pk, kp.secret, g))
        sks.append(kp)
    g = root.spawn("genesis")
    rand = [[chi_ring(led.ring, g, params.m) for _ in range(n_parties)] for _ in range(led.rows)]
    led.set_genesis(np.array(flat, dtype=object).reshape(n_assets, n_parties), rand)
    return led, sks


# -- file storage -------------------------------------------------------------------

class LedgerFile:
    """Append-only record file with an offset index sidecar (``<path>.idx``).

    Record: u32 length | u8 type | payload | u32 crc32(type | payload)."""

    def __init__(self, path):
        self.path = os.fspath(path)
        self.idx_path = self.path + ".idx"

    @staticmethod
    def frame(rtype: int, payload: bytes) -> bytes:
        body = bytes([rtype]) + payload
        return struct.pack("<I", len(body)) + body + struct.pack("<I", zlib.crc32(body))

    def create(self, led: Ledger):
        if os.path.exists(self.path):
            raise LedgerIOError(f"{self.path} already exists")
        recs = [self.frame(REC_HEADER, MAGIC + led.header_bytes())]
        recs += [self.frame(REC_PARTY, led.party_bytes(i)) for i in range(led.n_parties)]
        recs.append(self.frame(REC_GENESIS, led.genesis_bytes()))
        recs += [self.frame(REC_TX, tx.to_bytes()) for tx in led.txs]
        with open(self.path, "xb") as fh:
            fh.write(b"".join(recs))
            fh.flush()
            os.fsync(fh.fileno())
        self._write_index(recs)

    def _write_index(self, recs):
        offs, pos = [], 0
        for r in recs:
            offs.append(pos)
            pos += len(r)
        tmp = self.idx_path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(struct.pack(f"<{len(offs)}Q", *offs))
        os.replace(tmp, self.idx_path)

    def append_tx(self, tx: Transaction):
        rec = self.frame(REC_TX, tx.to_bytes())
        with open(self.path, "ab") as fh:
            pos = fh.tell()
            fh.write(rec)
            fh.flush()
            os.fsync(fh.fileno())
        with open(self.idx_path, "ab") as fh:
            fh.write(struct.pack("<Q", pos))

    def records(self):
        """Yield (index, type, payload); raises LedgerIOError naming the bad record."""
        try:
            with open(self.path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise LedgerIOError(str(exc)) from None
        pos, k = 0, 0
        while pos < len(data):
            if pos + 4 > len(data):
                raise LedgerIOError("truncated length", k)
            (n,) = struct.unpack_from("<I", data, pos)
            body = data[pos + 4:pos + 4 + n]
            crc = data[pos + 4 + n:pos + 8 + n]
            if len(body) != n or len(crc) != 4 or n == 0:
                raise LedgerIOError("truncated record", k)
            if zlib.crc32(body) != struct.unpack("<I", crc)[0]:
                raise LedgerIOError("checksum mismatch", k)
            yield k, body[0], body[1:]
            pos += n + 8
            k += 1

    def index(self) -> list:
        try:
            with open(self.idx_path, "rb") as fh:
                raw = fh.read()
        except OSError:
            return []
        return list(struct.unpack(f"<{len(raw) // 8}Q", raw[:len(raw) - len(raw) % 8]))

    def load(self, verify_txs: bool = True, on_tx=None) -> Ledger:
        """Rebuild the state by folding records.  With ``verify_txs`` every
        transaction is re-verified against the state before it."""
        led = None
        for k, rtype, payload in self.records():
            try:
                if k == 0:
                    if rtype != REC_HEADER or not payload.startswith(MAGIC):
                        raise LedgerIOError("missing ledger header", 0)
                    led = Ledger.from_header(payload[len(MAGIC):])
                elif rtype == REC_PARTY:
                    led.read_party(payload)
                elif rtype == REC_GENESIS:
                    led.read_genesis(payload)
                elif rtype == REC_TX:
                    if led.columns is None:
                        raise LedgerIOError("transaction before genesis", k)
                    tx = Transaction.from_bytes(led.ring, led.params.kappa, payload)
                    if verify_txs:
                        v = led.verify_tx(tx)
                        if on_tx is not None:
                            on_tx(k, len(led.txs), v)
                        if not v:
                            raise LedgerIOError(f"transaction {len(led.txs)} fails {v.failed}", k)
                    led.apply(tx)
                else:
                    raise LedgerIOError(f"unknown record type {rtype}", k)
            except (ValueError, KeyError, TxRejected, LedgerError) as exc:
                raise LedgerIOError(str(exc), k) from None
        if led is None or led.columns is None:
            raise LedgerIOError("ledger file incomplete")
        if len(self.index()) != 2 + led.n_parties + len(led.txs):
            self.rebuild_index()
        return led

    def rebuild_index(self):
        recs = []
        for _, rtype, payload in self.records():
            recs.append(self.frame(rtype, payload))
        self._write_index(recs)


def create_tx(ledger: Ledger, values, sks: dict, rng: Rng | None = None, force: bool = False) -> Transaction:
    return ledger.create_tx(values, sks, rng, force)


def verify_tx(ledger: Ledger, tx) -> Verdict:
    return ledger.verify_tx(tx)


def append(ledger: Ledger, tx) -> int:
    return ledger.append(tx)


def check_balance(ledger: Ledger, sk: KeyPair, party: int, asset: int) -> int:
    return ledger.check_balance(sk, party, asset)


__all__ = [
    "create_tx", "verify_tx", "append", "check_balance",
    "Ledger", "LedgerFile", "Transaction", "Cell", "Participant", "setup", "LedgerError", "TxRejected",
    "LedgerIOError", "pp_seed",
]
