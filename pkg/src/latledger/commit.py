"""BDLOP / ABDLOP commitments, the four-row transaction commitment,
key generation, weak openings and sqrt(q) value extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ParamSet
from .ring import Ring, RingArray, get_ring, mod_pm, norm_inf, norm_l1, norm_l2_sq
from .sampling import Rng, chi_ring, uniform_ring

__all__ = [
    "PublicKeys",
    "expand_keys",
    "KeyPair",
    "keygen",
    "Commitment",
    "commit_tx",
    "commit_bdlop",
    "commit_abdlop",
    "sum_commitments",
    "extract",
    "ExtractionError",
    "extract_scalar",
    "decryption_norms",
    "tx_key_rows",
    "check_weak_opening",
    "OpeningCheck",
]


# -- public key material ------------------------------------------------------

@dataclass
class PublicKeys:
    """Every public matrix used by the commitments and proofs."""

    params: ParamSet
    seed: bytes
    A: RingArray            # kappa x m, transaction commitment
    B: RingArray            # m, value row
    A1: RingArray           # consistency proof, Ajtai part
    A2: RingArray
    B1: RingArray           # 1 x m
    Bc_proj: RingArray      # proj_polys x m
    Bc_mask: RingArray      # 1 x m
    A3: RingArray           # equality proof, kappa x key_len
    A4: RingArray           # kappa x m
    Beq_proj: RingArray
    Beq_mask: RingArray
    a_bin: RingArray        # asset proof rows, length m
    a_bin2: RingArray
    a_g: RingArray
    Aa: RingArray           # compact asset proof, kappa x (m + beta)
    Bc_y: RingArray
    Bc_g: RingArray
    Bc_bin: RingArray       # beta x (m + beta)
    Bc_g1: RingArray

    @property
    def ring(self) -> Ring:
        return get_ring(self.params)


def expand_keys(params: ParamSet, seed: bytes) -> PublicKeys:
    """Derive every public matrix from a 32-byte seed."""
    R = get_ring(params)
    root = Rng(b"latledger/keys" + bytes(seed))
    k, m, n = params.kappa, params.m, params.proj_polys
    mb = m + params.beta_bits

    def mat(name, *shape):
        return uniform_ring(R, root.spawn(name), *shape)

    return PublicKeys(
        params=params, seed=bytes(seed),
        A=mat("A", k, m), B=mat("B", m),
        A1=mat("A1", k, m), A2=mat("A2", k, m), B1=mat("B1", 1, m),
        Bc_proj=mat("Bc1", n, m), Bc_mask=mat("Bc2", 1, m),
        A3=mat("A3", k, params.key_len), A4=mat("A4", k, m),
        Beq_proj=mat("Beq1", n, m), Beq_mask=mat("Beq2", 1, m),
        a_bin=mat("abin", m), a_bin2=mat("abin2", m), a_g=mat("ag", m),
        Aa=mat("Aa", k, mb), Bc_y=mat("By2", n, mb), Bc_g=mat("Bg", 1, mb),
        Bc_bin=mat("Bbin", params.beta_bits, mb), Bc_g1=mat("Bg1", 1, mb),
    )


# -- keys ---------------------------------------------------------------------

@dataclass
class KeyPair:
    s1: RingArray
    e1: RingArray
    s2: RingArray
    e2: RingArray
    pk1: RingArray
    pk2: RingArray

    @property
    def pk(self):
        return (self.pk1, self.pk2)

    @property
    def secret(self) -> RingArray:
        """s1 || e1 || s2 || e2 as one vector."""
        return self.s1.ring.concat([self.s1, self.e1, self.s2, self.e2])


def keygen(keys: PublicKeys, rng: Rng) -> KeyPair:
    R, p = keys.ring, keys.params
    At = keys.A.T
    s1, e1 = chi_ring(R, rng, p.kappa), chi_ring(R, rng, p.m)
    s2, e2 = chi_ring(R, rng, p.kappa), chi_ring(R, rng, p.m)
    return KeyPair(s1, e1, s2, e2, At @ s1 + e1, At @ s2 + e2)


# -- commitments --------------------------------------------------------------

@dataclass
class Commitment:
    """Rows (com0, com1, com2, com3) of a transaction commitment."""

    com0: RingArray
    com1: RingArray
    com2: RingArray
    com3: RingArray
    index: tuple = field(default=None, compare=False)

    @property
    def rows(self):
        return (self.com0, self.com1, self.com2, self.com3)

    @property
    def msg_rows(self) -> RingArray:
        return self.com0.ring.stack([self.com1, self.com2, self.com3])

    def __add__(self, other: "Commitment") -> "Commitment":
        return Commitment(*(a + b for a, b in zip(self.rows, other.rows)))

    def __sub__(self, other: "Commitment") -> "Commitment":
        return Commitment(*(a - b for a, b in zip(self.rows, other.rows)))

    def __eq__(self, other):
        return all(a == b for a, b in zip(self.rows, other.rows))

    def to_bytes(self) -> bytes:
        out = []
        for row in self.rows:
            raw = row.to_bytes()
            out.append(len(raw).to_bytes(4, "little") + raw)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, ring: Ring, data: bytes, kappa: int) -> "Commitment":
        rows, pos = [], 0
        for shape in ((kappa,), (), (), ()):
            n = int.from_bytes(data[pos:pos + 4], "little")
            rows.append(RingArray.from_bytes(ring, data[pos + 4:pos + 4 + n], shape))
            pos += 4 + n
        if pos != len(data):
            raise ValueError("trailing bytes after commitment")
        return cls(*rows)


def tx_key_rows(keys: PublicKeys, pk) -> RingArray:
    """Stack pk1, pk2, B as the 3 x m message-row matrix."""
    return keys.ring.stack([pk[0], pk[1], keys.B])


def commit_tx(keys: PublicKeys, pk, v: RingArray, r: RingArray) -> Commitment:
    """(A r, pk1^T r + v, pk2^T r + sqrt(q) v, B^T r + v)."""
    p = keys.params
    if r.shape != (p.m,):
        raise ValueError(f"randomness must have {p.m} ring elements")
    if isinstance(v, int):
        v = keys.ring.const(v)
    return Commitment(keys.A @ r, pk[0] @ r + v, pk[1] @ r + v.scale(p.sqrt_q), keys.B @ r + v)


def commit_bdlop(A: RingArray, b_rows: RingArray, msgs: RingArray, r: RingArray):
    """(A r, b_i^T r + m_i)."""
    return A @ r, b_rows @ r + msgs


def commit_abdlop(A1: RingArray, A2: RingArray, b_rows: RingArray, r: RingArray, s: RingArray, msgs: RingArray):
    """(A1 r + A2 s, b_i^T s + m_i)."""
    return A1 @ r + A2 @ s, b_rows @ s + msgs


def sum_commitments(coms) -> Commitment:
    coms = list(coms)
    total = coms[0]
    for c in coms[1:]:
        total = total + c
    return total


# -- extraction ---------------------------------------------------------------

class ExtractionError(ValueError):
    """Raised when the decrypted rows are inconsistent or out of budget."""


def _centered_mod(x: int, m: int) -> int:
    """Representative of x mod m in [-m/2, m/2)."""
    r = x % m
    return r - m if r >= (m + 1) // 2 else r


def extract(com: Commitment, sk: KeyPair, params: ParamSet | None = None, noise_bound: int | None = None) -> RingArray:
    """Recover v from a transaction commitment with the owner's secret key."""
    R = com.com0.ring
    p = params or R.params
    q, sq = p.q, p.sqrt_q
    x1 = (com.com1 - sk.s1 @ com.com0).centered()
    x2 = (com.com2 - sk.s2 @ com.com0).centered()
    if noise_bound is None:
        noise_bound = p.column_budget * p.m * p.d
    inv_sq = pow(sq, -1, q)
    out = []
    for a, b in zip(x1.tolist(), x2.tolist()):
        a, b = int(a), int(b)
        # k cancels the e2^T r noise, leaving sqrt(q) v mod q
        k = _centered_mod(mod_pm(sq * a - b, q), sq)
        v = mod_pm((b + k) * inv_sq, q)
        # the first row must equal v up to the e1^T r noise
        if abs(mod_pm(a - v, q)) > noise_bound:
            raise ExtractionError("rows disagree beyond the noise budget")
        out.append(v)
    return R.from_ints(np.array(out, dtype=object))


def decryption_norms(com: Commitment, sk: KeyPair) -> tuple:
    """Infinity norms of com1 - s1^T com0 and com2 - s2^T com0.

    Applied to a difference of two commitments under one key, both stay far
    below sqrt(q)/4 exactly when the committed values agree."""
    return (norm_inf(com.com1 - sk.s1 @ com.com0), norm_inf(com.com2 - sk.s2 @ com.com0))


def extract_scalar(com: Commitment, sk: KeyPair, **kw) -> int:
    v = extract(com, sk, **kw)
    cent = v.centered()
    if any(int(x) for x in cent[1:]):
        raise ExtractionError("committed value is not a constant polynomial")
    return int(cent[0])


# -- weak openings ------------------------------------------------------------

@dataclass
class OpeningCheck:
    ok: bool
    failed: str | None = None

    def __bool__(self):
        return self.ok


def check_weak_opening(kind: str, A, b_rows, com0, com_msgs, cbar, r_star, m_star,
                       sigma_sq: int, omega: int, s_star=None, A2=None, sigma2_sq: int | None = None) -> OpeningCheck:
    """Check each condition of a weak opening, in order, naming the first failure.

    For ``bdlop`` the relation is A r* = com0 and b_i^T r* + m_i* = com_i.
    For ``abdlop`` it is A r* + A2 s* = com0 and b_i^T s* + m_i* = com_i.
    Norm budgets are (2 s sqrt(2 n d))^2 with n the vector length.
    """
    if kind not in ("bdlop", "abdlop"):
        raise ValueError(f"unknown opening kind {kind!r}")
    d = cbar.ring.d
    if norm_l1(cbar) > 2 * omega:
        return OpeningCheck(False, "challenge l1 bound")
    if not cbar.is_invertible():
        return OpeningCheck(False, "challenge invertibility")
    if norm_l2_sq(cbar * r_star) > 4 * sigma_sq * 2 * r_star.shape[0] * d:
        return OpeningCheck(False, "randomness norm")
    if kind == "abdlop":
        s2 = sigma_sq if sigma2_sq is None else sigma2_sq
        if norm_l2_sq(cbar * s_star) > 4 * s2 * 2 * s_star.shape[0] * d:
            return OpeningCheck(False, "message-randomness norm")
        if A @ r_star + A2 @ s_star != com0:
            return OpeningCheck(False, "ajtai equation")
        if b_rows @ s_star + m_star != com_msgs:
            return OpeningCheck(False, "message equation")
    else:
        if A @ r_star != com0:
            return OpeningCheck(False, "ajtai equation")
        if b_rows @ r_star + m_star != com_msgs:
            return OpeningCheck(False, "message equation")
    return OpeningCheck(True)
