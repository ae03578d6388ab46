"""Parameter sets for the ring, the commitments and every proof protocol.

A ``ParamSet`` is immutable.  Gaussian widths are kept as exact squared
integers per protocol role so that verifier norm checks never touch floats.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from sympy import isprime

__all__ = [
    "ParamSet",
    "Violation",
    "paper_params",
    "desk_params",
    "validate",
    "challenge_l1_bound",
    "find_prime",
    "primitive_root_2l",
    "load_params",
]

# Largest column (number of summed commitments) the extraction budget must cover.
DEFAULT_COLUMN_BUDGET = 64


@lru_cache(maxsize=None)
def challenge_l1_bound(d: int, log2_fail: int = 128) -> int:
    """Smallest w with Pr(||c||_1 > w) <= 2^-log2_fail when each coefficient
    is nonzero with probability 1/2 (exact binomial tail)."""
    tail = 0
    # walk down from the top of the support accumulating the tail mass
    for w in range(d, -1, -1):
        tail += math.comb(d, w)
        if Fraction(tail, 2**d) > Fraction(1, 2**log2_fail):
            return w
    return 0


def find_prime(start: int, modulus: int, residue: int, upward: bool = True) -> int:
    """First prime p >= start (or <= start when searching down) with p = residue mod modulus."""
    p = start - (start % modulus) + residue
    step = modulus if upward else -modulus
    if upward and p < start:
        p += modulus
    if not upward and p > start:
        p -= modulus
    while not isprime(p):
        p += step
    return p


def primitive_root_2l(q: int, l: int) -> int | None:
    """Smallest-generator primitive 2l-th root of unity mod q, or None."""
    if (q - 1) % (2 * l):
        return None
    e = (q - 1) // (2 * l)
    for x in range(2, 10_000):
        z = pow(x, e, q)
        if pow(z, l, q) == q - 1:
            return z
    return None


@dataclass(frozen=True)
class ParamSet:
    name: str
    q: int
    d: int
    l: int
    kappa: int
    lam: int
    n_msg: int = 3
    omega: int = 0
    sqrt_q: int = 0
    value_bits: int = 64
    beta_bits: int = 8
    rej_M: int = 3
    proj_rows: int = 256
    column_budget: int = DEFAULT_COLUMN_BUDGET
    # role -> exact squared standard deviation
    sigma_sq: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def m(self) -> int:
        """Randomness length (in ring elements) of a transaction commitment."""
        return self.kappa + self.lam + self.n_msg

    @property
    def key_len(self) -> int:
        """Length of the secret key vector s1 || e1 || s2 || e2."""
        return 2 * (self.kappa + self.m)

    @property
    def slot_deg(self) -> int:
        return self.d // self.l

    @property
    def proj_polys(self) -> int:
        """Ring elements needed to hold a projection image (proj_rows / d, at least 1)."""
        return max(1, self.proj_rows // self.d)

    @property
    def coeff_bytes(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def sigma(self, role: str) -> float:
        return math.sqrt(self.sigma_sq[role])

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ParamSet":
        raw = json.loads(text)
        return cls(**raw)


def _sigmas(q, d, kappa, lam, n_msg, omega, beta) -> dict:
    """Squared standard deviations, 11 * (bound on ||c * secret||) per role."""
    m = kappa + lam + n_msg
    key_len = 2 * (kappa + m)
    w2 = omega * omega
    k11 = 121
    return {
        # per summed cell; the balance prover scales by the number of cells
        "pob": k11 * w2 * m * d,
        "poc_1": k11 * w2 * m * d,
        "poc_2": k11 * w2 * m * d,
        "poc_3": k11 * 337 * m * d,
        "poe_1": k11 * w2 * key_len * d,
        "poe_2": k11 * w2 * m * d,
        "poe_3": k11 * 337 * 4 * m * m * d * d,
        "pokw_1": k11 * w2 * key_len * d,
        "pokw_2": k11 * w2 * m * d,
        "pokw_3": k11 * 337 * key_len * d,
        "poa": k11 * w2 * m * d,
        "poac_1": k11 * w2 * (m + beta) * d,
        "poac_2": k11 * 337 * beta * d,
        "poac_3": k11 * w2 * m * d,
        "poe2": k11 * w2 * m * d,
    }


def make_params(name, q, d, l, kappa, lam, value_bits, beta_bits, **kw) -> ParamSet:
    omega = challenge_l1_bound(d)
    return ParamSet(
        name=name, q=q, d=d, l=l, kappa=kappa, lam=lam, omega=omega,
        sqrt_q=_round_sqrt(q), value_bits=value_bits, beta_bits=beta_bits,
        sigma_sq=_sigmas(q, d, kappa, lam, 3, omega, beta_bits), **kw,
    )


def _round_sqrt(q: int) -> int:
    s = math.isqrt(q)
    # nearest integer: compare q with (s + 1/2)^2
    return s + 1 if 4 * q > (2 * s + 1) ** 2 else s


@lru_cache(maxsize=None)
def paper_params() -> ParamSet:
    d, l = 256, 128
    q = find_prime(2**100, 4 * l, 2 * l + 1)
    return make_params("paper", q, d, l, 16, 16, value_bits=64, beta_bits=16)


@lru_cache(maxsize=None)
def desk_params() -> ParamSet:
    d, l = 64, 32
    q = find_prime(2**61, 4 * l, 2 * l + 1)
    return make_params("desk", q, d, l, 1, 1, value_bits=24, beta_bits=8)


def load_params(source: str) -> ParamSet:
    """Resolve ``paper``, ``desk`` or a path to a JSON config."""
    if source == "paper":
        return paper_params()
    if source == "desk":
        return desk_params()
    with open(source) as fh:
        return ParamSet.from_json(fh.read())


@dataclass(frozen=True)
class Violation:
    invariant: str
    detail: str

    def __bool__(self):
        return False

    def __str__(self):
        return f"{self.invariant}: {self.detail}"


class _Ok:
    invariant = None

    def __bool__(self):
        return True

    def __repr__(self):
        return "ok"


OK = _Ok()


def validate(p: ParamSet):
    """Return ``OK`` or the first violated invariant as a ``Violation``."""
    d, l, q = p.d, p.l, p.q
    if d <= 0 or d & (d - 1):
        return Violation("degree not power of two", f"d={d}")
    if l <= 0 or l & (l - 1) or d % l:
        return Violation("splitting factor", f"l={l} must be a power of two dividing d")
    if q % 2 == 0 or not isprime(q):
        return Violation("modulus not prime", f"q={q}")
    if q % (4 * l) != 2 * l + 1:
        return Violation("splitting condition", f"q mod 4l = {q % (4 * l)}, want {2 * l + 1}")
    if primitive_root_2l(q, l) is None:
        return Violation("splitting condition", "no primitive 2l-th root of unity")
    if p.sqrt_q != _round_sqrt(q):
        return Violation("sqrt_q", f"{p.sqrt_q} is not the nearest integer to sqrt(q)")
    if p.n_msg != 3:
        return Violation("message slots", "transaction commitments use 3 slots")
    if p.omega != challenge_l1_bound(d):
        return Violation("omega", f"{p.omega} != {challenge_l1_bound(d)}")
    if p.rej_M < 1:
        return Violation("rejection bound", "M must be >= 1")
    want = _sigmas(q, d, p.kappa, p.lam, p.n_msg, p.omega, p.beta_bits)
    for role, s2 in want.items():
        if p.sigma_sq.get(role) != s2:
            return Violation("sigma formula", f"role {role}")
    if p.value_bits > l:
        return Violation("value width", "value_bits must fit in the l NTT slots")
    if p.beta_bits <= 0 or d % p.beta_bits:
        return Violation("compact width", "beta_bits must divide d")
    # worst-case extraction budget over a column of column_budget ternary vectors
    md = p.m * d
    e2r = p.column_budget * md
    if 2 * e2r >= p.sqrt_q:
        return Violation("extraction bound", "||e2^T r||_inf can reach sqrt(q)/2")
    if (p.sqrt_q + 1) * e2r > q // 2:
        return Violation("extraction bound", "||(sqrt(q) e1 - e2)^T r||_inf can exceed q/2")
    # equality gap: twice the projection bound must stay below sqrt(q)/4
    proj = p.proj_rows * p.sigma_sq["poe_3"]  # (sqrt(2k) * s3)^2
    if 4 * proj * 16 >= p.sqrt_q**2:
        return Violation("equality gap", "2 sqrt(2k) s3 >= sqrt(q)/4")
    return OK


def with_changes(p: ParamSet, **kw) -> ParamSet:
    """Copy with fields changed (no re-derivation, so validate() may object)."""
    return replace(p, **kw)
