import numpy as np
import pytest
from hypothesis import given, strategies as st

from latledger.commit import (
    Commitment, ExtractionError, check_weak_opening, commit_abdlop, commit_bdlop, commit_tx,
    decryption_norms, expand_keys, extract, extract_scalar, keygen, sum_commitments,
)
from latledger.ring import norm_inf
from latledger.sampling import Rng, chi_ring, sample_challenge, uniform_ring


def test_keygen_shape(keys, keypair):
    At = keys.A.T
    assert keypair.pk1 - At @ keypair.s1 == keypair.e1
    assert keypair.pk2 - At @ keypair.s2 == keypair.e2
    for part in (keypair.s1, keypair.e1, keypair.s2, keypair.e2):
        assert norm_inf(part) <= 1
    assert keypair.secret.shape == (2 * keys.params.kappa + 2 * keys.params.m,)


def test_keygen_deterministic(keys):
    a, b = keygen(keys, Rng(b"same")), keygen(keys, Rng(b"same"))
    assert a.pk1 == b.pk1 and a.s2 == b.s2


def test_key_expansion_deterministic(params):
    seed = bytes(range(32))
    assert expand_keys(params, seed).A == expand_keys(params, seed).A
    assert expand_keys(params, seed).A != expand_keys(params, bytes(32)).A


def test_zero_value_commitment(keys, keypair, ring):
    r = chi_ring(ring, Rng(0), keys.params.m)
    com = commit_tx(keys, keypair.pk, ring.const(0), r)
    assert com.com1 == keypair.pk1 @ r
    assert extract_scalar(com, keypair) == 0


def test_commit_rejects_wrong_randomness(keys, keypair, ring):
    with pytest.raises(ValueError):
        commit_tx(keys, keypair.pk, ring.const(1), chi_ring(ring, Rng(0), keys.params.m + 1))


def test_homomorphism(keys, keypair, ring):
    rng = Rng(1)
    r1, r2 = chi_ring(ring, rng, keys.params.m), chi_ring(ring, rng, keys.params.m)
    c1 = commit_tx(keys, keypair.pk, 1234, r1)
    c2 = commit_tx(keys, keypair.pk, -34, r2)
    assert c1 + c2 == commit_tx(keys, keypair.pk, 1200, r1 + r2)
    assert extract_scalar(c1 + c2, keypair) == 1200
    assert sum_commitments([c1]) == c1
    neg = commit_tx(keys, keypair.pk, 34, r2)
    assert extract_scalar(sum_commitments([c2, neg]), keypair) == 0


def test_extraction_roundtrip(keys, keypair, ring):
    rng = Rng(b"roundtrip")
    for _ in range(1000):
        v = int(rng.randbits(32))
        r = chi_ring(ring, rng, keys.params.m)
        assert extract_scalar(commit_tx(keys, keypair.pk, v, r), keypair) == v


@given(st.lists(st.integers(-2**31, 2**31), min_size=64, max_size=64), st.integers(0, 2**32))
def test_extraction_of_polynomials(keys, keypair, ring, vals, seed):
    v = ring.from_ints(np.array(vals))
    r = chi_ring(ring, Rng(seed), keys.params.m)
    assert extract(commit_tx(keys, keypair.pk, v, r), keypair) == v


def test_inconsistent_rows_detected(keys, keypair, ring):
    p = keys.params
    r = chi_ring(ring, Rng(2), p.m)
    com = commit_tx(keys, keypair.pk, 77, r)
    far = 10 * p.column_budget * p.m * p.d
    for bad in (Commitment(com.com0, com.com1 + ring.const(far), com.com2, com.com3),
                Commitment(com.com0, com.com1, com.com2 + ring.const(far * p.sqrt_q), com.com3)):
        with pytest.raises(ExtractionError):
            extract(bad, keypair)


def test_small_row_shift_is_absorbed(keys, keypair, ring):
    """A shift below the noise budget looks like key noise; only row two decides v."""
    r = chi_ring(ring, Rng(2), keys.params.m)
    com = commit_tx(keys, keypair.pk, 77, r)
    shifted = Commitment(com.com0, com.com1 + ring.const(1), com.com2, com.com3)
    assert extract_scalar(shifted, keypair) == 77
    with pytest.raises(ExtractionError):
        extract(shifted, keypair, noise_bound=0)


def test_full_range_values(keys, keypair, ring):
    q = keys.params.q
    r = chi_ring(ring, Rng(6), keys.params.m)
    for v in (keys.params.sqrt_q, 2**40 + 3, -(2**50), (q - 1) // 2):
        assert extract_scalar(commit_tx(keys, keypair.pk, v, r), keypair) == v


def test_wrong_key_does_not_extract(keys, keypair, other_keypair, ring):
    r = chi_ring(ring, Rng(3), keys.params.m)
    com = commit_tx(keys, keypair.pk, 5, r)
    with pytest.raises(ExtractionError):
        extract_scalar(com, other_keypair)


def test_unequal_values_are_norm_detectable(keys, keypair, ring):
    """Distinct values under one key leave decryption norms of at least sqrt(q)/4."""
    rng = Rng(b"equality")
    quarter = keys.params.sqrt_q // 4
    worst = None
    for _ in range(1000):
        v = int(rng.randbits(24))
        v2 = v + 1 + int(rng.randbits(24))
        r, r2 = chi_ring(ring, rng, keys.params.m), chi_ring(ring, rng, keys.params.m)
        diff = commit_tx(keys, keypair.pk, v, r) - commit_tx(keys, keypair.pk, v2, r2)
        m = max(decryption_norms(diff, keypair))
        worst = m if worst is None else min(worst, m)
    assert worst >= quarter
    same = commit_tx(keys, keypair.pk, 9, r) - commit_tx(keys, keypair.pk, 9, r2)
    assert max(decryption_norms(same, keypair)) < quarter


def test_commitment_bytes(keys, keypair, ring):
    com = commit_tx(keys, keypair.pk, 3, chi_ring(ring, Rng(4), keys.params.m))
    raw = com.to_bytes()
    assert Commitment.from_bytes(ring, raw, keys.params.kappa) == com
    with pytest.raises(ValueError):
        Commitment.from_bytes(ring, raw + b"\0", keys.params.kappa)


# -- BDLOP / ABDLOP and weak openings ----------------------------------------------------------

def test_bdlop_linearity(keys, ring):
    rng = Rng(5)
    r = chi_ring(ring, rng, keys.params.m)
    rows = keys.Bc_proj
    zero = ring.zeros(rows.shape[0])
    c0, cz = commit_bdlop(keys.A1, rows, zero, r)
    assert cz == rows @ r
    m1, m2 = uniform_ring(ring, rng, rows.shape[0]), uniform_ring(ring, rng, rows.shape[0])
    _, a = commit_bdlop(keys.A1, rows, m1, r)
    _, b = commit_bdlop(keys.A1, rows, m2, r)
    assert a + b - cz == commit_bdlop(keys.A1, rows, m1 + m2, r)[1]


def opening(keys, ring, rng, kind):
    p = keys.params
    r = chi_ring(ring, rng, p.m)
    msgs = uniform_ring(ring, rng, 1)
    c, c2 = sample_challenge(ring, rng), sample_challenge(ring, rng)
    cbar = c - c2
    if kind == "bdlop":
        com0, coms = commit_bdlop(keys.A, keys.B1, msgs, r)
        return dict(A=keys.A, b_rows=keys.B1, com0=com0, com_msgs=coms, cbar=cbar, r_star=r, m_star=msgs)
    s = chi_ring(ring, rng, p.m)
    com0, coms = commit_abdlop(keys.A1, keys.A2, keys.B1, r, s, msgs)
    return dict(A=keys.A1, A2=keys.A2, b_rows=keys.B1, com0=com0, com_msgs=coms, cbar=cbar,
                r_star=r, s_star=s, m_star=msgs)


@pytest.mark.parametrize("kind", ["bdlop", "abdlop"])
def test_weak_opening_bullets(keys, ring, kind):
    p = keys.params
    args = opening(keys, ring, Rng(kind.encode()), kind)
    common = dict(sigma_sq=p.sigma_sq["pob"], omega=p.omega)
    assert check_weak_opening(kind, **args, **common)
    bumped = args["m_star"] + ring.consts([1])
    assert check_weak_opening(kind, **dict(args, m_star=bumped), **common).failed == "message equation"
    scaled = args["r_star"].scale(p.q // 3)
    assert check_weak_opening(kind, **dict(args, r_star=scaled), **common).failed == "randomness norm"
    assert check_weak_opening(kind, **dict(args, cbar=ring.zeros()), **common).failed == "challenge invertibility"
    heavy = ring.from_ints(np.ones(ring.d, dtype=np.int64) * 3)
    assert check_weak_opening(kind, **dict(args, cbar=heavy), **common).failed == "challenge l1 bound"
    other = args["r_star"] + ring.from_ints(np.eye(1, p.m * ring.d, dtype=np.int64).reshape(p.m, ring.d))
    assert check_weak_opening(kind, **dict(args, r_star=other), **common).failed == "ajtai equation"
    if kind == "abdlop":
        big_s = args["s_star"].scale(p.q // 3)
        assert check_weak_opening(kind, **dict(args, s_star=big_s), **common).failed == "message-randomness norm"


def test_weak_opening_unknown_kind(keys, ring):
    args = opening(keys, ring, Rng(9), "bdlop")
    with pytest.raises(ValueError):
        check_weak_opening("pedersen", **args, sigma_sq=1, omega=keys.params.omega)
