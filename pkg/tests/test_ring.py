import numpy as np
import pytest
from hypothesis import given, strategies as st

from latledger.params import desk_params, paper_params
from latledger.ring import (
    Ring, RingArray, _core, _pure, _wide, const_coeff_inner, get_ring, mod_pm, norm_inf, norm_l1,
    norm_l2, norm_l2_sq, schoolbook_mul, select_backend,
)
from latledger.sampling import Rng, sample_challenge, uniform_ring

DESK = desk_params()
PAPER = paper_params()
RD = get_ring(DESK)


def elems(ring, n=1):
    coeff = st.integers(min_value=0, max_value=ring.q - 1)
    return st.lists(coeff, min_size=ring.d * n, max_size=ring.d * n).map(
        lambda xs: RingArray(ring, np.array(xs, dtype=object).reshape((n, ring.d) if n > 1 else (ring.d,))
                             .astype(ring.dtype)))


def slot_mul_oracle(a_slot, b_slot, rho, q):
    """Schoolbook product in Z_q[X]/(X^s - rho)."""
    s = len(a_slot)
    out = [0] * s
    for i in range(s):
        for j in range(s):
            t = int(a_slot[i]) * int(b_slot[j])
            if i + j >= s:
                out[i + j - s] += t * rho
            else:
                out[i + j] += t
    return [x % q for x in out]


# -- centered reduction -------------------------------------------------------

def test_mod_pm_examples():
    assert mod_pm(7, 5) == 2
    assert mod_pm(3, 5) == -2
    assert mod_pm(0, DESK.q) == 0


@given(st.integers(), st.integers(min_value=1, max_value=10**30).map(lambda x: 2 * x + 1))
def test_mod_pm_property(r, q):
    x = mod_pm(r, q)
    assert (x - r) % q == 0 and -(q - 1) // 2 <= x <= (q - 1) // 2


# -- transforms and products ------------------------------------------------------

@given(elems(RD))
def test_ntt_roundtrip(a):
    assert RD.intt(RD.ntt(a)) == a


@given(elems(RD), elems(RD))
def test_ntt_is_slotwise(a, b):
    q = RD.q
    sa, sb, sab = RD.ntt(a), RD.ntt(b), RD.ntt(a * b)
    for j in range(RD.l):
        rho = pow(RD.zeta, 2 * j + 1, q)
        assert [int(x) for x in sab[j]] == slot_mul_oracle(sa[j], sb[j], rho, q)


@given(elems(RD))
def test_slot_definition(a):
    """Slot j is a mod (X^s - zeta^(2j+1)), reduced directly from the coefficients."""
    q, s = RD.q, RD.s
    slots = RD.ntt(a)
    for j in (0, 5, RD.l - 1):
        rho = pow(RD.zeta, 2 * j + 1, q)
        red = [0] * s
        for k, c in enumerate(a.c):
            red[k % s] = (red[k % s] + int(c) * pow(rho, k // s, q)) % q
        assert [int(x) for x in slots[j]] == red


@given(st.integers(min_value=0, max_value=DESK.q - 1))
def test_constant_has_equal_slots(k):
    slots = RD.ntt(RD.const(k))
    assert all(int(slots[j][0]) == k and not any(int(x) for x in slots[j][1:]) for j in range(RD.l))


@given(elems(RD), elems(RD))
def test_mul_matches_schoolbook_desk(a, b):
    assert list((a * b).c) == schoolbook_mul(a.c, b.c, RD.q)


@pytest.mark.parametrize("params", [DESK, PAPER], ids=["desk", "paper"])
def test_mul_matches_schoolbook_random(params):
    R, rng = get_ring(params), Rng(b"mul")
    for _ in range(10):
        a, b = uniform_ring(R, rng), uniform_ring(R, rng)
        assert [int(x) for x in (a * b).c] == schoolbook_mul(a.c, b.c, R.q)


def test_identities():
    a = uniform_ring(RD, Rng(1))
    assert a * RD.const(1) == a
    half = RD.monomial(RD.d // 2)
    assert half * half == RD.const(-1)
    assert int((half * half).c[0]) == RD.q - 1


@pytest.mark.parametrize("params", [DESK, PAPER], ids=["desk", "paper"])
def test_backends_agree(params):
    rng = Rng(b"backends")
    pure = Ring(params, backend=_pure)
    fast = get_ring(params)
    M, v = uniform_ring(pure, rng, 3, 4), uniform_ring(pure, rng, 4)
    a, b = uniform_ring(pure, rng, 4), uniform_ring(pure, rng, 4)
    for x, y in (((RingArray(pure, a.c) * RingArray(pure, b.c)).c, (RingArray(fast, a.c) * RingArray(fast, b.c)).c),
                 ((RingArray(pure, M.c) @ RingArray(pure, v.c)).c, (RingArray(fast, M.c) @ RingArray(fast, v.c)).c)):
        assert [int(t) for t in np.ravel(x)] == [int(t) for t in np.ravel(y)]


def test_backend_selection():
    if _core is None:
        pytest.skip("compiled kernels not built")
    assert select_backend(DESK.q) is _core
    assert select_backend(PAPER.q) is _wide
    assert select_backend((1 << 127) + 1) is _pure


def test_wide_rejects_even_modulus():
    if _wide is None:
        pytest.skip("compiled kernels not built")
    with pytest.raises(ValueError):
        _wide.ntt_forward(np.zeros((1, 4), dtype=object), np.zeros(1, dtype=object), 1 << 100, 1)


# -- automorphisms ----------------------------------------------------------------

@given(elems(RD))
def test_sigma_identity_and_involution(a):
    assert a.sigma(1) == a
    assert a.sigma(-1).sigma(-1) == a


def test_sigma_of_x():
    X = RD.monomial(1)
    assert X.sigma(-1) == RD.monomial(2 * RD.d - 1)
    assert X.sigma(-1) == -RD.monomial(RD.d - 1)


@given(elems(RD), elems(RD), st.sampled_from([3, 5, 7, -1, 127]), st.sampled_from([3, 9, -1, 65]))
def test_sigma_homomorphism_and_composition(a, b, i, j):
    assert (a * b).sigma(i) == a.sigma(i) * b.sigma(i)
    assert (a + b).sigma(i) == a.sigma(i) + b.sigma(i)
    assert a.sigma(j).sigma(i) == a.sigma((i * j) % (2 * RD.d))


@pytest.mark.parametrize("i", [0, 2, 64, -2])
def test_sigma_rejects_non_units(i):
    with pytest.raises(ValueError):
        RD.const(1).sigma(i)


# -- constant-coefficient inner product and slot average ---------------------------

def test_const_coeff_inner_examples():
    e1 = RD.consts([1, 0, 0])
    assert const_coeff_inner(e1, e1) == 1
    y = uniform_ring(RD, Rng(4), 3)
    assert const_coeff_inner(RD.zeros(3), y) == 0
    with pytest.raises(ValueError):
        const_coeff_inner(RD.zeros(2), y)


@given(elems(RD, 3), elems(RD, 3))
def test_const_coeff_inner_is_dot(x, y):
    direct = sum(int(a) * int(b) for a, b in zip(x.c.ravel(), y.c.ravel())) % RD.q
    assert const_coeff_inner(x, y) == direct


@given(elems(RD))
def test_ntt_average_is_truncation(a):
    avg = a.ntt_average()
    assert [int(x) for x in avg.c[:RD.s]] == [int(x) for x in a.c[:RD.s]]
    assert not any(int(x) for x in avg.c[RD.s:])


def test_ntt_average_examples():
    one = np.zeros(RD.d, dtype=np.int64)
    one[0] = 1
    one[RD.s:] = 7  # high coefficients do not matter
    assert RD.from_ints(one).ntt_average() == RD.const(1)
    assert RD.zeros().ntt_average() == RD.zeros()


# -- norms -----------------------------------------------------------------------------

def test_norm_examples():
    z = RD.zeros(3)
    assert norm_inf(z) == norm_l1(z) == norm_l2_sq(z) == 0
    assert norm_inf(RD.const(RD.q - 1)) == 1


@given(elems(RD, 2))
def test_l2_direct(w):
    half = (RD.q - 1) // 2
    cent = [int(x) - RD.q if int(x) > half else int(x) for x in w.c.ravel()]
    assert norm_l2_sq(w) == sum(x * x for x in cent)
    assert abs(norm_l2(w) ** 2 - norm_l2_sq(w)) <= 1e-9 * max(1, norm_l2_sq(w))


@given(st.lists(st.integers(-1000, 1000), min_size=64, max_size=64),
       st.lists(st.integers(-1000, 1000), min_size=64, max_size=64))
def test_triangle_inequalities(x, y):
    a, b = RD.from_ints(np.array(x)), RD.from_ints(np.array(y))
    assert norm_inf(a + b) <= norm_inf(a) + norm_inf(b)
    assert norm_l1(a + b) <= norm_l1(a) + norm_l1(b)
    assert norm_l2(a + b) <= norm_l2(a) + norm_l2(b) + 1e-9


@given(st.lists(st.integers(-1000, 1000), min_size=64, max_size=64), st.integers(0, 2**32))
def test_challenge_product_bound(x, seed):
    a = RD.from_ints(np.array(x))
    c = sample_challenge(RD, Rng(seed))
    assert norm_inf(c * a) <= norm_l1(c) * norm_inf(a)


# -- invertibility ---------------------------------------------------------------------

def test_invertibility_examples():
    assert RD.const(1).is_invertible()
    c = np.zeros(RD.d, dtype=object)
    c[RD.s] = 1
    c[0] = (-RD.zeta) % RD.q
    bad = RD.from_ints(c)
    assert not bad.is_invertible()
    with pytest.raises(ZeroDivisionError):
        bad.inverse()


@given(elems(RD))
def test_inverse(a):
    if a.is_invertible():
        assert a * a.inverse() == RD.const(1)


@pytest.mark.parametrize("params", [DESK, PAPER], ids=["desk", "paper"])
def test_inverse_wide(params):
    R = get_ring(params)
    a = uniform_ring(R, Rng(b"inv"))
    assert a * a.inverse() == R.const(1)


# -- encoding -------------------------------------------------------------------------

@pytest.mark.parametrize("params", [DESK, PAPER], ids=["desk", "paper"])
def test_bytes_roundtrip(params):
    R = get_ring(params)
    a = uniform_ring(R, Rng(b"bytes"), 3)
    raw = a.to_bytes()
    assert len(raw) == 3 * R.d * params.coeff_bytes
    assert RingArray.from_bytes(R, raw, (3,)) == a
    small = R.from_ints(np.array([[-1, 0, 1] * (R.d // 3) + [1] * (R.d % 3)]))
    assert RingArray.from_bytes(R, small.to_bytes(signed=True), (1,), signed=True) == small
    with pytest.raises(ValueError):
        RingArray.from_bytes(R, raw[:-1], (3,))
