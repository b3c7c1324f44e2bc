import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffsieve.gfpoly import NEG_INF, ONE, FieldConfig, PolyRing, enumerate_monic, euler_phi, is_prime, trace
from oracles import NaiveField, NaivePoly

FIELDS = [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (3, 2), (2, 3)]


@pytest.fixture(scope="module", params=FIELDS, ids=lambda f: f"p{f[0]}m{f[1]}")
def field(request):
    return FieldConfig(*request.param)


def test_is_prime():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_default_modulus_f4():
    F = FieldConfig(2, 2)
    assert F.h == (1, 1, 1)
    assert F.q == 4


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        FieldConfig(4)
    with pytest.raises(ValueError):
        FieldConfig(2, 2, h=(1, 0, 1))  # x^2 + 1 = (x + 1)^2
    with pytest.raises(ValueError):
        FieldConfig(2, 2, h=(1, 1))


def test_tables_match_naive(field):
    naive = NaiveField(field.p, field.h)
    for a, b in itertools.product(range(field.q), repeat=2):
        assert field.add(a, b) == naive.add(a, b)
        assert field.mul(a, b) == naive.mul(a, b)
    for a in range(field.q):
        assert field.trace(a) == naive.trace(a)


def test_trace_examples():
    assert trace(3, FieldConfig(5)) == 3
    F4 = FieldConfig(2, 2, h=(1, 1, 1))
    assert trace(F4.from_coords((0, 1)), F4) == 1
    assert trace((0, 1), F4) == 1
    assert trace(0, F4) == 0
    with pytest.raises(ValueError):
        trace((0, 1, 0), F4)


def test_trace_properties(field):
    p = field.p
    values = set()
    for x in range(field.q):
        values.add(field.trace(x))
        assert field.trace(field.pow(x, p)) == field.trace(x)
        for y in range(field.q):
            assert field.trace(field.add(x, y)) == (field.trace(x) + field.trace(y)) % p
    assert values == set(range(p))


def test_inverse(field):
    for a in range(1, field.q):
        assert field.mul(a, field.inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        field.inv(0)


def test_poly_examples():
    R = FieldConfig(2).ring
    t = (0, 1)
    assert R.gcd(t, t) == t
    assert R.lcm(t, (1, 1)) == (0, 1, 1)
    assert R.divmod((1, 0, 1), t) == ((0, 1), (1,))
    assert R.deg(()) == NEG_INF and NEG_INF < -10**9
    assert R.abs(()) == 0 and R.abs((1, 1)) == 2
    with pytest.raises(ZeroDivisionError):
        R.divmod((1,), ())
    with pytest.raises(ValueError):
        R.lcm((), t)
    assert R.gcd((), ()) == ()


def test_lcm_is_smallest_common_multiple():
    R = FieldConfig(3).ring
    monics = R.enumerate_monic_upto(4)
    for a, b in itertools.product(R.enumerate_monic_upto(2), repeat=2):
        expected = next(f for f in monics if not R.mod(f, a) and not R.mod(f, b))
        assert R.lcm(a, b) == expected


def test_enumerate_monic_examples():
    F2 = FieldConfig(2)
    assert enumerate_monic(0, F2) == [(1,)]
    assert enumerate_monic(1, F2) == [(0, 1), (1, 1)]
    assert len(enumerate_monic(2, FieldConfig(3))) == 9


def test_enumerate_monic_counts(field):
    R = field.ring
    for d in range(3 if field.q <= 4 else 2):
        polys = R.enumerate_monic(d)
        assert len(polys) == len(set(polys)) == field.q**d
        assert all(len(f) == d + 1 and f[-1] == 1 for f in polys)
        assert polys == R.enumerate_monic(d)
        # constant coefficient varies fastest
        assert [R.to_code(f) for f in polys] == sorted(R.to_code(f) for f in polys)


def test_euler_phi_examples():
    F2 = FieldConfig(2)
    assert euler_phi(ONE, F2) == 1
    assert euler_phi((0, 1), F2) == 1
    assert euler_phi((0, 0, 1), F2) == 2
    with pytest.raises(ValueError):
        euler_phi((), F2)


@pytest.mark.parametrize("pm", [(2, 1), (3, 1), (2, 2)])
def test_euler_phi_bruteforce(pm):
    F = FieldConfig(*pm)
    naive = NaivePoly(NaiveField(F.p, F.h))
    R = F.ring
    for f in R.enumerate_monic_upto(3 if F.q <= 3 else 2):
        brute = sum(1 for r in naive.all_below(len(f) - 1) if naive.is_unit_mod(r, list(f)))
        assert R.euler_phi(f) == brute
        assert len(R.units(f)) == brute


def test_is_irreducible_matches_root_free_count():
    R = FieldConfig(2).ring
    irr = [f for d in range(1, 5) for f in R.enumerate_monic(d) if R.is_irreducible(f)]
    # number of monic irreducibles over F_2 of degree 1..4
    assert [sum(len(f) - 1 == d for f in irr) for d in range(1, 5)] == [2, 1, 2, 3]


def _poly(q, max_deg=4):
    return st.lists(st.integers(0, q - 1), max_size=max_deg + 1)


@settings(max_examples=200, deadline=None)
@given(data=st.data(), pm=st.sampled_from([(2, 1), (3, 1), (5, 1), (2, 2), (3, 2)]))
def test_divmod_roundtrip(data, pm):
    F = FieldConfig(*pm)
    R = F.ring
    a = R.normalize(data.draw(_poly(F.q, 6)))
    b = R.normalize(data.draw(_poly(F.q, 3)))
    if not b:
        return
    quo, rem = R.divmod(a, b)
    assert R.add(R.mul(quo, b), rem) == a
    assert R.deg(rem) < R.deg(b)


@settings(max_examples=150, deadline=None)
@given(data=st.data(), pm=st.sampled_from([(2, 1), (3, 1), (2, 2)]))
def test_ring_axioms_against_naive(data, pm):
    F = FieldConfig(*pm)
    R = F.ring
    naive = NaivePoly(NaiveField(F.p, F.h))
    a, b, c = (R.normalize(data.draw(_poly(F.q))) for _ in range(3))
    assert list(R.mul(a, b)) == naive.mul(list(a), list(b))
    assert list(R.add(a, b)) == naive.add(list(a), list(b))
    assert R.mul(a, R.add(b, c)) == R.add(R.mul(a, b), R.mul(a, c))
    assert R.sub(R.add(a, b), b) == a
    if a or b:
        g = R.gcd(a, b)
        assert R.is_monic(g)
        assert not R.mod(a, g) and not R.mod(b, g)


def test_code_roundtrip():
    R = FieldConfig(3).ring
    for code in range(200):
        assert R.to_code(R.from_code(code)) == code


def test_format():
    assert FieldConfig(2).ring.format((1, 1, 1)) == "t^2+t+1"
    assert FieldConfig(3).ring.format((2, 0, 1)) == "t^2+2"
    assert FieldConfig(2).ring.format(()) == "0"


def test_ring_is_shared():
    F = FieldConfig(2)
    assert F.ring is F.ring
    assert isinstance(F.ring, PolyRing)
    assert FieldConfig(2) == F and hash(FieldConfig(2)) == hash(F)
