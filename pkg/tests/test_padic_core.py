from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hgsyn.errors import DomainError, UnsupportedExtension
from hgsyn.padic_core import (
    PrimeContext,
    extension_degree_for,
    log_unit,
    padic_log,
    primitive_polynomial,
    unramified_ring,
    vp,
)

PRIMES = [5, 7, 13]
fast = settings(max_examples=40, deadline=None)


def elements(p, d, M, unit=False):
    coord = st.integers(0, p ** M - 1)
    raw = coord if d == 1 else st.tuples(*[coord] * d)
    ring = unramified_ring(p, d, M)
    out = raw.map(lambda r: ring.make(r, 0, M))
    return out.filter(lambda x: x.is_unit()) if unit else out


@pytest.mark.parametrize("p,N", [(4, 2), (7, 4), (5, 3), (2, 1)])
def test_prime_context_rejects(p, N):
    with pytest.raises(DomainError):
        PrimeContext(p, N)


def test_prime_context_accepts_matrix():
    for p, N in [(5, 2), (7, 3), (13, 3), (13, 4)]:
        assert PrimeContext(p, N).ring.p == p


@pytest.mark.parametrize("d", [1, 2, 3])
@given(data=st.data())
@fast
def test_ring_axioms(d, data):
    p, M = 5, 8
    x = data.draw(elements(p, d, M))
    y = data.draw(elements(p, d, M))
    z = data.draw(elements(p, d, M))
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x - x == 0


@pytest.mark.parametrize("d", [1, 2])
@given(data=st.data())
@fast
def test_unit_inverse(d, data):
    x = data.draw(elements(7, d, 6, unit=True))
    assert x * (1 / x) == 1


def test_division_tracks_precision():
    R = unramified_ring(5, 1, 10)
    x = R(3) / R(25)
    assert x.valuation() == -2
    # 25 has relative precision 8, so the quotient is known to p^(-2+8)
    assert x.prec == 6
    assert (x * 25) == 3


def test_fraction_coercion():
    R = unramified_ring(7, 1, 6)
    x = R(Fraction(2, 3))
    assert x * 3 == 2
    y = R(Fraction(1, 49))
    assert y.valuation() == -2


@pytest.mark.parametrize("p,d", [(5, 1), (5, 2), (7, 2), (3, 3)])
def test_teichmuller_is_root_of_unity(p, d):
    R = unramified_ring(p, d, 8)
    t = R.gen()
    assert t ** (R.q - 1) == 1
    assert t.frobenius() == t ** p
    assert t.frobenius(d) == t


def test_teichmuller_lift_residue():
    R = unramified_ring(7, 1, 10)
    for c in range(1, 7):
        w = R.teichmuller(c)
        assert w.residue() == c
        assert w ** 6 == 1
    with pytest.raises(DomainError):
        R.teichmuller(0)


def test_primitive_polynomial_irreducible_order():
    # the residue field generator has order exactly p^d - 1
    for p, d in [(5, 2), (7, 2), (3, 3)]:
        R = unramified_ring(p, d, 4)
        g = R.gen()
        q1 = p ** d - 1
        for ell in {f for f in range(2, q1 + 1) if q1 % f == 0 and all(f % k for k in range(2, f))}:
            assert not g ** (q1 // ell) == 1
        assert len(primitive_polynomial(p, d)) == d + 1


def test_roots_of_unity_need_extension():
    R = unramified_ring(5, 1, 4)
    assert len(R.roots_of_unity(4)) == 4
    with pytest.raises(UnsupportedExtension):
        R.roots_of_unity(3)
    assert extension_degree_for(5, 3) == 2


@given(a=st.integers(1, 5 ** 6), b=st.integers(1, 5 ** 6))
@fast
def test_log_additive(a, b):
    R = unramified_ring(5, 1, 8)
    x = 1 + 5 * R(a)
    y = 1 + 5 * R(b)
    assert padic_log(x * y).agrees(padic_log(x) + padic_log(y), 7)


def test_log_unit_kills_roots_of_unity():
    R = unramified_ring(7, 2, 8)
    for z in R.roots_of_unity(8):
        assert log_unit(z).is_zero()


@pytest.mark.parametrize("d", [1, 2])
@given(data=st.data())
@fast
def test_log_unit_additive(d, data):
    x = data.draw(elements(5, d, 8, unit=True))
    y = data.draw(elements(5, d, 8, unit=True))
    assert log_unit(x * y).agrees(log_unit(x) + log_unit(y), 6)


def test_log_needs_one_unit():
    R = unramified_ring(5, 1, 6)
    with pytest.raises(DomainError):
        padic_log(R(2))


def test_vp():
    assert vp(250, 5) == 3
    assert vp(7, 5) == 0


def test_json_roundtrip_fields():
    R = unramified_ring(5, 2, 4)
    x = R((3, 4))
    j = x.to_json()
    assert j["d"] == 2 and j["prec"] == 4 and j["coeffs"] == ["3", "4"]
