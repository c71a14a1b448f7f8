import pytest
from hypothesis import given, settings, strategies as st

from hgsyn.errors import EvaluationDomainError, NotIntegrable
from hgsyn.padic_core import unramified_ring
from hgsyn.series import SigmaLift, TruncSeries, _kronecker

R = unramified_ring(5, 1, 10)
R2 = unramified_ring(5, 2, 8)
fast = settings(max_examples=30, deadline=None)


def series(ring, L, unit=False):
    coord = st.integers(0, ring.p ** ring.M - 1)
    raw = coord if ring.d == 1 else st.tuples(*[coord] * ring.d)

    def build(raws):
        cs = [ring.make(r, 0, ring.M) for r in raws]
        if unit and not cs[0].is_unit():
            cs[0] = cs[0] + 1
        return TruncSeries(ring, cs, L=L)

    return st.lists(raw, min_size=L, max_size=L).map(build).filter(
        lambda s: not unit or s[0].is_unit())


@given(a=series(R, 12), b=series(R, 12))
@fast
def test_product_rule(a, b):
    lhs = (a * b).derivative()
    rhs = a.derivative() * b + a * b.derivative()
    assert (lhs - rhs).is_zero_to(9, 10)


@given(a=series(R, 15, unit=True))
@fast
def test_inverse(a):
    one = a * a.invert()
    assert (one - TruncSeries.constant(R, 1)).is_zero_to(10, 15)


@given(a=series(R2, 10, unit=True))
@fast
def test_inverse_unramified(a):
    one = a * a.invert()
    assert (one - TruncSeries.constant(R2, 1)).is_zero_to(8, 10)


@given(a=series(R, 10))
@fast
def test_primitive_then_derivative(a):
    assert (a.primitive(3).derivative() - a).is_zero_to(8, 9)
    assert a.primitive(3)[0] == 3


@pytest.mark.parametrize("shift", [0, 1])
@given(data=st.data())
@fast
def test_sigma_chain_rule(shift, data):
    ring = R2
    f = data.draw(series(ring, 6))
    lift = SigmaLift.standard(unramified_ring(5, 1, 8), shift)
    L = 5 * 6
    lhs = f.sigma_substitute(lift, L=L).derivative()
    rhs = f.derivative().sigma_substitute(lift, L=L) * lift.dlam_sigma(ring)
    assert (lhs - rhs).is_zero_to(7, L - 2)


def test_sigma_substitute_truncation():
    f = TruncSeries(R, [1, 2, 3], L=3)
    g = f.sigma_substitute(SigmaLift.standard(R, 0))
    assert g.known() == 15
    assert g[5] == 2 and g[10] == 3 and g[1] == 0


def test_laurent_inverse():
    lam = TruncSeries(R, [0, 1, 1, 0, 0, 0], L=6)
    inv = lam.invert()
    assert inv.lo == -1
    assert (inv * lam - TruncSeries.constant(R, 1)).is_zero_to(10, 4)


def test_primitive_rejects_residue():
    s = TruncSeries(R, [1, 0, 0], lo=-1, L=4)
    with pytest.raises(NotIntegrable):
        s.primitive()


def test_geometric():
    g = TruncSeries.geometric(R, 8)
    one_minus = TruncSeries.polynomial(R, [1, -1])
    assert (g * one_minus - TruncSeries.constant(R, 1)).is_zero_to(10, 8)


def test_evaluate_domains():
    s = TruncSeries(R, [1] * 10, L=10)
    val = s.evaluate(R(5))
    assert val.prec == 10
    assert (val * (1 - R(5)) - 1).valuation() >= 10
    with pytest.raises(EvaluationDomainError):
        s.evaluate(R(2))
    # with a certified decay bound the unit disk is allowed
    t = TruncSeries(R, [R(5) ** k for k in range(10)], L=10)
    assert t.evaluate(R(2), decay=lambda L: L).prec == 10


def test_deficit():
    s = TruncSeries(R, [0, 25, 5], L=3)
    assert s.deficit(2) == 1
    assert s.deficit(2, upto=2) == 0


@given(a=st.lists(st.integers(0, 10 ** 9), min_size=1, max_size=20),
       b=st.lists(st.integers(0, 10 ** 9), min_size=1, max_size=20))
@fast
def test_kronecker_matches_schoolbook(a, b):
    n = len(a) + len(b) - 1
    naive = [0] * n
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            naive[i + j] += x * y
    assert _kronecker(a, b, n) == naive
