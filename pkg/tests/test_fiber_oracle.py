import random

import pytest
from hypothesis import given, settings, strategies as st

from hgsyn.errors import DomainError, ResidueError
from hgsyn.fiber_oracle import (
    ConstantFunction,
    DaggerOneForm,
    Fiber,
    H1Function,
    H2Function,
    _kron,
    _pdivmod,
    _peval,
    _series_inv,
    _taylor_shift,
    basis_forms,
    embed_vector,
    fiber_regulator,
    reduce_component,
    reduce_to_basis,
    reduction_loss,
    syntomic_one_form,
)
from hgsyn.padic_core import unramified_ring

P = 5 ** 8
polys = st.lists(st.integers(0, P - 1), min_size=1, max_size=12)


def naive_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % P
    return out


def norm(a):
    a = [c % P for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


@given(a=polys, b=polys)
@settings(max_examples=40, deadline=None)
def test_kron_matches_naive(a, b):
    assert norm(_kron(a, b, P)) == norm(naive_mul(a, b))


@given(a=polys, b=polys)
@settings(max_examples=40, deadline=None)
def test_divmod(a, b):
    b = list(b[:-1]) + [1]  # monic divisor
    q, r = _pdivmod(a, b, P)
    assert len(norm(r)) < len(b)
    recon = [0] * max(len(a), len(naive_mul(q or [0], b)))
    for i, c in enumerate(naive_mul(q or [0], b)):
        recon[i] += c
    for i, c in enumerate(r):
        recon[i] += c
    assert norm(recon) == norm(a)


@given(a=polys, s=st.integers(0, P - 1), x=st.integers(0, P - 1))
@settings(max_examples=40, deadline=None)
def test_taylor_shift_is_substitution(a, s, x):
    shifted = _taylor_shift(a, s, len(a), P)
    assert _peval(shifted, x, P) == _peval(a, (x + s) % P, P)


@given(a=polys)
@settings(max_examples=40, deadline=None)
def test_series_inverse(a):
    a = [1 + 5 * a[0]] + list(a[1:])
    inv = _series_inv(a, 10, P)
    prod = naive_mul(a, inv)[:10]
    assert norm(prod) == [1]


@pytest.fixture(scope="module")
def fb():
    R = unramified_ring(5, 1, 12)
    return Fiber(5, 2, R.teichmuller(2).lift())


def random_element(fb, rng, deg=3, pole=2):
    comps = []
    for j in range(fb.N):
        num = [rng.randrange(fb.P) for _ in range(deg + 1)]
        exps = tuple(rng.randrange(pole + 1) for _ in range(3)) + (0,)
        comps.append(fb.rf(num, exps))
    return fb.element(comps)


def is_zero_form(form):
    fb = form.fiber
    return all(not fb.rf_add(c, fb.rf([])).num for c in form.comps)


def test_leibniz(fb):
    rng = random.Random(5)
    u = random_element(fb, rng)
    v = random_element(fb, rng)
    lhs = (u * v).differential()
    rhs = DaggerOneForm(fb, (u * v.differential() + v * u.differential()).comps)
    assert is_zero_form(lhs - rhs)


def test_exact_forms_reduce_to_zero(fb):
    rng = random.Random(11)
    for _ in range(3):
        vec = reduce_to_basis(fb, random_element(fb, rng).differential())
        for A, B in vec.coords.values():
            assert A.valuation() >= vec.precision and B.valuation() >= vec.precision


def test_basis_vectors(fb):
    om, et = basis_forms(fb, 1)
    for g, want in ((om, (1, 0)), (et, (0, 1))):
        form = DaggerOneForm(fb, [fb.rf([]), fb.mul_f_power(g, -1)])
        A, B = reduce_to_basis(fb, form).coords[1]
        assert (A - want[0]).valuation() >= 6 and (B - want[1]).valuation() >= 6


def test_x_omega(fb):
    # derived by hand from d(y) and d(y (1-x)) in the N = 2 ring
    form = DaggerOneForm(fb, [fb.rf([]), fb.mul_f_power(fb.rf([0, 1]), -1)])
    A, B = reduce_to_basis(fb, form).coords[1]
    alpha = fb.ring(fb.alpha)
    assert (A - 1).valuation() >= 6
    assert (B - (alpha - 1)).valuation() >= 6


def test_embed_is_idempotent():
    vec = fiber_regulator(5, 2, 2)
    R = unramified_ring(5, 1, 12)
    fb = Fiber(5, 2, R.teichmuller(2).lift())
    again = reduce_to_basis(fb, embed_vector(fb, vec))
    for n, (A, B) in vec.coords.items():
        A2, B2 = again.coords[n]
        assert (A - A2).valuation() >= 6 and (B - B2).valuation() >= 6


def test_claimed_precision_is_honest(fb):
    # reducing the same monomial with many more guard digits must agree to the
    # precision the reduction claims
    big = Fiber(5, 2, fb.alpha, M=fb.M, guard=14)
    for i in range(3):
        for m in range(0, 6):
            for k in range(0, 3):
                exps = [0, 0, 0, 0]
                exps[i] = m
                lo = reduce_component(fb, fb.rf([0] * k + [1], exps), 1)
                hi = reduce_component(big, big.rf([0] * k + [1], exps), 1)
                for (x, pr), (y, _) in zip(lo.residues, hi.residues):
                    a = fb.ring.make(x, fb.K, pr)
                    b = big.ring.make(y, big.K, pr)
                    assert (fb.ring(b) - a).valuation() >= min(pr, lo.precision)


def test_reduction_loss_values():
    assert reduction_loss(5, 2, 1) == 0
    assert reduction_loss(5, 2, 3) == 2
    assert reduction_loss(7, 3, 2) == 1


def test_frobenius_root_residual(fb):
    assert fb.frobenius_root_residual() >= fb.K


def test_steinberg_degenerate_symbol(fb):
    R = fb.ring
    mu = R.roots_of_unity(2)
    h1 = H1Function(mu[0].lift(), mu[1].lift())
    for h in (h1, H2Function()):
        vec = reduce_to_basis(fb, syntomic_one_form(fb, h, h))
        for A, B in vec.coords.values():
            assert A.valuation() >= fb.M and B.valuation() >= fb.M


def test_constant_symbols(fb):
    c = ConstantFunction(2)
    vec = reduce_to_basis(fb, syntomic_one_form(fb, c, H2Function()), strict=False)
    for A, B in vec.coords.values():
        assert A.valuation() >= fb.M and B.valuation() >= fb.M
    assert all(r.valuation() >= fb.M for r in vec.residues[1])
    mu = fb.ring.roots_of_unity(2)
    # {c, h_1} has a nontrivial tame symbol at the zeros of h_1
    with pytest.raises(ResidueError):
        reduce_to_basis(fb, syntomic_one_form(fb, c, H1Function(mu[0].lift(), mu[1].lift())))


@pytest.mark.parametrize("alpha", [2, 3])
def test_antisymmetry_and_lift(alpha):
    M = 6
    base = fiber_regulator(5, 2, alpha, M=M)
    swap = fiber_regulator(5, 2, alpha, M=M, order="h2h1")
    lifted = fiber_regulator(5, 2, alpha, a=6, M=M)
    for n in base.coords:
        for i in (0, 1):
            assert (base.coords[n][i] + swap.coords[n][i]).valuation() >= M - 2
            assert (base.coords[n][i] - lifted.coords[n][i]).valuation() >= M - 2


def test_guard_stability():
    lo = fiber_regulator(5, 2, 2, guard=6)
    hi = fiber_regulator(5, 2, 2, guard=10)
    for i in (0, 1):
        assert (lo.coords[1][i] - hi.coords[1][i]).valuation() >= 6


def test_regulator_json_and_domain():
    vec = fiber_regulator(5, 2, 3)
    j = vec.to_json()
    assert set(j["coords"]) == {"1"} and j["alpha"] == 3
    with pytest.raises(DomainError):
        fiber_regulator(5, 2, 3, zeta1=1, zeta2=1)
    with pytest.raises(DomainError):
        fiber_regulator(5, 2, 1)
    with pytest.raises(DomainError):
        Fiber(5, 3, 2)


@pytest.mark.slow
def test_n3_equivariance():
    base = fiber_regulator(7, 3, 2, 0, 1)
    rot = fiber_regulator(7, 3, 2, 1, 2)
    zeta = unramified_ring(7, 1, 12).roots_of_unity(3)[1]
    for n in (1, 2):
        for i in (0, 1):
            assert (rot.coords[n][i] - base.coords[n][i] * zeta ** n).valuation() >= 4
