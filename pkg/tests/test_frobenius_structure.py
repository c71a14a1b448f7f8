import pytest

from hgsyn.errors import ConsistencyError, DomainError, NonOrdinary
from hgsyn.frobenius_structure import (
    GUARD,
    conjugation_residual,
    determinant_residual,
    dwork_ratio,
    dwork_unit_root,
    eigen_component,
    first_failure_exponent,
    horizontality_check,
    horizontality_residual,
    is_ordinary,
    kappa_constants,
    tau_series_via_K,
    working_ring,
)
from hgsyn.padic_core import PrimeContext, unramified_ring
from hgsyn.series import SigmaLift

MATRIX = [(5, 2), (7, 3), (13, 3), (13, 4)]


@pytest.fixture(scope="module")
def comps():
    out = {}
    for p, N in [(5, 2), (7, 3)]:
        ctx = PrimeContext(p, N)
        ring = working_ring(ctx)
        for n in range(1, N):
            for shift in (0, 1):
                out[(p, N, n, shift)] = eigen_component(ctx, n, lift=SigmaLift.standard(ring, shift))
    return out


@pytest.mark.parametrize("p,N", MATRIX)
def test_kappa_forms_agree(p, N):
    ctx = PrimeContext(p, N)
    for n in range(1, N):
        k = kappa_constants(ctx, n)
        assert k.first_form.agrees(k.second_form, ctx.M - 4)
        assert str(N) in k.archimedean


def test_kappa_mutation_is_caught():
    ctx = PrimeContext(7, 3)
    with pytest.raises(ConsistencyError):
        kappa_constants(ctx, 1, mutate=1)


def test_kappa_symmetry():
    # the second form is real in the sense kappa_n = kappa_{N-n}
    ctx = PrimeContext(13, 4)
    assert kappa_constants(ctx, 1).value.agrees(kappa_constants(ctx, 3).value, ctx.M - GUARD)


def test_tau_tilde_matches_K_series(comps):
    for (p, N, n, shift), c in comps.items():
        diff = c.tau_tilde - tau_series_via_K(n, N, c.F.series)
        assert diff.is_zero_to(c.ctx.M - 4, 58)


def test_tilde_connection_is_lower_triangular(comps):
    for (p, N, n, shift), c in comps.items():
        if shift:
            continue
        for row in conjugation_residual(n, N, c.F.series):
            for e in row:
                assert e.deficit(c.ctx.M - 4, 58) == 0


def test_determinant(comps):
    for c in comps.values():
        assert determinant_residual(c).is_zero_to(c.ctx.M - 6, 40)


def test_horizontality(comps):
    for c in comps.values():
        assert horizontality_check(c, c.ctx.M - 6, 40) == 0


def test_horizontality_mutation_fails_early(comps):
    for c in comps.values():
        R = horizontality_residual(c, flip_f12=True)
        e = first_failure_exponent(R, c.ctx.M - 6)
        assert e is not None and e <= 3


def test_dwork_ratio_stabilises():
    ctx = PrimeContext(7, 3)
    R = unramified_ring(7, 1, 10)
    x = R.teichmuller(3)
    lo = dwork_ratio(ctx, 1, x, 3)
    hi = dwork_ratio(ctx, 1, x, 4)
    assert lo.agrees(hi, 3)


def test_dwork_unit_root_lift_independent():
    # a=1+p: a compatible point has sigma(alpha) = a alpha^p; for r=1 sigma is trivial
    ctx = PrimeContext(5, 2)
    R = unramified_ring(5, 1, 10)
    lam = R.teichmuller(2)
    v = dwork_unit_root(ctx, 1, lam, digits=4)
    assert v.is_unit()
    with pytest.raises(DomainError):
        dwork_unit_root(ctx, 1, lam, lift=SigmaLift(R(6)))


def test_dwork_domain():
    ctx = PrimeContext(5, 2)
    R = unramified_ring(5, 1, 8)
    with pytest.raises(DomainError):
        dwork_unit_root(ctx, 1, R(1))
    with pytest.raises(DomainError):
        dwork_unit_root(ctx, 2, R.teichmuller(2))


def test_non_ordinary_raises():
    # Legendre lambda = -1 is supersingular when p = 3 mod 4
    ctx = PrimeContext(7, 2)
    R = unramified_ring(7, 1, 8)
    pt = R.teichmuller(6)
    assert not is_ordinary(ctx, 1, pt)
    with pytest.raises(NonOrdinary):
        dwork_unit_root(ctx, 1, pt)
