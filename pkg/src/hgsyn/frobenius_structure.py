"""Frobenius structure on the eigencomponents H^1(n).

Row convention throughout: a basis change or connection is recorded as
(omega eta) -> (omega eta) * Matrix, so

    nabla(omega eta) = (omega eta) C dlambda,
    Phi(omega eta)   = (omega eta) Fmat,

and horizontality reads Fmat' + C Fmat - Fmat C(lambda^sigma) dlambda^sigma/dlambda = 0.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConsistencyError, DomainError, NonOrdinary, NotIntegrable
from .hg_functions import DEFAULT_L, GUARD, HGSeries, build_hg, padic_log, pochhammer_units
from .padic_core import PadicScalar, log_unit, unramified_ring
from .series import SigmaLift, TruncSeries


def working_ring(ctx, guard=GUARD):
    """Z_p with guard digits on top of the context precision."""
    return unramified_ring(ctx.p, 1, ctx.M + guard)


def frobenius_sign(ctx, n, r=1):
    """(-1)^(r n (p-1)/N)."""
    return -1 if (r * n * (ctx.p - 1) // ctx.N) % 2 else 1


# ---------------------------------------------------------------------------
# kappa


@dataclass
class KappaConstants:
    n: int
    archimedean: str
    first_form: PadicScalar
    second_form: PadicScalar
    summands: list

    @property
    def value(self):
        return self.second_form


def kappa_constants(ctx, n, ring=None, check=True, mutate=0):
    """kappa_n^(p) from both closed forms; they must agree.

    first:  2 log(N) - 1/2 sum_{eps != 1} (eps^n + eps^-n) log((1-eps)(1-eps^-1))
    second: 2 sum_{eps != 1} (1 - eps^-n) log(1-eps)
    with log the branch-free log^(p).  `mutate` adds mutate*p to the first form
    (used to exercise the self-check).
    """
    ring = ring or working_ring(ctx)
    N = ctx.N
    mu = ring.roots_of_unity(N)[1:]
    first = 2 * log_unit(ring(N))
    second = ring.zero()
    summands = []
    for eps in mu:
        inv = 1 / eps
        first = first - (eps ** n + inv ** n) * log_unit((1 - eps) * (1 - inv)) / 2
        term = 2 * (1 - inv ** n) * log_unit(1 - eps)
        summands.append(term)
        second = second + term
    first = first + mutate * ctx.p
    arch = (f"kappa_{n} = 2 log {N} - 1/2 sum_(eps in mu_{N}, eps != 1) "
            f"(eps^{n} + eps^-{n}) log|1 - eps|^2")
    out = KappaConstants(n, arch, first, second, summands)
    if check and not first.agrees(second, ctx.M - GUARD):
        raise ConsistencyError(f"kappa forms disagree: {first} vs {second}")
    return out


# ---------------------------------------------------------------------------
# tau


def tau_tilde(F):
    """Primitive of (1/lambda)(1 - 1/((1-lambda) F^2)) vanishing at 0."""
    ring = F.ring
    L = F.known()
    g = TruncSeries.geometric(ring, L) * (F * F).invert()
    inner = TruncSeries.constant(ring, 1) - g
    if not inner[0].is_zero():
        raise NotIntegrable("1 - 1/((1-lambda)F^2) does not vanish at 0")
    return inner.shift(-1).primitive(0)


def K_coefficient(n, N, i):
    """K_{n,i} = sum_{k=1}^i (2/k - 1/(k - n/N) - 1/(k - 1 + n/N))."""
    a = Fraction(n, N)
    return sum((Fraction(2, k) - 1 / (k - a) - 1 / (k - 1 + a) for k in range(1, i + 1)),
               Fraction(0))


def tau_series_via_K(n, N, F):
    """(1/F) sum_{i>=1} K_{n,i} (a)_i (1-a)_i / i!^2 lambda^i."""
    ring = F.ring
    L = F.known()
    a = Fraction(n, N)
    c = Fraction(1)
    K = Fraction(0)
    cs = [ring.zero()]
    for i in range(1, L):
        c = c * (a + i - 1) * (i - a) / (i * i)
        K += Fraction(2, i) - 1 / (i - a) - 1 / (i - 1 + a)
        cs.append(ring(K * c))
    return TruncSeries(ring, cs, L=L) * F.invert()


def tau_sigma(tt, kappa_p, lift):
    """-log^sigma(lambda) + kappa + tau~(lambda) - p^-1 tau~(lambda^sigma)."""
    ring = tt.ring
    p = ring.p
    L = tt.known()
    log_a = padic_log(ring(lift.a)) / p
    shifted = tt.sigma_substitute(lift, L=L)
    return tt + (log_a + ring(kappa_p)) - shifted / p


# ---------------------------------------------------------------------------
# connection matrices


def _mat_mul(A, B):
    return [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)]


def _mat_add(A, B):
    return [[A[i][j] + B[i][j] for j in range(2)] for i in range(2)]


def _mat_sub(A, B):
    return [[A[i][j] - B[i][j] for j in range(2)] for i in range(2)]


def _mat_map(A, f):
    return [[f(A[i][j]) for j in range(2)] for i in range(2)]


def lam_minus_lam2(ring):
    return TruncSeries.polynomial(ring, [0, 1, -1])


def inv_lam_minus_lam2(ring, L):
    """1/(lambda - lambda^2) = lambda^-1 (1 - lambda)^-1, known to O(lambda^(L-1))."""
    return TruncSeries.geometric(ring, L).shift(-1)


def gauss_manin_matrix(n, N, ring, L):
    """C with nabla(omega eta) = (omega eta) C dlambda."""
    a = Fraction(n, N)
    inv = inv_lam_minus_lam2(ring, L)
    zero = TruncSeries.constant(ring, 0)
    return [[zero, inv.scale(ring(1 - a))],
            [TruncSeries.constant(ring, ring(a)), inv * TruncSeries.polynomial(ring, [-1, 2])]]


def tilde_basis_change(n, N, F):
    """T with (omega~ eta~) = (omega eta) T."""
    ring = F.ring
    a = Fraction(n, N)
    ll = lam_minus_lam2(ring)
    zero = TruncSeries.constant(ring, 0)
    return [[F.invert(), ll * F.derivative()],
            [zero, (ll * F).scale(ring(-a))]]


def tilde_gauss_manin_matrix(F):
    ring = F.ring
    L = F.known()
    zero = TruncSeries.constant(ring, 0)
    low = -(inv_lam_minus_lam2(ring, L) * (F * F).invert())
    return [[zero, zero], [low, zero]]


def conjugation_residual(n, N, F):
    """T C~ - (C T + T'), which vanishes when both connection matrices agree."""
    ring = F.ring
    L = F.known()
    C = gauss_manin_matrix(n, N, ring, L)
    T = tilde_basis_change(n, N, F)
    Ct = tilde_gauss_manin_matrix(F)
    dT = _mat_map(T, lambda s: s.derivative())
    return _mat_sub(_mat_mul(T, Ct), _mat_add(_mat_mul(C, T), dT))


# ---------------------------------------------------------------------------


@dataclass
class EigenComponent:
    ctx: object
    n: int
    lift: SigmaLift
    F: HGSeries
    tau_tilde: TruncSeries
    kappa: KappaConstants
    tau_sigma: TruncSeries
    gm_matrix: list
    gm_tilde: list
    frob_matrix: list
    entries: dict = field(repr=False)

    @property
    def ring(self):
        return self.F.ring

    @property
    def sign(self):
        return frobenius_sign(self.ctx, self.n)


def eigen_component(ctx, n, lift=None, L=DEFAULT_L, guard=GUARD, kappa_mutate=0):
    ring = working_ring(ctx, guard)
    lift = lift or SigmaLift.standard(ring, 0)
    lift = SigmaLift(ring(lift.a))
    hg = build_hg(ctx, n, L=L, ring=ring)
    tt = tau_tilde(hg.series)
    kap = kappa_constants(ctx, n, ring=ring, check=False, mutate=kappa_mutate)
    ts = tau_sigma(tt, kap.value, lift)
    entries = frobenius_entries(ctx, n, hg.series, ts, lift)
    p = ctx.p
    fm = [[entries["F11"].scale(p), entries["F12"]],
          [entries["F21"].scale(p), entries["F22"]]]
    C = gauss_manin_matrix(n, ctx.N, ring, L)
    return EigenComponent(ctx, n, lift, hg, tt, kap, ts, C, tilde_gauss_manin_matrix(hg.series),
                          fm, entries)


def frobenius_entries(ctx, n, F, ts, lift, flip_f12=False):
    """F11, F12, F21, F22 of Phi on H^1(n) in the basis omega_n, eta_n."""
    ring = F.ring
    p, N = ctx.p, ctx.N
    L = F.known()
    a = Fraction(n, N)
    s = frobenius_sign(ctx, n)
    ll = lam_minus_lam2(ring)
    dF = F.derivative()
    Fs = F.sigma_substitute(lift, L=L)
    dFs = dF.sigma_substitute(lift, L=L)
    Finv = F.invert()
    Fsinv = Fs.invert()
    lam_s = lift.lam_sigma(ring)
    ll_s = lam_s - lam_s * lam_s
    # (lambda - lambda^2)/(lambda^s - lambda^s^2) = lambda^(1-p) (1-lambda) / (a (1 - a lambda^p))
    ratio = ll_s.shift(-p).invert(L) * ll.shift(-p)
    F11 = (Fs * Finv - ll * dF * Fs * ts).scale(s)
    F21 = (ll * F * Fs * ts).scale(ring(a) * s)
    lead = (dFs * Fsinv).scale(p)
    F12 = (lead * F11 - (ratio * dF * Fsinv).scale(s)).scale(ring(Fraction(N, n)))
    F22 = (lead * F21 + (ratio * F * Fsinv).scale(ring(a) * s)).scale(ring(Fraction(N, n)))
    if flip_f12:
        F12 = -F12
    return {"F11": F11, "F12": F12, "F21": F21, "F22": F22, "ratio": ratio}


def determinant_residual(comp):
    e = comp.entries
    return e["F11"] * e["F22"] - e["F12"] * e["F21"] - e["ratio"]


def horizontality_residual(comp, flip_f12=False):
    """The 2x2 residual of Fmat' + C Fmat - Fmat C^sigma (dlambda^sigma/dlambda)."""
    ring = comp.ring
    p = comp.ctx.p
    if flip_f12:
        e = frobenius_entries(comp.ctx, comp.n, comp.F.series, comp.tau_sigma, comp.lift,
                              flip_f12=True)
        fm = [[e["F11"].scale(p), e["F12"]], [e["F21"].scale(p), e["F22"]]]
    else:
        fm = comp.frob_matrix
    L = comp.F.series.known()
    C = comp.gm_matrix
    dls = comp.lift.dlam_sigma(ring)
    Cs = _mat_map(C, lambda s: s.sigma_substitute(comp.lift, L=L) * dls)
    dfm = _mat_map(fm, lambda s: s.derivative())
    return _mat_sub(_mat_add(dfm, _mat_mul(C, fm)), _mat_mul(fm, Cs))


def horizontality_check(comp, digits, upto, flip_f12=False):
    """Largest valuation deficit below lambda^upto (0 means the identity holds)."""
    R = horizontality_residual(comp, flip_f12)
    return max(R[i][j].deficit(digits, upto) for i in range(2) for j in range(2))


def first_failure_exponent(matrix, digits):
    """Smallest exponent where some entry has a coefficient not divisible by p^digits."""
    best = None
    for row in matrix:
        for s in row:
            for k, c in s.items():
                if min(c.valuation(), c.prec) < digits:
                    best = k if best is None else min(best, k)
                    break
    return best


# ---------------------------------------------------------------------------
# Dwork unit roots


def _horner_raw(ring, coeffs, x_raw, K):
    """Evaluate an integer polynomial at a raw Z_q value mod p^K."""
    mod = ring.p ** K
    if ring.d == 1:
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x_raw + c) % mod
        return acc
    acc = (0,) * ring.d
    for c in reversed(coeffs):
        acc = ring._rmul(acc, x_raw, K)
        acc = ((acc[0] + c) % mod,) + tuple(v % mod for v in acc[1:])
    return acc


def hg_truncation_coeffs(n, N, count, p, K):
    mod = p ** K
    return [u * pow(p, v, mod) % mod if v < K else 0
            for v, u in pochhammer_units(n, N, count, p, K)]


def is_ordinary(ctx, n, residue_point):
    """F_{n,<p}(x) is a unit at the residue point x (a PadicScalar)."""
    ring = residue_point.ring
    coeffs = hg_truncation_coeffs(n, ctx.N, ctx.p, ctx.p, 1)
    val = _horner_raw(ring, coeffs, ring._rmod(residue_point.raw, 1), 1)
    return bool(val) if ring.d == 1 else any(val)


def dwork_ratio(ctx, n, x, digits):
    """F(x)/F(x^p) mod p^digits via F_{<p^digits}(x) / F_{<p^(digits-1)}(x^p)."""
    ring = x.ring
    p = ctx.p
    K = digits + 1
    top = hg_truncation_coeffs(n, ctx.N, p ** digits, p, K)
    bottom = top[:p ** (digits - 1)]
    num = ring.make(_horner_raw(ring, top, ring._rmod(x.raw, K), K), 0, digits)
    xp = x ** p
    den = ring.make(_horner_raw(ring, bottom, ring._rmod(xp.raw, K), K), 0, digits)
    if not den.is_unit():
        raise NonOrdinary("F_{<p^s}(x^p) is not a unit")
    return (num / den).with_prec(digits)


def dwork_unit_root(ctx, n, alpha, r=1, lift=None, digits=4):
    """Unit root of the q-Frobenius (q = p^r) on H^1(n) of the fiber at alpha.

    alpha must satisfy a alpha^p = sigma(alpha) for the lift a.  The value is
    (-1)^(r n (p-1)/N) prod_{i<r} D_a(sigma^i alpha) with D_a(x) = F(x)/F(a x^p),
    computed from the Dwork ratio D_1(x) = F(x)/F(x^p) through

        D_a(x) = D_1(x) prod_{k>=0} D_1(x^(p^(k+1))) / D_1((a x^p)^(p^k)).
    """
    if not 1 <= n <= ctx.N - 1:
        raise DomainError("n out of range")
    ring = alpha.ring
    res = alpha.residue()
    if (ring.d == 1 and res in (0, 1)) or (ring.d > 1 and (not any(res) or res == (1,) + (0,) * (ring.d - 1))):
        raise DomainError("alpha must avoid 0 and 1 mod p")
    work = unramified_ring(ring.p, ring.d, max(ring.M, digits + 2))
    alpha = work(alpha)
    a = work(lift.a) if lift is not None else work.one()
    if lift is not None and not SigmaLift(unramified_ring(ring.p, 1, work.M)(lift.a)).is_compatible(alpha):
        raise DomainError("alpha is not compatible with the Frobenius lift")
    if not is_ordinary(ctx, n, alpha):
        raise NonOrdinary(f"component n={n} is not ordinary at this point")
    p = ctx.p

    def D_a(x):
        val = dwork_ratio(ctx, n, x, digits)
        if (a - 1).is_zero():
            return val
        y = a * x ** p
        xp = x ** p
        for k in range(digits + 1):
            val = val * dwork_ratio(ctx, n, xp, digits) / dwork_ratio(ctx, n, y, digits)
            xp = xp ** p
            y = y ** p
        return val.with_prec(digits)

    total = work.one()
    x = alpha
    for _ in range(r):
        total = total * D_a(x)
        x = x.frobenius()
    total = total * frobenius_sign(ctx, n, r)
    return ring(total.with_prec(digits))
