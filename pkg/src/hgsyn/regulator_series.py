"""Regulator series E_1, E_2, eps_1, eps_2 and the Coleman fixed-point system.

E_1 and E_2 are the coordinates of the regulator class in the basis
(omega~, eta~) = (omega, eta) T.  They are built twice: once from the
closed-form right sides in F_n and tau^sigma, once from the Frobenius matrix,
the basis change T and the tilde connection.  The two must agree.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConsistencyError, DomainError, NotIntegrable, SolveError
from .frobenius_structure import (
    _mat_map,
    eigen_component,
    inv_lam_minus_lam2,
    tilde_basis_change,
    working_ring,
)
from .hg_functions import DEFAULT_L, GUARD, build_polylog, polylog_limit_oracle
from .padic_core import PadicScalar, extension_degree_for, unramified_ring
from .series import SigmaLift, TruncSeries


@dataclass(frozen=True)
class SymbolChoice:
    """zeta_1 != zeta_2 in mu_N, naming the symbol {h_1, h_2} on the fibration."""

    N: int
    zeta1: PadicScalar
    zeta2: PadicScalar

    def __post_init__(self):
        for z in (self.zeta1, self.zeta2):
            if not (z ** self.N - 1).is_zero():
                raise DomainError(f"{z} is not an N-th root of unity")
        if (self.zeta1 - self.zeta2).is_zero():
            raise DomainError("zeta_1 and zeta_2 must differ")

    @classmethod
    def from_indices(cls, ring, N, i, j):
        """zeta_1 = g^i, zeta_2 = g^j for the generator g of mu_N used by roots_of_unity."""
        mu = ring.roots_of_unity(N)
        return cls(N, mu[i % N], mu[j % N])

    def swapped(self):
        return SymbolChoice(self.N, self.zeta2, self.zeta1)

    def coefficient(self, n):
        return (self.zeta1 ** n - self.zeta2 ** n) / self.N


@dataclass
class RegulatorSeriesBundle:
    n: int
    E1: TruncSeries
    E2: TruncSeries
    eps1: TruncSeries
    eps2: TruncSeries
    lift: SigmaLift
    initial_E2: PadicScalar
    component: object = None

    def precision_report(self):
        upto = min(s.known() for s in (self.E1, self.E2, self.eps1, self.eps2))
        return {name: getattr(self, name).min_prec(upto) for name in ("E1", "E2", "eps1", "eps2")}

    def to_json(self):
        out = {"n": self.n, "a": str(self.lift.a.lift()), "initial_E2": self.initial_E2.to_json(),
               "precision": self.precision_report()}
        for name in ("E1", "E2", "eps1", "eps2"):
            out[name] = getattr(self, name).to_json()
        return out


# ---------------------------------------------------------------------------
# initial value of E_2


def _antiroots(ctx, prec):
    """The nu with nu^N = -1, in the smallest unramified ring containing them."""
    d = extension_degree_for(ctx.p, 2 * ctx.N)
    ring = unramified_ring(ctx.p, d, prec)
    return ring, [z for z in ring.roots_of_unity(2 * ctx.N) if (z ** ctx.N + 1).is_zero()]


def initial_E2(ctx, n, method="expansion", s=4):
    """E_2(0) = 2N sum_{nu^N = -1} nu^-n ln_2(nu), projected to Z_p.

    method "expansion" evaluates the x-expansion of ln_2; "limit" uses the
    s-th approximant of the limit definition, good to s digits.
    """
    prec = ctx.M + GUARD
    ring, nus = _antiroots(ctx, prec)
    if method == "expansion":
        ln2 = build_polylog(ctx.p, 2, ctx.M)
        values = [ln2(nu) for nu in nus]
    elif method == "limit":
        values = [polylog_limit_oracle(2, nu, s) for nu in nus]
    else:
        raise DomainError(f"unknown method {method!r}")
    total = ring.zero()
    for nu, v in zip(nus, values):
        total = total + nu ** (-n) * v
    total = total * (2 * ctx.N)
    return working_ring(ctx)(total)


# ---------------------------------------------------------------------------
# the ODE system


def _frobenius_kernel(comp):
    """p^-1 F(lambda^sigma)/(1 - lambda^sigma) dlambda^sigma/dlambda = a lambda^(p-1) F^sigma/(1-lambda^sigma)."""
    ring = comp.ring
    lift = comp.lift
    L = comp.F.series.known()
    p = ring.p
    Fs = comp.F.series.sigma_substitute(lift, L=L)
    lam_s = lift.lam_sigma(ring)
    denom = (TruncSeries.constant(ring, 1) - lam_s).invert(L)
    return (Fs * denom).shift(p - 1).scale(ring(lift.a))


def ode_right_sides(comp, E1):
    """Right sides of E_1' and E_2' (the latter needs E_1)."""
    ring = comp.ring
    F = comp.F.series
    L = F.known()
    s = comp.sign
    ker = _frobenius_kernel(comp)
    rhs1 = TruncSeries.geometric(ring, L) * F - ker.scale(s)
    rhs2 = E1 * (F * F).invert() * inv_lam_minus_lam2(ring, L) + (ker * comp.tau_sigma).scale(s)
    return rhs1.truncate(L), rhs2.truncate(L)


def assemble_eps(comp, E1, E2):
    """(eps_1, eps_2) = T (E_1, E_2)."""
    T = tilde_basis_change(comp.n, comp.ctx.N, comp.F.series)
    eps1 = T[0][0] * E1 + T[0][1] * E2
    eps2 = T[1][1] * E2
    return eps1, eps2


def build_regulator_series(ctx, n, lift=None, L=DEFAULT_L, comp=None, e2_method="expansion"):
    comp = comp or eigen_component(ctx, n, lift=lift, L=L)
    ring = comp.ring
    zero_rhs = TruncSeries.constant(ring, 0)
    rhs1, _ = ode_right_sides(comp, zero_rhs)
    E1 = rhs1.primitive(0)
    _, rhs2 = ode_right_sides(comp, E1)
    if rhs2.lo < 0 and any(not rhs2[k].is_zero() for k in range(rhs2.lo, 0)):
        raise NotIntegrable("E_2 right side has a pole at lambda = 0")
    e20 = initial_E2(ctx, n, method=e2_method)
    E2 = rhs2.primitive(e20)
    eps1, eps2 = assemble_eps(comp, E1, E2)
    return RegulatorSeriesBundle(n, E1, E2, eps1, eps2, comp.lift, e20, comp)


def ode_residuals(bundle):
    """(E_1' - rhs_1, E_2' - rhs_2) for a built bundle."""
    rhs1, rhs2 = ode_right_sides(bundle.component, bundle.E1)
    return bundle.E1.derivative() - rhs1, bundle.E2.derivative() - rhs2


def rederive_from_connection(comp, E2_0):
    """Solve E~' = T^-1 w - C~ E~ with w the image of the symbol's de Rham class.

    w = (1/(1-lambda), 0) - p^-2 (dlambda^sigma/dlambda)/(1 - lambda^sigma) Fmat e_1,
    the second term being Phi applied to dlambda/(1-lambda) omega.
    """
    ring = comp.ring
    F = comp.F.series
    L = F.known()
    p = ring.p
    lift = comp.lift
    T = tilde_basis_change(comp.n, comp.ctx.N, F)
    det = T[0][0] * T[1][1] - T[0][1] * T[1][0]
    dinv = det.invert(L)
    Tinv = [[T[1][1] * dinv, -(T[0][1] * dinv)], [-(T[1][0] * dinv), T[0][0] * dinv]]
    lam_s = lift.lam_sigma(ring)
    kern = (lift.dlam_sigma(ring) * (TruncSeries.constant(ring, 1) - lam_s).invert(L))
    kern = kern.scale(ring(Fraction(1, p * p)))
    fm = comp.frob_matrix
    w = [TruncSeries.geometric(ring, L) - kern * fm[0][0], -(kern * fm[1][0])]
    v = [Tinv[i][0] * w[0] + Tinv[i][1] * w[1] for i in range(2)]
    Ct = comp.gm_tilde
    for i, j in ((0, 0), (0, 1), (1, 1)):
        if Ct[i][j].deficit(ring.M - GUARD, L - 2):
            raise ConsistencyError("tilde connection is not strictly lower triangular")
    E1 = v[0].truncate(L).primitive(0)
    E2 = (v[1] - Ct[1][0] * E1).truncate(L).primitive(E2_0)
    return E1, E2


def regulator_series_at(bundles, symbol):
    """Symbol-weighted series: per n, (zeta_1^n - zeta_2^n)/N times eps_i and E_i."""
    out = {}
    for b in bundles:
        c = symbol.coefficient(b.n)
        c = b.eps1.ring(c)
        out[b.n] = {"coefficient": c,
                    "eps1": b.eps1.scale(c), "eps2": b.eps2.scale(c),
                    "E1_tilde": b.E1.scale(c), "E2_tilde": b.E2.scale(c)}
    return out


# ---------------------------------------------------------------------------
# Coleman fixed point: s^sigma = p A (s - eps)


@dataclass
class ColemanResult:
    s1: PadicScalar
    s2: PadicScalar
    coleman_value: PadicScalar
    residual_valuation: int
    method: str

    def to_json(self):
        return {"s1": self.s1.to_json(), "s2": self.s2.to_json(),
                "coleman_value": self.coleman_value.to_json(),
                "residual_valuation": self.residual_valuation, "method": self.method}


def _sigma(x, k, r):
    """sigma^k on Q_q with sigma of order r (k may be negative)."""
    k %= r
    return x.frobenius(k) if k else x


def coleman_matrix(alpha, F_values, r=1):
    """A = c [[F22, -F12], [-p F21, p F11]] with c = (alpha^s - alpha^s^2)/(alpha - alpha^2)."""
    p = alpha.ring.p
    a_s = _sigma(alpha, 1, r)
    c = (a_s - a_s * a_s) / (alpha - alpha * alpha)
    F11, F12, F21, F22 = (F_values[k] for k in ("F11", "F12", "F21", "F22"))
    return [[c * F22, -(c * F12)], [-(c * F21 * p), c * F11 * p]]


def _apply(A, v):
    return [A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1]]


def coleman_residual(alpha, F_values, eps, s, r=1):
    """s^sigma - p A (s - eps), both coordinates."""
    A = coleman_matrix(alpha, F_values, r)
    p = alpha.ring.p
    diff = [s[0] - eps[0], s[1] - eps[1]]
    rhs = _apply(A, diff)
    return [_sigma(s[i], 1, r) - rhs[i] * p for i in range(2)]


def coleman_solve(alpha, F_values, eps, r=1, method=None):
    """Solve s^sigma = p A (s - eps); method "direct" (r = 1 only) or "series"."""
    ring = alpha.ring
    p = ring.p
    if (alpha.residue() == 0 if ring.d == 1 else not any(alpha.residue())):
        raise DomainError("alpha must be a unit")
    if (1 - alpha).valuation() > 0:
        raise DomainError("alpha must avoid 1 mod p")
    method = method or ("direct" if r == 1 else "series")
    eps = [ring(e) for e in eps]
    A = coleman_matrix(alpha, F_values, r)
    if method == "direct":
        if r != 1:
            raise DomainError("the direct solve needs sigma trivial on s (r = 1)")
        B = [[1 - A[0][0] * p, -(A[0][1] * p)], [-(A[1][0] * p), 1 - A[1][1] * p]]
        det = B[0][0] * B[1][1] - B[0][1] * B[1][0]
        if not det.is_unit():
            raise SolveError("I - pA is singular mod p")
        rhs = _apply(A, eps)
        rhs = [-(x * p) for x in rhs]
        s = [(B[1][1] * rhs[0] - B[0][1] * rhs[1]) / det,
             (B[0][0] * rhs[1] - B[1][0] * rhs[0]) / det]
    elif method == "series":
        # s = -sum_k p^k A^(s^-1) ... A^(s^-k) eps^(s^-k)
        s = [ring.zero(), ring.zero()]
        prod = [[ring.one(), ring.zero()], [ring.zero(), ring.one()]]
        k = 0
        while True:
            k += 1
            Ak = _mat_map(A, lambda x: _sigma(x, -k, r))
            prod = [[sum((prod[i][m] * Ak[m][j] for m in range(2)), ring.zero()) for j in range(2)]
                    for i in range(2)]
            ek = [_sigma(e, -k, r) for e in eps]
            term = _apply(prod, ek)
            scale = ring(p) ** k
            s = [s[i] - term[i] * scale for i in range(2)]
            if k >= ring.M + 2 and all(t.valuation() + k >= ring.M for t in term):
                break
    else:
        raise DomainError(f"unknown method {method!r}")
    res = coleman_residual(alpha, F_values, eps, s, r)
    resval = min(x.valuation() for x in res)
    value = s[1] / (alpha - alpha * alpha)
    return ColemanResult(s[0], s[1], value, resval, method)


def synthetic_frobenius_values(alpha, rng, r=1):
    """Random F_ij(alpha) obeying the determinant identity F11 F22 - F12 F21 = 1/c."""
    ring = alpha.ring
    a_s = _sigma(alpha, 1, r)
    ratio = (alpha - alpha * alpha) / (a_s - a_s * a_s)
    F11 = ring.random_element(rng, unit=True)
    F12 = ring.random_element(rng)
    F21 = ring.random_element(rng)
    F22 = (ratio + F12 * F21) / F11
    return {"F11": F11, "F12": F12, "F21": F21, "F22": F22}


def regulator_bundles(ctx, lift=None, L=DEFAULT_L):
    return [build_regulator_series(ctx, n, lift=lift, L=L) for n in range(1, ctx.N)]
