"""Hypergeometric series F_n, p-adic polylogarithms and log^sigma of series.

F_n(lambda) = 2F1(n/N, 1-n/N; 1; lambda).  Its coefficients are rational with
p-integral values; they are produced from the Pochhammer recurrence with the
p-part of every factor split off exactly, so no precision is lost.

ln_r(z) = sum over p not dividing m of z^m / m^r is handled in the variable
x = 1/(1-z).  With w(x) = (1 - x^p + (x-1)^p)/p,

    ln_1 = -sum_k p^(k-1) w^k / k,
    ln_(r+1) = -int_0^x [P/x + (P - P(1))/(1-x)] dx   applied piece by piece,

which inverts (x^2 - x) d/dx ln_(r+1) = ln_r.  Piece k of ln_r has valuation
at least k - 1 - v_p(k) - (r-1) floor(log_p(k(p-1))), which certifies where
the sum may be cut.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .errors import DomainError, PrecisionError
from .padic_core import log_unit, padic_log, unramified_ring, vp
from .series import TruncSeries

DEFAULT_L = 60
GUARD = 4


def _split(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def pochhammer_units(n, N, count, p, K):
    """Coefficients of F_n up to lambda^(count-1) as (valuation, unit mod p^K).

    c_{i+1}/c_i = (n + iN)(N - n + iN) / (N (i+1))^2, each factor an integer
    whose p-part is removed exactly.
    """
    mod = p ** K
    out = [(0, 1)]
    v, u = 0, 1
    Ninv2 = pow(N * N, -1, mod)
    for i in range(count - 1):
        v1, u1 = _split(n + i * N, p)
        v2, u2 = _split(N - n + i * N, p)
        v3, u3 = _split(i + 1, p)
        v += v1 + v2 - 2 * v3
        u = u * u1 % mod * u2 % mod * pow(u3 * u3, -1, mod) % mod * Ninv2 % mod
        if v < 0:
            raise PrecisionError("hypergeometric coefficient is not p-integral")
        out.append((v, u))
    return out


def hg_truncation_value(n, N, count, alpha_raw, p, K):
    """F_{n,<count}(alpha) mod p^K for an integer alpha (Horner on ints)."""
    mod = p ** K
    coeffs = pochhammer_units(n, N, count, p, K)
    acc = 0
    for v, u in reversed(coeffs):
        c = u * pow(p, v, mod) % mod if v < K else 0
        acc = (acc * alpha_raw + c) % mod
    return acc


@dataclass
class HGSeries:
    """F_n as a lambda-series together with its truncation F_{n,<p}."""

    n: int
    N: int
    series: TruncSeries
    truncated: TruncSeries

    @property
    def ring(self):
        return self.series.ring

    @property
    def a(self):
        return Fraction(self.n, self.N)

    def ode_residual(self):
        F = self.series
        ring = F.ring
        lam_lam2 = TruncSeries.polynomial(ring, [0, 1, -1])
        one_m_2lam = TruncSeries.polynomial(ring, [1, -2])
        d1 = F.derivative()
        d2 = d1.derivative()
        a = self.a
        return lam_lam2 * d2 + one_m_2lam * d1 - F.scale(ring(a * (1 - a)))


def build_hg(ctx, n, L=DEFAULT_L, ring=None):
    if not 1 <= n <= ctx.N - 1:
        raise DomainError(f"n={n} outside 1..{ctx.N - 1}")
    ring = ring or ctx.ring
    p = ctx.p
    cs = []
    for v, u in pochhammer_units(n, ctx.N, max(L, p), p, ring.M + 1):
        cs.append(ring(u * p ** v) if v < ring.M else ring.zero())
    series = TruncSeries(ring, cs[:L], L=L)
    truncated = TruncSeries.polynomial(ring, cs[:p])
    return HGSeries(n, ctx.N, series, truncated)


def contiguous_series(n, N, ring, L=DEFAULT_L):
    """2F1(1 + n/N, 2 - n/N; 2; lambda) from its own Pochhammer recurrence."""
    a = Fraction(n, N)
    c = Fraction(1)
    cs = []
    for j in range(L):
        cs.append(ring(c))
        c = c * (1 + a + j) * (2 - a + j) / ((2 + j) * (j + 1))
    return TruncSeries(ring, cs, L=L)


# ---------------------------------------------------------------------------
# polylogarithms


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def w_polynomial(p):
    """Integer coefficients of w(x) = (1 - x^p + (x-1)^p)/p."""
    num = [0] * (p + 1)
    num[0] += 1
    num[p] -= 1
    for k in range(p + 1):
        num[k] += comb(p, k) * (-1) ** (p - k)
    if any(c % p for c in num):
        raise AssertionError("w(x) is not integral")
    return [c // p for c in num]


def _ilog(j, p):
    e = 0
    while j >= p:
        j //= p
        e += 1
    return e


def piece_bound(p, r, k):
    """Lower bound for the valuation of piece k of ln_r (r >= 1)."""
    return k - 1 - vp(k, p) - (r - 1) * _ilog(k * (p - 1), p)


def pieces_needed(p, r, target):
    """Number of pieces K so that every piece beyond K has valuation >= target."""
    worst = 0
    k = 1
    clear = 0
    while clear < 4 * p + 20:
        if piece_bound(p, r, k) < target:
            worst = k
            clear = 0
        else:
            clear += 1
        k += 1
    return worst


def _eval_frac(poly, x):
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _next_pieces(pieces):
    """Apply P -> -int_0^x [P/x + (P - P(1))/(1-x)] to each piece."""
    out = []
    for P in pieces:
        over_x = P[1:]
        # (P - P(1))/(1 - x): with P - P1 = sum c_j (x^j - 1) for j >= 1,
        # (x^j - 1)/(1 - x) = -(1 + x + ... + x^(j-1))
        diff = [Fraction(0)] * max(len(P) - 1, 1)
        acc = Fraction(0)
        for j in range(len(P) - 1, 0, -1):
            acc += P[j]
            diff[j - 1] -= acc
        integrand = [(over_x[i] if i < len(over_x) else 0) + (diff[i] if i < len(diff) else 0)
                     for i in range(max(len(over_x), len(diff)))]
        prim = [Fraction(0)] + [-c / (i + 1) for i, c in enumerate(integrand)]
        out.append(prim)
    return out


@dataclass
class PolylogFn:
    """ln_r as a polynomial in x = 1/(1-z) known modulo p^prec."""

    r: int
    p: int
    prec: int
    terms: int
    rational: list
    ring: object = field(repr=False)

    @property
    def x_expansion(self):
        return TruncSeries.polynomial(self.ring, [self.ring(c, self.prec) for c in self.rational])

    def value_at_x(self, x):
        if x.valuation() < 0:
            raise DomainError("x-expansion only converges for |x| <= 1")
        ring = x.ring
        acc = ring.zero()
        for c in reversed(self.rational):
            acc = acc * x + ring(c, self.prec)
        return acc.with_prec(self.prec)

    def __call__(self, z):
        """ln_r(z) for z not congruent to 1 mod p."""
        if isinstance(z, int):
            z = self.ring(z)
        one_minus = 1 - z
        if one_minus.valuation() != 0:
            raise DomainError("z = 1 mod p lies outside the domain of the x-expansion")
        return self.value_at_x(1 / one_minus)


def build_polylog(p, r, M, guard=GUARD):
    """ln_r^(p) in the x-variable for -inf < r <= 4, summed to p^(M+guard)."""
    if r > 4:
        raise DomainError("polylog order capped at 4")
    target = M + guard
    ring = unramified_ring(p, 1, target)
    w = w_polynomial(p)
    if r <= 0:
        # ln_0 = x - x^p / (1 - p w), then ln_(r-1) = (x^2 - x) d/dx ln_r
        K = target + 1
        geo = [Fraction(1)]
        acc = [Fraction(1)]
        pw = [p * c for c in w]
        for _ in range(1, K):
            geo = _pmul(geo, pw)
            acc = _padd(acc, geo)
        xp = [Fraction(0)] * p + [Fraction(-c) for c in acc]
        poly = _padd([Fraction(0), Fraction(1)], xp)
        for _ in range(-r):
            d = [i * c for i, c in enumerate(poly)][1:]
            poly = _padd([Fraction(0), Fraction(0)] + d, [Fraction(0)] + [-c for c in d])
        return PolylogFn(r, p, target, K, [Fraction(c) for c in poly], ring)
    K = pieces_needed(p, r, target)
    wk = [1]
    pieces = []
    for k in range(1, K + 1):
        wk = _pmul(wk, w)
        pieces.append([Fraction(-p ** (k - 1) * c, k) for c in wk])
    for _ in range(r - 1):
        pieces = _next_pieces(pieces)
    deg = max(len(P) for P in pieces)
    total = [Fraction(0)] * deg
    for P in pieces:
        for i, c in enumerate(P):
            total[i] += c
    return PolylogFn(r, p, target, K, total, ring)


def polylog_limit_oracle(r, z, s):
    """The s-th approximant (1 - z^(p^s))^-1 sum_{m < p^s, p !| m} z^m / m^r."""
    ring = z.ring
    p = ring.p
    if (1 - z).valuation() > 0:
        raise DomainError("z = 1 mod p: the limit expression has a pole")
    if not z.is_unit():
        raise DomainError("limit oracle needs a unit z")
    ps = p ** s
    if ps > 10 ** 7:
        raise DomainError("p^s capped at 10^7")
    K = ring.M
    mod = p ** K
    order = _root_order(z)
    if order is not None:
        sums = [0] * order
        for m in range(1, ps):
            if m % p:
                sums[m % order] += pow(m, -r, mod)
        zpow = [ring.one()]
        for _ in range(order - 1):
            zpow.append(zpow[-1] * z)
        total = ring.zero()
        for j in range(order):
            if sums[j] % mod:
                total = total + zpow[j] * ring(sums[j] % mod)
    elif ring.d == 1:
        zr = z.lift()
        acc = 0
        zm = 1
        for m in range(1, ps):
            zm = zm * zr % mod
            if m % p:
                acc = (acc + zm * pow(m, -r, mod)) % mod
        total = ring(acc)
    else:
        total = ring.zero()
        zm = ring.one()
        for m in range(1, ps):
            zm = zm * z
            if m % p:
                total = total + zm * ring(pow(m, -r, mod))
    return (total / (1 - z ** ps)).with_prec(s)


def _root_order(z):
    """Multiplicative order of z if z is a root of unity of order prime to p."""
    ring = z.ring
    q1 = ring.q - 1
    if not z ** q1 == 1:
        return None
    for d in sorted(_divisors(q1)):
        if z ** d == 1:
            return d
    return q1


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


# ---------------------------------------------------------------------------
# log^sigma of series


def log_sigma_series(f, lift, L=None):
    """log^sigma(f) = p^-1 log(f^p / f^sigma) for f = c * lambda^k * (1 + lambda*...).

    The lambda^k part contributes -k p^-1 log(a); the rest is summed as
    sum_j (-1)^(j+1) p^(j-1) u^j / j with f^p/f^sigma = 1 + p u.
    """
    ring = f.ring
    p = ring.p
    k = f.order()
    if k == f.known():
        raise DomainError("series vanishes to known precision")
    c = f[k]
    if not c.is_unit():
        raise DomainError("leading coefficient must be a unit")
    g = f.shift(-k) if k else f
    if L is None:
        L = g.known()
    g = g.truncate(L)
    work = unramified_ring(p, ring.d, ring.M + 2 * GUARD)
    gw = g.change_ring(work)
    ratio = gw ** p * gw.sigma_substitute(lift, L=L).invert(L)
    u = (ratio - 1).truncate(L)
    u = TruncSeries(work, [x / p for x in u.coeffs], lo=u.lo, L=u.L)
    target = ring.M + GUARD
    jmax = 1
    while (jmax + 1) - 1 - _ilog(jmax + 1, p) < target:
        jmax += 1
    total = TruncSeries(work, [], L=L)
    power = TruncSeries.constant(work, 1)
    for j in range(1, jmax + 1):
        power = (power * u).truncate(L)
        term = power.scale(work(Fraction(p ** (j - 1), j)))
        total = total + term if j % 2 else total - term
    if k:
        a = work(lift.a)
        total = total + (-k) * (padic_log(a) / p)
    return total.change_ring(ring)


def log_sigma_constant(c):
    """log^sigma of a unit constant."""
    return log_unit(c)
