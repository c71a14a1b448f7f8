"""Fiberwise syntomic regulator on y^N = x(1-x)^(N-1)(1-alpha x).

Functions on the fiber live in the ring of sums  sum_{j<N} y^j r_j(x)  where
each r_j is a polynomial over powers of the four factors

    x,   1 - x,   1 - alpha x,   q(x) = alpha x^2 - 2x + 1.

The last one is forced on us by h_1 = (y - z1(1-x))/(y - z2(1-x)): the norm of
y - z(1-x) is -(1-x)^(N-1) q(x).  Coefficients are integers mod p^K with one
absolute precision per rational function.

Frobenius: x -> a x^p (any a = 1 mod p), y -> y^p u with u the binomial-series
N-th root of f(a x^p)/f(x)^p.

A 1-form  sum_j y^j r_j dx  splits into mu_N-eigencomponents: j = N - n gives
g(x) dx / y^n with g = f r_j.  In component n the exact forms are
D(h) dx/y^n with D(h) = h' - (n/N)(f'/f) h, and the reduction below removes
the polynomial part, all q-poles of order >= 2 and all poles of order >= 2
at 0, 1, 1/alpha.  What is left is a residue vector at 0, 1, 1/alpha
(modulo the image of D(1)) and a class (a x + b)/q whose vanishing is the
no-residue condition at the points above q = 0.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, PrecisionError, ResidueError
from .padic_core import log_unit, padic_log, unramified_ring

FIBER_GUARD = 6


# ---------------------------------------------------------------------------
# polynomials mod P (lists, low degree first)


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _kron(a, b, P):
    """Product of two polynomials mod P through one big-integer multiplication."""
    if not a or not b:
        return []
    la, lb = len(a), len(b)
    width = (2 * P.bit_length() + min(la, lb).bit_length() + 8) // 8
    A = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in a), "little")
    B = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in b), "little")
    n = la + lb - 1
    bs = (A * B).to_bytes(width * n + width, "little")
    return _trim([int.from_bytes(bs[i * width:(i + 1) * width], "little") % P for i in range(n)])


def _padd(a, b, P):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % P
    return _trim(out)


def _pneg(a, P):
    return [(-c) % P for c in a]


def _pscale(a, c, P):
    c %= P
    return _trim([x * c % P for x in a]) if c else []


def _pderiv(a, P):
    return _trim([i * a[i] % P for i in range(1, len(a))])


def _pmul_trunc(a, b, n, P):
    return _trim(_kron(a[:n], b[:n], P)[:n])


def _series_inv(a, n, P):
    """1/a mod t^n; a[0] must be a unit."""
    g = [pow(a[0], -1, P)]
    m = 1
    while m < n:
        m = min(2 * m, n)
        e = _pmul_trunc(a, g, m, P)
        e = _pneg(e, P)
        e = _padd(e, [2], P)
        g = _pmul_trunc(g, e, m, P)
    return g


def _series_pow(a, e, n, P):
    """a^e mod t^n for an integer e (negative allowed when a[0] is a unit)."""
    if e < 0:
        a = _series_inv(a, n, P)
        e = -e
    out = [1]
    base = a[:n]
    while e:
        if e & 1:
            out = _pmul_trunc(out, base, n, P)
        e >>= 1
        if e:
            base = _pmul_trunc(base, base, n, P)
    return out


def _pdivmod(a, b, P):
    """Quotient and remainder by b, whose leading coefficient is a unit."""
    a = _trim(list(a))
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], a
    dq = len(a) - 1 - db
    ra = a[::-1][:dq + 1]
    rb = b[::-1]
    qr = _pmul_trunc(ra, _series_inv(rb, dq + 1, P), dq + 1, P)
    q = _trim((qr + [0] * (dq + 1 - len(qr)))[::-1])
    r = _padd(a, _pneg(_kron(q, b, P), P), P)
    return q, r[:db] if len(r) > db else r


def _taylor_shift(a, s, n, P):
    """Coefficients of a(s + t) mod t^n."""
    if not a:
        return []
    pw = [[s % P, 1]]
    while (1 << len(pw)) <= len(a):
        pw.append(_pmul_trunc(pw[-1], pw[-1], n, P))

    def rec(c, level):
        if len(c) <= 16:
            acc = []
            for x in reversed(c):
                nxt = _padd(_pscale(acc, s, P), [0] + acc, P)[:n]
                acc = _padd(nxt, [x % P], P)
            return acc
        h = 1 << level
        while h >= len(c):
            level -= 1
            h = 1 << level
        lo = rec(c[:h], level - 1)
        hi = rec(c[h:], level)
        return _padd(lo, _pmul_trunc(pw[level], hi, n, P), P)[:n]

    top = max(0, len(a).bit_length() - 1)
    while top >= len(pw):
        top -= 1
    return _trim(rec(list(a), top)[:n])


def _peval(a, x, P):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % P
    return acc


# ---------------------------------------------------------------------------


@dataclass
class RatFn:
    """num / (x^e0 (1-x)^e1 (1-alpha x)^e2 q^e3), known mod p^prec."""

    num: list
    exps: tuple
    prec: int

    def is_zero(self):
        return not self.num


class Fiber:
    """The fiber X_alpha together with the Frobenius lift x -> a x^p."""

    def __init__(self, p, N, alpha, M=6, guard=FIBER_GUARD, a=1):
        if N < 2 or (p - 1) % N:
            raise DomainError("need N >= 2 and p = 1 mod N")
        self.p, self.N, self.M = p, N, M
        self.K = M + guard
        self.P = p ** self.K
        P = self.P
        alpha = int(alpha) % P
        if alpha % p in (0, 1):
            raise DomainError("alpha must avoid 0 and 1 mod p")
        if (a - 1) % p:
            raise DomainError("the lift parameter must be 1 mod p")
        self.alpha = alpha
        self.a = a % P
        self.ring = unramified_ring(p, 1, self.K)
        self.factors = [[0, 1], [1, P - 1], [1, (-alpha) % P], [1, P - 2, alpha]]
        self.roots = [0, 1, pow(alpha, -1, P)]
        self.lead = [1, P - 1, (-alpha) % P]  # F_i(s_i + t) = lead_i * t
        self.ram = [1, N - 1, 1]
        f = [1]
        for i, e in ((0, 1), (1, N - 1), (2, 1)):
            for _ in range(e):
                f = _kron(f, self.factors[i], P)
        self.f = f
        self._fpow = {}
        self._cache = {}

    # -- factor powers -----------------------------------------------------

    def factor_power(self, i, e):
        key = (i, e)
        if key not in self._fpow:
            if e == 0:
                out = [1]
            elif e == 1:
                out = list(self.factors[i])
            else:
                h = self.factor_power(i, e // 2)
                out = _kron(h, h, self.P)
                if e % 2:
                    out = _kron(out, self.factors[i], self.P)
            self._fpow[key] = out
        return self._fpow[key]

    # -- rational functions ------------------------------------------------

    def rf(self, num, exps=(0, 0, 0, 0), prec=None):
        prec = self.K if prec is None else min(prec, self.K)
        return RatFn(_trim([c % self.P for c in num]), tuple(exps), prec)

    def rf_times_factor(self, r, i, m):
        """r * F_i^m (m may be negative)."""
        exps = list(r.exps)
        exps[i] -= m
        num = r.num
        if exps[i] < 0:
            num = _kron(num, self.factor_power(i, -exps[i]), self.P)
            exps[i] = 0
        return RatFn(num, tuple(exps), r.prec)

    def rf_add(self, r, s):
        if r.is_zero():
            return RatFn(s.num, s.exps, min(r.prec, s.prec))
        if s.is_zero():
            return RatFn(r.num, r.exps, min(r.prec, s.prec))
        E = tuple(max(x, y) for x, y in zip(r.exps, s.exps))
        nr, ns = r.num, s.num
        for i in range(4):
            if E[i] > r.exps[i]:
                nr = _kron(nr, self.factor_power(i, E[i] - r.exps[i]), self.P)
            if E[i] > s.exps[i]:
                ns = _kron(ns, self.factor_power(i, E[i] - s.exps[i]), self.P)
        return RatFn(_padd(nr, ns, self.P), E, min(r.prec, s.prec))

    def rf_neg(self, r):
        return RatFn(_pneg(r.num, self.P), r.exps, r.prec)

    def rf_mul(self, r, s):
        exps = tuple(x + y for x, y in zip(r.exps, s.exps))
        return RatFn(_kron(r.num, s.num, self.P), exps, min(r.prec, s.prec))

    def rf_scale(self, r, c, prec=None):
        pr = r.prec if prec is None else min(r.prec, prec)
        return RatFn(_pscale(r.num, c, self.P), r.exps, pr)

    def rf_divp(self, r, k=1):
        """Exact division by p^k; the numerator must be divisible."""
        pk = self.p ** k
        if any(c % pk for c in r.num):
            mod = self.p ** min(r.prec, self.K)
            if any((c % mod) % pk for c in r.num):
                raise PrecisionError("numerator not divisible by the requested power of p")
        return RatFn(_trim([(c // pk) for c in r.num]), r.exps, r.prec - k)

    def rf_deriv(self, r):
        """d/dx of num / prod F_i^e_i."""
        P = self.P
        active = [i for i in range(4) if r.exps[i] > 0]
        if not active:
            return RatFn(_pderiv(r.num, P), r.exps, r.prec)
        prod = [1]
        for i in active:
            prod = _kron(prod, self.factors[i], P)
        out = _kron(_pderiv(r.num, P), prod, P)
        for i in active:
            rest = [1]
            for j in active:
                if j != i:
                    rest = _kron(rest, self.factors[j], P)
            term = _kron(_pscale(_pderiv(self.factors[i], P), r.exps[i], P), rest, P)
            out = _padd(out, _pneg(_kron(r.num, term, P), P), P)
        exps = tuple(e + (1 if i in active else 0) for i, e in enumerate(r.exps))
        return RatFn(out, exps, r.prec)

    def dlog_f(self):
        """f'/f = 1/x - (N-1)/(1-x) - alpha/(1-alpha x)."""
        key = "dlogf"
        if key not in self._cache:
            t = self.rf([1], (1, 0, 0, 0))
            t = self.rf_add(t, self.rf([-(self.N - 1)], (0, 1, 0, 0)))
            t = self.rf_add(t, self.rf([-self.alpha], (0, 0, 1, 0)))
            self._cache[key] = t
        return self._cache[key]

    # -- ring elements -----------------------------------------------------

    def element(self, comps):
        return DaggerFunction(self, [c if c is not None else self.rf([]) for c in comps])

    def const(self, c):
        comps = [self.rf([]) for _ in range(self.N)]
        comps[0] = self.rf([int(c)])
        return DaggerFunction(self, comps)

    def poly_x(self, coeffs):
        comps = [self.rf([]) for _ in range(self.N)]
        comps[0] = self.rf(list(coeffs))
        return DaggerFunction(self, comps)

    def rational_x(self, r):
        comps = [self.rf([]) for _ in range(self.N)]
        comps[0] = r
        return DaggerFunction(self, comps)

    def y(self):
        comps = [self.rf([]) for _ in range(self.N)]
        comps[1 % self.N] = self.rf([1]) if self.N > 1 else comps[0]
        return DaggerFunction(self, comps)

    def mul_f_power(self, r, m):
        """r * f^m."""
        r = self.rf_times_factor(r, 0, m)
        r = self.rf_times_factor(r, 1, (self.N - 1) * m)
        return self.rf_times_factor(r, 2, m)

    # -- Frobenius ---------------------------------------------------------

    def sigma_x(self):
        return [0] * self.p + [self.a] if self.p else None

    def sigma_poly(self, poly):
        """poly(a x^p)."""
        P = self.P
        out = [0] * ((len(poly) - 1) * self.p + 1) if poly else []
        ak = 1
        for i, c in enumerate(poly):
            out[i * self.p] = c * ak % P
            ak = ak * self.a % P
        return _trim(out)

    def binomial_terms(self):
        """Number of terms for binomial/geometric series in p * (integral)."""
        k = self.K + 2
        pole = self.p * (self.N + 1)
        while k - _ilog(max(2, k * pole * self.N), self.p) < self.K:
            k += 1
        return k

    def frobenius_u(self):
        """u = (f(a x^p) / f^p)^(1/N) as a rational function of x."""
        if "u" in self._cache:
            return self._cache["u"]
        P, p, N = self.P, self.p, self.N
        fp = [1]
        for _ in range(p):
            fp = _kron(fp, self.f, P)
        E = _padd(self.sigma_poly(self.f), _pneg(fp, P), P)
        if any(c % p for c in E):
            raise AssertionError("f(a x^p) - f^p is not divisible by p")
        E = [c // p for c in E]
        step = RatFn(E, (p, (N - 1) * p, p, 0), self.K)
        total = self.rf([1])
        term = self.rf([1])
        coeff = Fraction(1)
        for k in range(1, self.binomial_terms() + 1):
            coeff = coeff * (Fraction(1, N) - k + 1) / k
            term = self.rf_mul(term, step)
            c = _frac_mod(coeff * p ** k, P)
            if c:
                total = self.rf_add(total, self.rf_scale(term, c))
        self._cache["u"] = total
        return total

    def y_sigma(self):
        """y^sigma = y^p u = y^(p mod N) f^(p div N) u."""
        if "ys" not in self._cache:
            u = self.frobenius_u()
            r = self.mul_f_power(u, self.p // self.N)
            comps = [self.rf([]) for _ in range(self.N)]
            comps[self.p % self.N] = r
            self._cache["ys"] = DaggerFunction(self, comps)
        return self._cache["ys"]

    def frobenius_root_residual(self):
        """Valuation of u^N f^p - f(a x^p); at least K when u is the N-th root."""
        u = self.frobenius_u()
        uN = u
        for _ in range(self.N - 1):
            uN = self.rf_mul(uN, u)
        lhs = self.mul_f_power(uN, self.p)
        diff = self.rf_add(lhs, self.rf(_pneg(self.sigma_poly(self.f), self.P)))
        return min((_vp(c, self.p) for c in diff.num if c), default=self.K)

    def inverse_sigma_factor(self, i):
        """1/F_i(a x^p) = F_i^-p (1 + p d / F_i^p)^-1, d = (F_i(a x^p) - F_i^p)/p."""
        P, p = self.P, self.p
        Fi = self.factors[i]
        Fp = self.factor_power(i, p)
        d = _padd(self.sigma_poly(Fi), _pneg(Fp, P), P)
        if any(c % p for c in d):
            raise AssertionError("factor is not Frobenius-compatible")
        d = [c // p for c in d]
        exps = [0, 0, 0, 0]
        exps[i] = p
        step = RatFn(_pscale(d, -p, P), tuple(exps), self.K)
        total = self.rf([1])
        term = self.rf([1])
        for _ in range(self.binomial_terms()):
            term = self.rf_mul(term, step)
            total = self.rf_add(total, term)
        return self.rf_times_factor(total, i, -p)


def _ilog(n, p):
    k = 0
    while n >= p:
        n //= p
        k += 1
    return k


def _frac_mod(c, P):
    c = Fraction(c)
    return c.numerator * pow(c.denominator, -1, P) % P


class DaggerFunction:
    """sum_j y^j r_j(x) on the fiber."""

    __slots__ = ("fiber", "comps")

    def __init__(self, fiber, comps):
        self.fiber = fiber
        self.comps = list(comps)

    @property
    def prec(self):
        return min(c.prec for c in self.comps)

    def _wrap(self, other):
        if isinstance(other, DaggerFunction):
            return other
        return self.fiber.const(other)

    def __add__(self, other):
        o = self._wrap(other)
        fb = self.fiber
        return DaggerFunction(fb, [fb.rf_add(a, b) for a, b in zip(self.comps, o.comps)])

    __radd__ = __add__

    def __neg__(self):
        fb = self.fiber
        return DaggerFunction(fb, [fb.rf_neg(a) for a in self.comps])

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        fb = self.fiber
        if isinstance(other, int):
            return DaggerFunction(fb, [fb.rf_scale(a, other) for a in self.comps])
        o = self._wrap(other)
        N = fb.N
        out = [fb.rf([]) for _ in range(N)]
        for i, a in enumerate(self.comps):
            if a.is_zero():
                continue
            for j, b in enumerate(o.comps):
                if b.is_zero():
                    continue
                prod = fb.rf_mul(a, b)
                k = i + j
                if k >= N:
                    prod = fb.mul_f_power(prod, 1)
                    k -= N
                out[k] = fb.rf_add(out[k], prod)
        return DaggerFunction(fb, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = self.fiber.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def divp(self, k=1):
        fb = self.fiber
        return DaggerFunction(fb, [fb.rf_divp(a, k) if not a.is_zero() else
                                   RatFn([], a.exps, a.prec - k) for a in self.comps])

    def scale(self, c, prec=None):
        fb = self.fiber
        return DaggerFunction(fb, [fb.rf_scale(a, c, prec) for a in self.comps])

    def differential(self):
        """d(sum y^j r_j) = sum y^j (r_j' + (j/N) r_j f'/f) dx."""
        fb = self.fiber
        out = []
        dl = fb.dlog_f()
        for j, r in enumerate(self.comps):
            if r.is_zero():
                out.append(r)
                continue
            t = fb.rf_deriv(r)
            if j:
                t = fb.rf_add(t, fb.rf_scale(fb.rf_mul(r, dl), _frac_mod(Fraction(j, fb.N), fb.P)))
            out.append(t)
        return DaggerOneForm(fb, out)


class DaggerOneForm(DaggerFunction):
    """(sum_j y^j s_j(x)) dx."""

    def __add__(self, other):
        return DaggerOneForm(self.fiber, DaggerFunction.__add__(self, other).comps)

    def __sub__(self, other):
        return DaggerOneForm(self.fiber, DaggerFunction.__add__(self, -other).comps)

    def __neg__(self):
        return DaggerOneForm(self.fiber, DaggerFunction.__neg__(self).comps)

    def __mul__(self, other):
        return DaggerOneForm(self.fiber, DaggerFunction.__mul__(self, other).comps)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# the functions in a symbol


def g_factor(fiber, zeta):
    """y - zeta (1 - x)."""
    return fiber.y() - fiber.poly_x([zeta, -zeta])


def g_inverse(fiber, zeta):
    """1/(y - zeta(1-x)) = sum_j y^j (zeta(1-x))^(N-1-j) / (-(1-x)^(N-1) q)."""
    N, P = fiber.N, fiber.P
    comps = []
    for j in range(N):
        e = N - 1 - j
        c = (-pow(zeta, e, P)) % P
        r = fiber.rf([c], (0, N - 1, 0, 1))
        r = fiber.rf_times_factor(r, 1, e)
        comps.append(r)
    return DaggerFunction(fiber, comps)


def _log_one_plus_over_p(fiber, z, sign=-1):
    """sign * p^-1 log(1 + z) for z = 0 mod p, summed until terms drop below p^K."""
    p, K = fiber.p, fiber.K
    w = z.divp(1)
    total = fiber.const(0)
    power = fiber.const(1)
    k = 0
    pole = max(sum(c.exps) for c in z.comps) + 1
    while True:
        k += 1
        if k - 1 - _vp(k, p) - _ilog(k * pole * fiber.N, p) >= K:
            break
        power = power * w
        c = _frac_mod(Fraction(p ** (k - 1), 1) / k * (1 if k % 2 else -1) * sign, fiber.P)
        prec = K - _vp(k, p)
        total = total + power.scale(c, prec + (k - 1))
    return total


def _vp(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class SymbolFunction:
    """A unit on the fiber with its log^sigma, dlog and p^-1 sigma(dlog)."""

    def log_sigma(self, fiber):
        raise NotImplementedError

    def dlog(self, fiber):
        raise NotImplementedError

    def dlog_sigma_over_p(self, fiber):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantFunction(SymbolFunction):
    c: int

    def log_sigma(self, fiber):
        v = log_unit(fiber.ring(self.c))
        return fiber.const(v.lift())

    def dlog(self, fiber):
        return DaggerOneForm(fiber, fiber.const(0).comps)

    def dlog_sigma_over_p(self, fiber):
        return self.dlog(fiber)


@dataclass(frozen=True)
class H2Function(SymbolFunction):
    """h_2 = (1 - alpha) x^2 / (1 - x)^2."""

    def log_sigma(self, fiber):
        # log_unit(1-alpha) - 2 p^-1 log(a) - 2 log^sigma(1 - x)
        ring = fiber.ring
        c = log_unit(ring(1 - fiber.alpha)) - 2 * padic_log(ring(fiber.a)) / fiber.p
        P, p = fiber.P, fiber.p
        # log^sigma(1-x) = -p^-1 log((1 - a x^p)/(1-x)^p)
        num = _padd(fiber.sigma_poly([1, -1]), _pneg(fiber.factor_power(1, p), P), P)
        z = fiber.rational_x(fiber.rf(num, (0, p, 0, 0)))
        ls = _log_one_plus_over_p(fiber, z, sign=-1)
        return fiber.const(c.lift()) - ls * 2

    def dlog(self, fiber):
        r = fiber.rf_add(fiber.rf([2], (1, 0, 0, 0)), fiber.rf([2], (0, 1, 0, 0)))
        return DaggerOneForm(fiber, fiber.rational_x(r).comps)

    def dlog_sigma_over_p(self, fiber):
        # p^-1 sigma(2 dx/x + 2 dx/(1-x)) = 2 dx/x + 2 a x^(p-1) dx/(1 - a x^p)
        p = fiber.p
        inv = fiber.inverse_sigma_factor(1)
        t = fiber.rf_mul(fiber.rf([0] * (p - 1) + [2 * fiber.a]), inv)
        r = fiber.rf_add(fiber.rf([2], (1, 0, 0, 0)), t)
        return DaggerOneForm(fiber, fiber.rational_x(r).comps)


@dataclass(frozen=True)
class H1Function(SymbolFunction):
    """h_1 = (y - zeta1 (1-x)) / (y - zeta2 (1-x))."""

    zeta1: int
    zeta2: int

    def _parts(self, fiber):
        key = ("h1", self.zeta1, self.zeta2)
        if key not in fiber._cache:
            out = []
            for z in (self.zeta1, self.zeta2):
                g = g_factor(fiber, z)
                ginv = g_inverse(fiber, z)
                gs = fiber.y_sigma() - fiber.poly_x([z] + [0] * (fiber.p - 1) + [-z * fiber.a])
                out.append((z, g, ginv, gs))
            fiber._cache[key] = out
        return fiber._cache[key]

    def log_sigma(self, fiber):
        res = []
        for z, g, ginv, gs in self._parts(fiber):
            gp = g ** fiber.p
            zz = (gs - gp) * ginv ** fiber.p
            res.append(_log_one_plus_over_p(fiber, zz, sign=-1))
        return res[0] - res[1]

    def _dlog_g(self, fiber, z, ginv):
        # dg = (y f'/(N f) + z) dx
        ydl = fiber.y() * fiber.rational_x(fiber.rf_scale(fiber.dlog_f(), pow(fiber.N, -1, fiber.P)))
        return (ydl + z) * ginv

    def dlog(self, fiber):
        parts = self._parts(fiber)
        a = self._dlog_g(fiber, parts[0][0], parts[0][2])
        b = self._dlog_g(fiber, parts[1][0], parts[1][2])
        return DaggerOneForm(fiber, (a - b).comps)

    def dlog_sigma_over_p(self, fiber):
        # d(g^sigma)/g^sigma / p with 1/g^sigma = g^-p (1+z)^-1
        out = None
        for z, g, ginv, gs in self._parts(fiber):
            gp = g ** fiber.p
            ginvp = ginv ** fiber.p
            zz = (gs - gp) * ginvp
            geo = fiber.const(1)
            term = fiber.const(1)
            for _ in range(fiber.binomial_terms()):
                term = term * (-zz)
                geo = geo + term
            dgs = gs.differential().divp(1)
            val = DaggerFunction(fiber, dgs.comps) * ginvp * geo
            out = val if out is None else out - val
        return DaggerOneForm(fiber, out.comps)


def syntomic_one_form(fiber, f, g):
    """log^sigma(f) p^-1 dg^sigma/g^sigma - log^sigma(g) df/f."""
    first = f.log_sigma(fiber) * g.dlog_sigma_over_p(fiber)
    second = g.log_sigma(fiber) * f.dlog(fiber)
    return DaggerOneForm(fiber, (first - second).comps)


# ---------------------------------------------------------------------------
# reduction in cohomology


@dataclass
class ComponentClass:
    """Normal form of the n-component: residues at 0, 1, 1/alpha and the q-part."""

    n: int
    residues: list
    q_part: list
    precision: int


@dataclass
class RegulatorVector:
    coords: dict
    residues: dict
    precision: int
    meta: dict = field(default_factory=dict)

    def to_json(self):
        return {"coords": {str(n): {"omega": c[0].to_json(), "eta": c[1].to_json()}
                           for n, c in sorted(self.coords.items())},
                "residues": {str(n): [r.to_json() for r in v] for n, v in sorted(self.residues.items())},
                "precision": self.precision, **self.meta}


def reduction_loss(p, N, m):
    """Digits lost when reducing a pole (or polynomial part) of order m.

    Every step divides by (N(k-1) + n e)/N with k <= m, and the reduction of an
    integral form of pole order m has denominators at most p^floor(log_p(N m)).
    One digit on top covers the transfer of residues between points.
    """
    return _ilog(max(1, N * m), p) + 1 if m > 1 else 0


class _Reducer:
    """Scaled integer arithmetic: value = X / p^S with X mod p^(K+S)."""

    def __init__(self, fiber, n):
        self.p = fiber.p
        self.S = fiber.K
        self.W = fiber.p ** (fiber.K + self.S)
        self.theta = _frac_mod(Fraction(n, fiber.N), self.W)

    def div(self, X, d):
        """(X/p^S) / d for a nonzero rational d."""
        d = Fraction(d)
        v = _vp(d.numerator, self.p) - _vp(d.denominator, self.p)
        u = _frac_mod(d / Fraction(self.p) ** v, self.W)
        X = X * pow(u, -1, self.W) % self.W
        if v > 0:
            pv = self.p ** v
            if X % pv:
                raise PrecisionError("scaled division ran out of guard digits")
            X //= pv
        elif v < 0:
            X = X * self.p ** (-v) % self.W
        return X


def _q_mulmod(a, b, alpha_inv, W):
    """(a0 + a1 x)(b0 + b1 x) = digit + carry * q with q = alpha x^2 - 2x + 1."""
    a0, a1 = a
    b0, b1 = b
    carry = a1 * b1 % W * alpha_inv % W
    d1 = (a1 * b0 + a0 * b1 + 2 * carry) % W
    d0 = (a0 * b0 - carry) % W
    return (d0, d1), carry


def reduce_component(fiber, g, n):
    """Reduce g(x) dx / y^n (n = 0: g dx) to its normal form."""
    red = _Reducer(fiber, n)
    P, W, S, p, N = fiber.P, red.W, red.S, fiber.p, fiber.N
    scale = p ** S
    prec0 = g.prec
    theta = red.theta
    alpha = fiber.alpha % W
    alpha_inv = pow(alpha, -1, W)
    roots = [0, 1, alpha_inv]
    res = [0, 0, 0]
    res_prec = [prec0] * 3
    if g.is_zero():
        return ComponentClass(n, list(zip(res, res_prec)), [(0, prec0), (0, prec0)], prec0)
    num, exps = g.num, g.exps
    den = [1]
    for i in range(4):
        if exps[i]:
            den = _kron(den, fiber.factor_power(i, exps[i]), P)
    quo, rem = _pdivmod(num, den, P)

    def lift(c):
        return c * scale % W

    def transfer(k, value, prec):
        res[k] = (res[k] + value) % W
        res_prec[k] = min(res_prec[k], prec)

    # polynomial part: solve f h' - theta f' h = f Q from the top degree down.
    # For n = 0 the polynomial part is d of its primitive and leaves nothing.
    if quo and n:
        fQ = _kron(fiber.f, quo, P)
        fc = [c if c <= P // 2 else c - P for c in fiber.f]
        D = len(quo) - 1
        pr = prec0 - reduction_loss(p, N, D + N + 1)
        h = {}
        for T in range(D + N + 1, N, -1):
            acc = lift(fQ[T]) if T < len(fQ) else 0
            for i in range(N + 1):
                m = T + 1 - i
                if m in h and fc[i]:
                    acc = (acc - fc[i] * (m - theta * i) % W * h[m]) % W
            top = T - N
            h[top] = red.div(acc, fc[N + 1] * (Fraction(top) - Fraction(n * (N + 1), N)))
        for k, s in enumerate(roots):
            hv = sum(X * pow(s, m, W) for m, X in h.items()) % W
            transfer(k, theta * fiber.ram[k] % W * hv, pr)

    # q-poles: digits c_k (linear) of rem/den along q, orders m .. 2
    m = exps[3]
    q_res = [(0, prec0), (0, prec0)]
    if m:
        pr = prec0 - reduction_loss(p, N, m)
        digits = _q_principal(fiber, rem, exps)
        c = {k: [lift(digits[m - k][0]), lift(digits[m - k][1])] for k in range(1, m + 1)}
        qprime = ((-2) % W, 2 * alpha % W)
        qp_inv = _q_inverse(qprime, alpha, W)
        psi = _dlogf_q_digits(fiber, m) if n else None
        q_at = [(alpha * s * s - 2 * s + 1) % W for s in roots]
        Hq = [0, 0, 0]
        for k in range(m, 1, -1):
            ck = c[k]
            if ck[0] == 0 and ck[1] == 0:
                continue
            t, _ = _q_mulmod(ck, qp_inv, alpha_inv, W)
            b = (red.div(-t[0], k - 1), red.div(-t[1], k - 1))
            dig, carry = _q_mulmod(b, qprime, alpha_inv, W)
            # (k-1) b q' + c_k = gamma q
            gamma = (k - 1) * carry % W
            c[k - 1][0] = (c[k - 1][0] + gamma - b[1]) % W
            if n:
                for i in range(k - 1):
                    dg, cr = _q_mulmod(psi[i], b, alpha_inv, W)
                    j = k - 1 - i
                    c[j][0] = (c[j][0] + theta * dg[0]) % W
                    c[j][1] = (c[j][1] + theta * dg[1]) % W
                    if j > 1:
                        c[j - 1][0] = (c[j - 1][0] + theta * cr) % W
                for idx, s in enumerate(roots):
                    bs = (b[0] + b[1] * s) % W
                    Hq[idx] = (Hq[idx] + bs * pow(q_at[idx], -(k - 1), W)) % W
            c[k] = [0, 0]
        if n:
            for idx in range(3):
                transfer(idx, theta * fiber.ram[idx] % W * Hq[idx], pr)
        q_res = [(c[1][0], pr), (c[1][1], pr)]

    # poles at 0, 1, 1/alpha in the local coordinate t = x - s
    for i in range(3):
        e = exps[i]
        if not e:
            continue
        pr = prec0 - reduction_loss(p, N, e)
        ser = _local_principal(fiber, rem, exps, i)
        c = [0] * (e + 1)
        for k in range(1, e + 1):
            if e - k < len(ser):
                c[k] = lift(ser[e - k])
        s = roots[i]
        rser = [0] * e
        if n:
            # regular part of f'/f at s: sum over the other points of e' / (t + s - s')
            for j in range(3):
                if j == i:
                    continue
                dinv = pow((s - roots[j]) % W, -1, W)
                pw = dinv
                for ii in range(e):
                    rser[ii] = (rser[ii] + (-1) ** ii * fiber.ram[j] * pw) % W
                    pw = pw * dinv % W
        H = [0, 0, 0]
        for k in range(e, 1, -1):
            if c[k] == 0:
                continue
            b = red.div(c[k], -Fraction(k - 1) - Fraction(n * fiber.ram[i], N))
            c[k] = 0
            if n:
                tb = theta * b % W
                for ii in range(k - 1):
                    c[k - 1 - ii] = (c[k - 1 - ii] + tb * rser[ii]) % W
                for j in range(3):
                    if j != i:
                        H[j] = (H[j] + b * pow((roots[j] - s) % W, -(k - 1), W)) % W
        transfer(i, c[1], pr if e > 1 else prec0)
        if n:
            for j in range(3):
                if j != i:
                    transfer(j, theta * fiber.ram[j] % W * H[j], pr)
    prec = min(res_prec + [q[1] for q in q_res])
    return ComponentClass(n, list(zip(res, res_prec)), q_res, prec)


def _q_inverse(l, alpha_W, W):
    """Inverse of the linear l modulo q."""
    l0, l1 = l
    # (l1 x + l0)(m1 x + m0) with x^2 = (2x - 1)/alpha
    ai = pow(alpha_W, -1, W)
    # matrix of multiplication by l on basis (1, x)
    a11 = l0
    a21 = l1
    a12 = (-l1 * ai) % W
    a22 = (l0 + 2 * l1 * ai) % W
    det = (a11 * a22 - a12 * a21) % W
    di = pow(det, -1, W)
    # solve [a11 a12; a21 a22] [m0; m1] = [1; 0]
    m0 = a22 * di % W
    m1 = (-a21) * di % W
    return (m0, m1)


def _q_principal(fiber, rem, exps):
    """q-adic digits (linear polys) of rem / (x^e0 (1-x)^e1 (1-alpha x)^e2) mod q^e3."""
    P = fiber.P
    m = exps[3]
    q = fiber.factors[3]
    qm = fiber.factor_power(3, m)
    Wp = [1]
    for i in range(3):
        if exps[i]:
            Wp = _kron(Wp, fiber.factor_power(i, exps[i]), P)
    _, Wm = _pdivmod(Wp, qm, P)
    inv = _inverse_mod_qpower(fiber, Wm, m)
    _, Rm = _pdivmod(rem, qm, P)
    _, V = _pdivmod(_kron(Rm, inv, P), qm, P)
    return _q_digits(V, q, m, P)


def _inverse_mod_qpower(fiber, w, m):
    """Inverse of w modulo q^m by Newton iteration."""
    P = fiber.P
    q = fiber.factors[3]
    _, w1 = _pdivmod(w, q, P)
    w1 = w1 + [0] * (2 - len(w1))
    i0 = _q_inverse((w1[0], w1[1]), fiber.alpha, P)
    g = _trim([i0[0], i0[1]])
    k = 1
    while k < m:
        k = min(2 * k, m)
        qk = fiber.factor_power(3, k)
        _, wk = _pdivmod(w, qk, P)
        e = _pdivmod(_kron(wk, g, P), qk, P)[1]
        e = _padd(_pneg(e, P), [2], P)
        g = _pdivmod(_kron(g, e, P), qk, P)[1]
    return g


def _dlogf_q_digits(fiber, m):
    """q-adic digits of f'/f modulo q^m."""
    P = fiber.P
    qm = fiber.factor_power(3, m)
    _, fm = _pdivmod(fiber.f, qm, P)
    inv = _inverse_mod_qpower(fiber, fm, m)
    _, V = _pdivmod(_kron(_pderiv(fiber.f, P), inv, P), qm, P)
    return _q_digits(V, fiber.factors[3], m, P)


def _q_digits(V, q, m, P):
    out = []
    for _ in range(m):
        quo, r = _pdivmod(V, q, P)
        r = r + [0] * (2 - len(r))
        out.append((r[0], r[1]))
        V = quo
    return out


def _local_principal(fiber, rem, exps, i):
    """Series of rem/(prod F_j^e_j) * t^e_i at t = x - s_i, to order e_i."""
    P = fiber.P
    e = exps[i]
    s = fiber.roots[i]
    ser = _taylor_shift(rem, s, e, P)
    ser = _pscale(ser, pow(fiber.lead[i], -e, P), P)
    for j in range(4):
        if j == i or not exps[j]:
            continue
        Fj = _taylor_shift(fiber.factors[j], s, 3, P)
        ser = _pmul_trunc(ser, _series_pow(Fj, -exps[j], e, P), e, P)
    return ser


# ---------------------------------------------------------------------------
# identification with omega_n, eta_n


def component_form(fiber, form, n):
    """g with form's n-component = g dx / y^n (n = 0: g dx)."""
    if n == 0:
        return form.comps[0]
    j = fiber.N - n
    return fiber.mul_f_power(form.comps[j], 1)


def basis_forms(fiber, n):
    """omega_n, eta_n as g(x) for g dx / y^n."""
    om = fiber.rf_times_factor(fiber.rf([1]), 1, n - 1)
    et = fiber.rf_times_factor(fiber.rf([0, 1], (0, 0, 1, 0)), 1, n - 1)
    return om, et


def _class_vector(fiber, cc):
    """Coordinates killing the exact relation (1, N-1, 1): (rho_1 - (N-1) rho_0, rho_a - rho_0)."""
    ring = fiber.ring
    S = fiber.K
    vals = [ring.make(x, S, pr) for x, pr in cc.residues]
    return [vals[1] - vals[0] * (fiber.N - 1), vals[2] - vals[0]]


def _q_residues(fiber, cc):
    ring = fiber.ring
    S = fiber.K
    return [ring.make(x, S, pr) for x, pr in cc.q_part]


def reduce_to_basis(fiber, form, strict=True):
    """Coordinates of the form's class in {omega_n, eta_n} for n = 1..N-1."""
    coords = {}
    residues = {}
    precs = []
    for n in range(0, fiber.N):
        g = component_form(fiber, form, n)
        cc = reduce_component(fiber, g, n)
        qres = _q_residues(fiber, cc)
        if n == 0:
            ring = fiber.ring
            rs = [ring.make(x, fiber.K, pr) for x, pr in cc.residues]
            residues[0] = rs + qres
        else:
            residues[n] = qres
            v = _class_vector(fiber, cc)
            om, et = basis_forms(fiber, n)
            bo = _class_vector(fiber, reduce_component(fiber, om, n))
            be = _class_vector(fiber, reduce_component(fiber, et, n))
            det = bo[0] * be[1] - bo[1] * be[0]
            A = (v[0] * be[1] - v[1] * be[0]) / det
            B = (bo[0] * v[1] - bo[1] * v[0]) / det
            coords[n] = (A, B)
            precs.extend([A.prec, B.prec])
        precs.append(cc.precision)
    prec = min(precs)
    if strict:
        for n, rs in residues.items():
            for r in rs:
                if r.valuation() < min(prec, fiber.M):
                    raise ResidueError(f"nonzero residue in component {n}: {r}")
    return RegulatorVector(coords, residues, prec)


# ---------------------------------------------------------------------------


def embed_vector(fiber, vec):
    """The form sum_n A_n omega_n + B_n eta_n for integral coordinates."""
    comps = [fiber.rf([]) for _ in range(fiber.N)]
    for n, (A, B) in vec.coords.items():
        om, et = basis_forms(fiber, n)
        g = fiber.rf_add(fiber.rf_scale(om, _integral(A)), fiber.rf_scale(et, _integral(B)))
        comps[fiber.N - n] = fiber.mul_f_power(g, -1)
    return DaggerOneForm(fiber, comps)


def _integral(x):
    if x.valuation() < 0:
        raise DomainError("only integral coordinates can be re-embedded")
    return x.lift()


def fiber_regulator(p, N, alpha, zeta1=0, zeta2=1, a=1, M=6, guard=FIBER_GUARD,
                    order="h1h2", strict=True):
    """reg({h_1, h_2}) on X_alpha, alpha a residue class mod p (Teichmueller-lifted).

    zeta1, zeta2 index mu_N as g^i for the generator g used by roots_of_unity;
    order "h2h1" computes {h_2, h_1} instead.
    """
    if order not in ("h1h2", "h2h1"):
        raise DomainError("order must be h1h2 or h2h1")
    if (zeta1 - zeta2) % N == 0:
        raise DomainError("zeta_1 and zeta_2 must differ")
    ring = unramified_ring(p, 1, M + guard)
    fb = Fiber(p, N, ring.teichmuller(alpha % p).lift(), M=M, guard=guard, a=a)
    mu = ring.roots_of_unity(N)
    h1 = H1Function(mu[zeta1 % N].lift(), mu[zeta2 % N].lift())
    h2 = H2Function()
    f, g = (h1, h2) if order == "h1h2" else (h2, h1)
    vec = reduce_to_basis(fb, syntomic_one_form(fb, f, g), strict=strict)
    vec.meta = {"p": p, "N": N, "alpha": alpha % p, "a": a, "zeta1": zeta1 % N,
                "zeta2": zeta2 % N, "order": order, "M": M}
    return vec
