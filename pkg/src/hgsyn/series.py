"""Truncated Laurent series in lambda with p-adic coefficients.

A TruncSeries knows the coefficients of lambda^lo .. lambda^(L-1); everything
from lambda^L on is unknown.  Setting L = None marks an exact Laurent
polynomial (all omitted coefficients are exactly zero), which is how
lambda, 1 - lambda and the truncations F_{n,<p} are carried around.
"""

import math
from dataclasses import dataclass

from .errors import DomainError, EvaluationDomainError, NotIntegrable, NotInvertible
from .padic_core import PadicScalar


@dataclass(frozen=True)
class SigmaLift:
    """Frobenius lift lambda -> a * lambda^p with a = 1 mod p."""

    a: PadicScalar

    def __post_init__(self):
        a = self.a
        if not isinstance(a, PadicScalar):
            raise TypeError("a must be a PadicScalar")
        if a.ring.d != 1:
            raise DomainError("the lift parameter must lie in Z_p")
        if not (a - 1).valuation() >= 1:
            raise DomainError("lift parameter must be 1 mod p")

    @classmethod
    def standard(cls, ring, shift=0):
        """a = 1 + shift*p, the lifts used throughout (shift 0 or 1)."""
        return cls(ring(1 + shift * ring.p))

    @property
    def p(self):
        return self.a.ring.p

    def lam_sigma(self, ring):
        """The exact series a*lambda^p."""
        return TruncSeries.monomial(ring, self.p, ring(self.a))

    def dlam_sigma(self, ring):
        """d(lambda^sigma)/d(lambda) = a p lambda^(p-1)."""
        return TruncSeries.monomial(ring, self.p - 1, ring(self.a) * self.p)

    def compatible_point(self, residue, ring):
        """The point alpha with residue `residue` satisfying a*alpha^p = sigma(alpha).

        For a = 1 this is the Teichmüller lift.  In general alpha = c * w with w
        Teichmüller and c in Z_p solving c = a c^p, i.e. c = a^(-1/(p-1)).
        """
        w = ring.teichmuller(residue)
        a = ring(self.a)
        c = ring.one()
        for _ in range(ring.M + 2):
            c = a * c ** self.p
        return c * w

    def is_compatible(self, alpha):
        lhs = alpha.ring(self.a) * alpha ** self.p
        return lhs == alpha.frobenius()


def _inf(x):
    return math.inf if x is None else x


class TruncSeries:
    __slots__ = ("ring", "lo", "coeffs", "L")

    def __init__(self, ring, coeffs, lo=0, L=None, exact=False):
        self.ring = ring
        cs = [c if isinstance(c, PadicScalar) and c.ring is ring else ring(c) for c in coeffs]
        if exact:
            self.L = None
        else:
            if L is None:
                L = lo + len(cs)
            if L < lo:
                cs = []
                lo = L
            elif len(cs) > L - lo:
                cs = cs[:L - lo]
            elif len(cs) < L - lo:
                cs = cs + [ring.zero()] * (L - lo - len(cs))
            self.L = L
        self.lo = lo
        self.coeffs = cs

    # constructors --------------------------------------------------------
    @classmethod
    def monomial(cls, ring, k, c=1):
        return cls(ring, [c], lo=k, exact=True)

    @classmethod
    def constant(cls, ring, c):
        return cls(ring, [c], exact=True)

    @classmethod
    def polynomial(cls, ring, coeffs, lo=0):
        return cls(ring, list(coeffs), lo=lo, exact=True)

    @classmethod
    def geometric(cls, ring, L):
        """(1 - lambda)^-1 to order L."""
        return cls(ring, [1] * L, L=L)

    # queries -------------------------------------------------------------
    @property
    def exact(self):
        return self.L is None

    @property
    def hi(self):
        """One past the last materialized exponent."""
        return self.lo + len(self.coeffs)

    def known(self):
        return _inf(self.L)

    def __getitem__(self, k):
        if k < self.lo:
            return self.ring.zero()
        if self.L is not None and k >= self.L:
            raise IndexError(f"coefficient {k} is beyond the truncation O(lambda^{self.L})")
        i = k - self.lo
        if i >= len(self.coeffs):
            return self.ring.zero()
        return self.coeffs[i]

    def items(self):
        for i, c in enumerate(self.coeffs):
            yield self.lo + i, c

    def min_prec(self, upto=None):
        """Smallest coefficient precision below lambda^upto."""
        ps = [c.prec for k, c in self.items() if upto is None or k < upto]
        return min(ps) if ps else self.ring.M

    def valuation(self):
        """Minimal p-adic valuation over the known coefficients."""
        vs = [c.valuation() for c in self.coeffs if not c.is_zero()]
        return min(vs) if vs else self.ring.M

    def order(self):
        """lambda-adic order: first exponent with a nonzero coefficient."""
        for k, c in self.items():
            if not c.is_zero():
                return k
        return self.known()

    def truncate(self, L):
        """Forget everything from lambda^L on."""
        L = min(L, self.known())
        if L == math.inf:
            return self
        cs = self.coeffs[:max(0, L - self.lo)]
        return TruncSeries(self.ring, cs, lo=min(self.lo, L), L=L)

    def with_prec(self, m):
        cs = [c.with_prec(m) for c in self.coeffs]
        return TruncSeries(self.ring, cs, lo=self.lo, L=self.L, exact=self.exact)

    def change_ring(self, ring):
        cs = [ring(c) for c in self.coeffs]
        return TruncSeries(ring, cs, lo=self.lo, L=self.L, exact=self.exact)

    def deficit(self, digits, upto=None):
        """Worst shortfall below p^digits among coefficients below lambda^upto.

        Returns 0 when every coefficient in range is divisible by p^digits and
        known at least that far; otherwise the largest value of
        digits - min(valuation, prec).
        """
        worst = 0
        for k, c in self.items():
            if upto is not None and k >= upto:
                break
            worst = max(worst, digits - min(c.valuation(), c.prec))
        return worst

    def is_zero_to(self, digits, upto=None):
        return self.deficit(digits, upto) <= 0

    def __repr__(self):
        shown = " + ".join(f"({c})*l^{k}" for k, c in list(self.items())[:4])
        tail = "" if self.exact else f" + O(l^{self.L})"
        return f"TruncSeries[{shown}{' + ...' if len(self.coeffs) > 4 else ''}{tail}]"

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            if other.ring is not self.ring:
                return other.change_ring(self.ring)
            return other
        if isinstance(other, (int, PadicScalar)) or type(other).__name__ == "Fraction":
            return TruncSeries.constant(self.ring, self.ring(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        L = min(self.known(), o.known())
        lo = min(self.lo, o.lo)
        hi = max(self.hi, o.hi)
        if L != math.inf:
            hi = L
        cs = [self[k] + o[k] for k in range(lo, hi)]
        if L == math.inf:
            return TruncSeries(self.ring, cs, lo=lo, exact=True)
        return TruncSeries(self.ring, cs, lo=lo, L=L)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.ring, [-c for c in self.coeffs], lo=self.lo, L=self.L,
                           exact=self.exact)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = self.ring(c)
        return TruncSeries(self.ring, [x * c for x in self.coeffs], lo=self.lo, L=self.L,
                           exact=self.exact)

    def shift(self, k):
        """Multiply by lambda^k."""
        L = None if self.exact else self.L + k
        return TruncSeries(self.ring, self.coeffs, lo=self.lo + k, L=L, exact=self.exact)

    def __mul__(self, other):
        if isinstance(other, (int, PadicScalar)) or type(other).__name__ == "Fraction":
            return self.scale(other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        lo = self.lo + o.lo
        L = min(self.known() + o.lo, o.known() + self.lo)
        if L == math.inf:
            count = len(self.coeffs) + len(o.coeffs) - 1
        else:
            count = L - lo
        cs = _convolve(self.ring, self.coeffs, o.coeffs, max(count, 0))
        if L == math.inf:
            return TruncSeries(self.ring, cs, lo=lo, exact=True)
        return TruncSeries(self.ring, cs, lo=lo, L=L)

    __rmul__ = __mul__

    def invert(self, L=None):
        """Multiplicative inverse; the lowest nonzero coefficient must be a unit.

        For exact input the truncation L of the result must be given.
        """
        k0 = None
        for k, c in self.items():
            if not c.is_zero():
                k0 = k
                break
        if k0 is None:
            raise NotInvertible("series is zero to known precision")
        g0 = self[k0]
        if not g0.is_unit():
            raise NotInvertible("leading coefficient is not a unit")
        n = self.known() - k0
        if n == math.inf:
            if L is None:
                raise DomainError("inverting an exact series needs a truncation")
            n = L + k0
        elif L is not None:
            n = min(n, L + k0)
        g = [self[k0 + j] if k0 + j < self.hi else self.ring.zero() for j in range(n)]
        inv0 = self.ring.one() / g0
        h = [inv0]
        for m in range(1, n):
            acc = self.ring.zero()
            for j in range(1, m + 1):
                if not g[j].is_zero() or g[j].prec < self.ring.M:
                    acc = acc + g[j] * h[m - j]
            h.append(-(acc * inv0))
        return TruncSeries(self.ring, h, lo=-k0, L=n - k0)

    def __truediv__(self, other):
        if isinstance(other, (int, PadicScalar)) or type(other).__name__ == "Fraction":
            return self.scale(self.ring.one() / self.ring(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        L = None
        if o.exact:
            L = self.known() - self.lo if self.known() != math.inf else None
            if L is None:
                raise DomainError("exact / exact needs an explicit truncation")
        return self * o.invert(L)

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        out = TruncSeries.constant(self.ring, 1)
        for _ in range(e):
            out = out * self
        return out

    # calculus ------------------------------------------------------------
    def derivative(self):
        cs = [c * k for k, c in self.items()]
        if self.exact:
            return TruncSeries(self.ring, cs, lo=self.lo - 1, exact=True)
        return TruncSeries(self.ring, cs, lo=self.lo - 1, L=self.L - 1)

    def primitive(self, c0=0):
        """Primitive with constant term c0; coefficient k+1 is c_k/(k+1)."""
        res = self[-1] if self.lo <= -1 and self.known() > -1 else None
        if res is not None and not res.is_zero():
            raise NotIntegrable(f"nonzero lambda^-1 coefficient {res}")
        c0 = self.ring(c0)
        terms = {0: c0}
        for k, c in self.items():
            if k == -1:
                continue
            terms[k + 1] = terms.get(k + 1, self.ring.zero()) + c / (k + 1)
        lo = min(terms)
        hi = max(terms) + 1
        cs = [terms.get(k, self.ring.zero()) for k in range(lo, hi)]
        if self.exact:
            return TruncSeries(self.ring, cs, lo=lo, exact=True)
        return TruncSeries(self.ring, cs, lo=lo, L=self.L + 1)

    def sigma_substitute(self, lift, L=None):
        """f(a*lambda^p) with Frobenius applied to the coefficients.

        A series known to O(lambda^L) becomes known to O(lambda^(pL)); the
        optional L caps the recorded truncation of the result.
        """
        p = lift.p
        a = self.ring(lift.a)
        out_L = None if self.exact else p * self.L
        if L is not None:
            out_L = L if out_L is None else min(out_L, L)
        terms = {}
        apow = {0: self.ring.one()}
        for k, c in self.items():
            if out_L is not None and p * k >= out_L:
                break
            if k not in apow:
                apow[k] = a ** k
            terms[p * k] = c.frobenius() * apow[k]
        lo = p * self.lo
        if out_L is not None and lo > out_L:
            lo = out_L
        hi = max(terms) + 1 if terms else lo
        cs = [terms.get(k, self.ring.zero()) for k in range(lo, hi)]
        if out_L is None:
            return TruncSeries(self.ring, cs, lo=lo, exact=True)
        return TruncSeries(self.ring, cs, lo=lo, L=out_L)

    def compose_polynomial(self, poly_coeffs):
        """P(f) for a polynomial P given by its coefficients (Horner)."""
        out = TruncSeries.constant(self.ring, 0)
        for c in reversed(list(poly_coeffs)):
            out = out * self + TruncSeries.constant(self.ring, self.ring(c))
        return out

    # evaluation ----------------------------------------------------------
    def evaluate(self, alpha, coeff_floor=None, decay=None):
        """Sum c_k alpha^k with a precision derived from the tail bound.

        * exact series: finite sum, any alpha.
        * |alpha| < 1: the unknown tail is bounded by L*v(alpha) + coeff_floor,
          where coeff_floor bounds the valuation of the unknown coefficients
          (default: the smaller of 0 and the known coefficients' minimum).
        * |alpha| = 1: only with `decay`, a certified nondecreasing lower bound
          k -> v_p(c_k) for k >= L.
        """
        ring = alpha.ring if alpha.ring.d >= self.ring.d else self.ring
        alpha = ring(alpha)
        v = alpha.valuation()
        if self.exact:
            tail = math.inf
        elif v >= 1:
            if coeff_floor is None:
                coeff_floor = min(0, self.valuation())
            tail = self.L * v + coeff_floor
        elif v == 0 and decay is not None:
            tail = decay(self.L)
        else:
            raise EvaluationDomainError(
                "evaluation needs |alpha| < 1 or a certified coefficient decay bound")
        total = ring.zero()
        if self.coeffs:
            power = alpha ** self.lo
            for c in self.coeffs:
                total = total + ring(c) * power
                power = power * alpha
        if tail != math.inf:
            total = total.with_prec(int(tail))
        return total

    def to_json(self):
        return {"lo": self.lo, "L": self.L if self.L is not None else self.hi,
                "exact": self.exact, "coeffs": [c.to_json() for c in self.coeffs]}


def _convolve(ring, a, b, count):
    """First `count` coefficients of the product of two coefficient lists.

    For Z_p the raw integers are convolved in one big-integer product
    (Kronecker substitution); per-coefficient precision follows the rule
    prec(sum a_i b_j) = min over pairs of min(prec a_i + v b_j, prec b_j + v a_i).
    """
    if count <= 0:
        return []
    a = a[:count]
    b = b[:count]
    if ring.d != 1 or not a or not b:
        out = []
        for k in range(count):
            acc = ring.zero()
            for i in range(max(0, k - len(b) + 1), min(k + 1, len(a))):
                acc = acc + a[i] * b[k - i]
            out.append(acc)
        return out
    p = ring.p
    sa = max(c.shift for c in a)
    sb = max(c.shift for c in b)
    ra = [c.raw * p ** (sa - c.shift) for c in a]
    rb = [c.raw * p ** (sb - c.shift) for c in b]
    va = [c.valuation() for c in a]
    vb = [c.valuation() for c in b]
    pa = [c.prec for c in a]
    pb = [c.prec for c in b]
    prod = _kronecker(ra, rb, count)
    out = []
    big = ring.M
    for k in range(count):
        lo_i = max(0, k - len(b) + 1)
        hi_i = min(k + 1, len(a))
        pr = big
        for i in range(lo_i, hi_i):
            j = k - i
            x = pa[i] + vb[j]
            y = pb[j] + va[i]
            if x < pr:
                pr = x
            if y < pr:
                pr = y
        if lo_i >= hi_i:
            out.append(ring.zero())
        else:
            out.append(ring.make(prod[k], sa + sb, pr))
    return out


def _kronecker(a, b, count):
    """Integer convolution of nonnegative lists via one big multiplication."""
    ma = max(a)
    mb = max(b)
    if ma == 0 or mb == 0:
        return [0] * count
    width = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 1
    A = 0
    for x in reversed(a):
        A = (A << width) | x
    B = 0
    for x in reversed(b):
        B = (B << width) | x
    C = A * B
    mask = (1 << width) - 1
    out = []
    for _ in range(count):
        out.append(C & mask)
        C >>= width
    return out
