"""Fixed-precision arithmetic in Z_p, Q_p and unramified extensions Z_q.

Elements of Z_q are stored as coordinate tuples in the power basis of a
Teichmüller generator t (a primitive (q-1)-th root of unity), so Frobenius
is the substitution t -> t^p.  For d = 1 the coordinate is a plain int.

A value is raw / p^shift with raw known modulo p^(prec + shift); `prec` is
the absolute precision.  Precision propagates pessimistically: sums keep the
smaller precision, products pick up the other factor's valuation, and
division by u*p^v costs v digits.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .errors import DomainError, PrecisionError, UnsupportedExtension

MAX_DEGREE = 4
MODULUS_GUARD = 16


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_factors(n):
    out = []
    i = 2
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            while n % i == 0:
                n //= i
        i += 1
    if n > 1:
        out.append(n)
    return out


def vp(n, p):
    """p-adic valuation of a nonzero integer (or Fraction)."""
    if isinstance(n, Fraction):
        return vp(n.numerator, p) - vp(n.denominator, p)
    if n == 0:
        raise DomainError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PrimeContext:
    """The prime p, the exponent N of the curve and the working precision M."""

    p: int
    N: int
    M: int = 12

    def __post_init__(self):
        p, N = self.p, self.N
        if not is_prime(p) or p < 3:
            raise DomainError(f"p={p} must be an odd prime")
        if N < 2:
            raise DomainError(f"N={N} must be at least 2")
        if (p - 1) % N:
            raise DomainError(f"p={p} is not 1 mod N={N}")
        if (N * (N - 1)) % p == 0:
            raise DomainError(f"p={p} divides N(N-1)")
        if self.M < 1:
            raise DomainError("precision M must be positive")

    @property
    def ring(self):
        return unramified_ring(self.p, 1, self.M)


# ---------------------------------------------------------------------------
# polynomials over Z/p^k (coefficient lists, low degree first)


def _polymulmod(a, b, mod):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return [c % mod for c in out]


def _polyrem_monic(a, m, mod):
    """Remainder of a modulo the monic polynomial m."""
    a = list(a)
    d = len(m) - 1
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i] % mod
        if c:
            for j in range(d):
                a[i - d + j] -= c * m[j]
        a[i] = 0
    return [c % mod for c in a[:d]] + [0] * (d - len(a[:d]))


def _powmod_poly(base, e, m, mod):
    result = [1] + [0] * (len(m) - 2)
    b = _polyrem_monic(base, m, mod)
    while e:
        if e & 1:
            result = _polyrem_monic(_polymulmod(result, b, mod), m, mod)
        e >>= 1
        if e:
            b = _polyrem_monic(_polymulmod(b, b, mod), m, mod)
    return result


def _det_poly(mat, mod):
    """Determinant of a small matrix whose entries are polynomials (lists)."""
    d = len(mat)
    total = [0]
    for perm in permutations(range(d)):
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        term = [1]
        for i in range(d):
            term = _polymulmod(term, mat[i][perm[i]], mod)
        if inv % 2:
            term = [-c for c in term]
        n = max(len(total), len(term))
        total = [(total[k] if k < len(total) else 0) + (term[k] if k < len(term) else 0)
                 for k in range(n)]
    return [c % mod for c in total]


def primitive_polynomial(p, d):
    """Smallest monic degree-d polynomial over F_p whose root generates F_q^x.

    Coefficients are returned low degree first.  The root has order exactly
    q-1 in F_p[t]/(P), which forces P to be irreducible.
    """
    q = p ** d
    factors = prime_factors(q - 1)
    for code in range(p ** d):
        low = [(code // p ** i) % p for i in range(d)]
        if low[0] == 0:
            continue
        m = low + [1]
        t = [0, 1]
        if _powmod_poly(t, q - 1, m, p) != [1] + [0] * (d - 1):
            continue
        if all(_powmod_poly(t, (q - 1) // ell, m, p) != [1] + [0] * (d - 1) for ell in factors):
            return tuple(m)
    raise UnsupportedExtension(f"no primitive polynomial of degree {d} over F_{p}")


def _mult_matrix(elem, m, mod):
    """Matrix of multiplication by elem on Z[t]/(m), columns are images of t^j."""
    d = len(m) - 1
    cols = []
    for j in range(d):
        basis = [0] * j + [1]
        cols.append(_polyrem_monic(_polymulmod(elem, basis, mod), m, mod))
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def teichmuller_modulus(p, d, prec):
    """Minimal polynomial over Z_p (mod p^prec) of the Teichmüller generator.

    Starting from the residual primitive polynomial, each step replaces P by
    the characteristic polynomial of y^p acting on Z[y]/(P); since Frobenius
    permutes the Teichmüller roots this gains one p-adic digit per step.
    """
    m = list(primitive_polynomial(p, d))
    if d == 1:
        return m
    mod = p ** prec
    for _ in range(prec):
        yp = _polyrem_monic([0] * p + [1], m, mod)
        A = _mult_matrix(yp, m, mod)
        char = [[[(-A[i][j]) % mod, 1] if i == j else [(-A[i][j]) % mod] for j in range(d)]
                for i in range(d)]
        m = _det_poly(char, mod)
        m = (m + [0] * (d + 1))[:d + 1]
    return m


# ---------------------------------------------------------------------------


class UnramifiedRing:
    """Z_q = Z_p[t]/(P) for the Teichmüller minimal polynomial P, at cap M."""

    def __init__(self, p, d, M):
        if not is_prime(p) or p < 3:
            raise DomainError(f"p={p} must be an odd prime")
        if not 1 <= d <= MAX_DEGREE:
            raise UnsupportedExtension(f"degree {d} outside 1..{MAX_DEGREE}")
        if M < 1:
            raise DomainError("precision must be positive")
        self.p, self.d, self.M = p, d, M
        self.q = p ** d
        self.residue_poly = primitive_polynomial(p, d)
        self.mod_prec = M + MODULUS_GUARD
        self._mod = p ** self.mod_prec
        self.modulus = tuple(teichmuller_modulus(p, d, self.mod_prec))
        if d > 1:
            self._frob = [tuple(_powmod_poly([0, 1], i * p, list(self.modulus), self._mod))
                          for i in range(d)]
        else:
            self._frob = None
        self._gen = None

    def __repr__(self):
        return f"UnramifiedRing(p={self.p}, d={self.d}, M={self.M})"

    # raw helpers ---------------------------------------------------------
    def _rmod(self, raw, k):
        mod = self.p ** k if k > 0 else 1
        if self.d == 1:
            return raw % mod
        return tuple(c % mod for c in raw)

    def _rval(self, raw, cap):
        """Valuation of raw, capped at `cap`."""
        p = self.p
        coords = (raw,) if self.d == 1 else raw
        best = cap
        for c in coords:
            if c == 0:
                continue
            v = 0
            while v < best and c % p == 0:
                c //= p
                v += 1
            best = min(best, v)
        return best

    def _radd(self, a, b):
        if self.d == 1:
            return a + b
        return tuple(x + y for x, y in zip(a, b))

    def _rscale(self, a, k):
        if self.d == 1:
            return a * k
        return tuple(x * k for x in a)

    def _rdivp(self, a, k):
        pk = self.p ** k
        if self.d == 1:
            return a // pk
        return tuple(x // pk for x in a)

    def _rmul(self, a, b, k):
        if self.d == 1:
            return a * b
        mod = self.p ** max(k, 1)
        return tuple(_polyrem_monic(_polymulmod(a, b, mod), self.modulus, mod))

    def _rinv_unit(self, u, k):
        """Inverse of a unit raw value modulo p^k."""
        mod = self.p ** max(k, 1)
        if self.d == 1:
            return pow(u, -1, mod)
        A = _mult_matrix(list(u), list(self.modulus), mod)
        det = _det_poly([[[x] for x in row] for row in A], mod)[0] % mod
        if det % self.p == 0:
            raise ZeroDivisionError("not a unit")
        dinv = pow(det, -1, mod)
        # solve A x = e_0 by Cramer's rule (d <= 4)
        d = self.d
        sol = []
        for j in range(d):
            Aj = [[([1] if i == 0 else [0]) if c == j else [A[i][c]] for c in range(d)]
                  for i in range(d)]
            sol.append(_det_poly(Aj, mod)[0] * dinv % mod)
        return tuple(sol)

    def _rfrob(self, a, k, times=1):
        if self.d == 1:
            return a
        mod = self.p ** max(k, 1)
        for _ in range(times % self.d):
            acc = [0] * self.d
            for i, c in enumerate(a):
                if c:
                    for j, e in enumerate(self._frob[i]):
                        acc[j] += c * e
            a = tuple(x % mod for x in acc)
        return a

    def _zero_raw(self):
        return 0 if self.d == 1 else (0,) * self.d

    # constructors --------------------------------------------------------
    def make(self, raw, shift, prec):
        return PadicScalar._make(self, raw, shift, prec)

    def __call__(self, x, prec=None):
        prec = self.M if prec is None else min(prec, self.M)
        p = self.p
        if isinstance(x, PadicScalar):
            if x.ring is self:
                return x.with_prec(prec)
            if x.ring.p != p:
                raise DomainError("mixing different primes")
            if x.ring.d == self.d:
                return self.make(x.raw, x.shift, min(prec, x.prec))
            if x.ring.d == 1:
                raw = (x.raw,) + (0,) * (self.d - 1)
                return self.make(raw, x.shift, min(prec, x.prec))
            if self.d == 1:
                if any(x.raw[1:]):
                    raise DomainError("element does not lie in Z_p")
                return self.make(x.raw[0], x.shift, min(prec, x.prec))
            raise DomainError("no embedding between these rings")
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, int):
            raw = x if self.d == 1 else (x,) + (0,) * (self.d - 1)
            return self.make(raw, 0, prec)
        if isinstance(x, Fraction):
            if x == 0:
                return self.zero(prec)
            num, den = x.numerator, x.denominator
            v = vp(num, p) - vp(den, p)
            num //= p ** vp(num, p)
            den //= p ** vp(den, p)
            rel = prec - v
            if rel <= 0:
                return self.zero(prec)
            unit = num * pow(den, -1, p ** rel)
            if v >= 0:
                return self.make(self._embed_int(unit * p ** v), 0, prec)
            return self.make(self._embed_int(unit), -v, prec)
        if isinstance(x, (tuple, list)):
            if len(x) != self.d:
                raise DomainError(f"expected {self.d} coordinates")
            if self.d == 1:
                return self(x[0], prec)
            return self.make(tuple(int(c) for c in x), 0, prec)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    def _embed_int(self, n):
        return n if self.d == 1 else (n,) + (0,) * (self.d - 1)

    def zero(self, prec=None):
        return self.make(self._zero_raw(), 0, self.M if prec is None else prec)

    def one(self, prec=None):
        return self(1, prec)

    def gen(self):
        """The Teichmüller generator t, a primitive (q-1)-th root of unity."""
        if self._gen is None:
            if self.d == 1:
                g = self.residue_poly
                self._gen = self.teichmuller((-g[0]) % self.p)
            else:
                self._gen = self.make((0, 1) + (0,) * (self.d - 2), 0, self.M)
        return self._gen

    def teichmuller(self, c):
        """Unique (q-1)-th root of unity congruent to the residue c."""
        p, q = self.p, self.q
        if isinstance(c, PadicScalar):
            c = c.residue()
        if self.d == 1 and isinstance(c, (tuple, list)):
            c = c[0]
        if isinstance(c, (tuple, list)):
            c = tuple(int(x) % p for x in c)
            if not any(c):
                raise DomainError("Teichmüller lift of 0")
        else:
            c = int(c) % p
            if c == 0:
                raise DomainError("Teichmüller lift of 0")
        x = self(c)
        for _ in range(self.M + 1):
            x = x ** q
        return x

    def roots_of_unity(self, order):
        if (self.q - 1) % order:
            raise UnsupportedExtension(f"{order} does not divide {self.q - 1}")
        z = self.gen() ** ((self.q - 1) // order)
        out = [self.one()]
        for _ in range(order - 1):
            out.append(out[-1] * z)
        return out

    def random_element(self, rng, prec=None, unit=False):
        prec = self.M if prec is None else prec
        mod = self.p ** prec
        while True:
            if self.d == 1:
                raw = rng.randrange(mod)
            else:
                raw = tuple(rng.randrange(mod) for _ in range(self.d))
            x = self.make(raw, 0, prec)
            if not unit or x.is_unit():
                return x


@lru_cache(maxsize=None)
def unramified_ring(p, d, M):
    return UnramifiedRing(p, d, M)


def extension_degree_for(p, order):
    for d in range(1, MAX_DEGREE + 1):
        if (p ** d - 1) % order == 0:
            return d
    raise UnsupportedExtension(f"mu_{order} needs degree > {MAX_DEGREE} over Q_{p}")


def roots_of_unity(p, order, M):
    """All roots of unity of the given order, in the smallest Z_q containing them."""
    d = extension_degree_for(p, order)
    return unramified_ring(p, d, M).roots_of_unity(order)


def teichmuller(p, c, M, d=1):
    return unramified_ring(p, d, M).teichmuller(c)


# ---------------------------------------------------------------------------


class PadicScalar:
    __slots__ = ("ring", "raw", "shift", "prec")

    @staticmethod
    def _make(ring, raw, shift, prec):
        prec = min(prec, ring.M)
        if ring.d > 1 and prec + shift > ring.mod_prec:
            prec = ring.mod_prec - shift
        raw = ring._rmod(raw, prec + shift)
        p = ring.p
        if ring.d == 1:
            if raw == 0:
                shift = 0
            while shift > 0 and raw % p == 0:
                raw //= p
                shift -= 1
        else:
            if not any(raw):
                shift = 0
            while shift > 0 and all(c % p == 0 for c in raw):
                raw = tuple(c // p for c in raw)
                shift -= 1
        self = object.__new__(PadicScalar)
        self.ring = ring
        self.raw = raw
        self.shift = shift
        self.prec = prec
        return self

    # basic queries -------------------------------------------------------
    def valuation(self):
        """Exact valuation, or `prec` if the value is zero at this precision."""
        if self.shift:
            return -self.shift
        return self.ring._rval(self.raw, self.prec)

    def is_zero(self):
        return self.shift == 0 and self.ring._rval(self.raw, self.prec) >= self.prec

    def is_unit(self):
        return self.prec > 0 and self.valuation() == 0

    def relprec(self):
        return self.prec - self.valuation()

    def with_prec(self, m):
        if m >= self.prec:
            return self
        return PadicScalar._make(self.ring, self.raw, self.shift, m)

    def residue(self):
        if self.shift:
            raise DomainError("residue of a non-integral element")
        return self.ring._rmod(self.raw, 1)

    def coefficients(self):
        """Coordinates as Fractions in the basis 1, t, ..., t^(d-1)."""
        den = self.ring.p ** self.shift
        coords = (self.raw,) if self.ring.d == 1 else self.raw
        return [Fraction(c, den) for c in coords]

    def to_fraction(self):
        if self.ring.d > 1 and any(self.raw[1:]):
            raise DomainError("element does not lie in Q_p")
        return self.coefficients()[0]

    def lift(self):
        """Integer representative (d=1, integral elements only)."""
        if self.shift:
            raise DomainError("non-integral element")
        return self.raw if self.ring.d == 1 else self.raw[0]

    def to_json(self):
        p = self.ring.p
        coords = (self.raw,) if self.ring.d == 1 else self.raw
        if self.shift:
            strs = [f"{c}/{p}^{self.shift}" for c in coords]
        else:
            strs = [str(c) for c in coords]
        value = strs[0] if self.ring.d == 1 else "(" + ", ".join(strs) + ")"
        return {"value": value, "prec": self.prec, "d": self.ring.d, "coeffs": strs}

    def __repr__(self):
        v = self.to_json()["value"]
        return f"{v} + O({self.ring.p}^{self.prec})"

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.ring is self.ring:
                return other
            if other.ring.p == self.ring.p and other.ring.d == self.ring.d:
                return self.ring.make(other.raw, other.shift, other.prec)
            if other.ring.d == 1 or self.ring.d == 1:
                if other.ring.d > self.ring.d:
                    raise TypeError("coerce the smaller ring into the larger one")
                return self.ring(other)
            raise TypeError("incompatible rings")
        if isinstance(other, (int, Fraction)):
            return self.ring(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if isinstance(other, PadicScalar) and other.ring.d > self.ring.d:
            return other + self
        r = self.ring
        s = max(self.shift, o.shift)
        a = self.raw if s == self.shift else r._rscale(self.raw, r.p ** (s - self.shift))
        b = o.raw if s == o.shift else r._rscale(o.raw, r.p ** (s - o.shift))
        return r.make(r._radd(a, b), s, min(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return self.ring.make(self.ring._rscale(self.raw, -1), self.shift, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if isinstance(other, PadicScalar) and other.ring.d > self.ring.d:
            return -(other - self)
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if isinstance(other, PadicScalar) and other.ring.d > self.ring.d:
            return other * self
        r = self.ring
        prec = min(self.prec + o.valuation(), o.prec + self.valuation())
        shift = self.shift + o.shift
        return r.make(r._rmul(self.raw, o.raw, prec + shift), shift, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if isinstance(other, PadicScalar) and other.ring.d > self.ring.d:
            return other.ring(self) / other
        r = self.ring
        vy = o.valuation()
        if vy >= o.prec:
            raise ZeroDivisionError("division by an element that is zero at its precision")
        vx = self.valuation()
        if self.is_zero():
            return r.zero(self.prec - vy)
        vres = vx - vy
        prec = vres + min(self.prec - vx, o.prec - vy)
        unit = o.raw if o.shift else r._rdivp(o.raw, vy)
        if vy >= 0:
            shift = self.shift + vy
            work = prec + shift
            uinv = r._rinv_unit(unit, max(work, 1))
            raw = r._rmul(self.raw, uinv, work)
        else:
            shift = self.shift
            work = prec + shift
            uinv = r._rinv_unit(unit, max(work, 1))
            raw = r._rscale(r._rmul(self.raw, uinv, work), r.p ** (-vy))
        return r.make(raw, shift, prec)

    def __rtruediv__(self, other):
        return self.ring(other) / self if not isinstance(other, PadicScalar) else other / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.ring.one() / self ** (-k)
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def frobenius(self, times=1):
        """Apply sigma^times (sigma: t -> t^p) coordinatewise."""
        r = self.ring
        if r.d == 1:
            return self
        return r.make(r._rfrob(self.raw, self.prec + self.shift, times), self.shift, self.prec)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, DomainError):
            return False
        if o is NotImplemented:
            return False
        return (self - o).is_zero()

    __hash__ = None

    def agrees(self, other, digits):
        """True when self and other agree modulo p^digits (and both are known that far)."""
        diff = self - other
        return diff.prec >= digits and diff.valuation() >= digits


# ---------------------------------------------------------------------------
# logarithms


def log_terms_needed(p, v, target):
    """Smallest K so that k*v - v_p(k) >= target for every k > K.

    k*v - floor(log_p k) is nondecreasing in k, so the first k that clears the
    target bounds every later term as well.
    """
    k = 1
    while (k + 1) * v - _ilog(k + 1, p) < target:
        k += 1
    return k


def _ilog(j, p):
    e = 0
    while j >= p:
        j //= p
        e += 1
    return e


def padic_log(x):
    """Logarithm of a 1-unit via the series sum (-1)^(k+1) y^k / k.

    The sum runs in a ring with enough extra digits that the divisions by k
    never eat into the requested precision; the result keeps prec(x).
    """
    r = x.ring
    y = x - 1
    v = y.valuation()
    if x.prec <= 0:
        raise PrecisionError("no precision left")
    if v < 1:
        raise DomainError("log series needs a 1-unit")
    target = x.prec
    if v >= target:
        return r.zero(target)
    kmax = log_terms_needed(r.p, v, target) + 2
    work = unramified_ring(r.p, r.d, r.M + _ilog(kmax, r.p) + 2)
    y = work(y)
    total = work.zero(target)
    term = y
    for k in range(1, kmax + 1):
        piece = term / k
        total = total + piece if k % 2 else total - piece
        term = term * y
    return r(total.with_prec(target))


def log_unit(alpha, sigma_power=1):
    """log^(sigma^k)(alpha) = p^-k log(alpha^(p^k) / sigma^k(alpha)) for a unit alpha.

    For k = 1 this is the branch-free logarithm p^-1 log(alpha^p / alpha^sigma);
    it vanishes on roots of unity and is additive.  The result has absolute
    precision prec(alpha) - k.
    """
    if not isinstance(alpha, PadicScalar):
        raise TypeError("expected a PadicScalar")
    if not alpha.is_unit():
        raise DomainError("log_unit needs a p-adic unit")
    k = sigma_power
    if k < 1:
        raise DomainError("sigma power must be positive")
    r = alpha.ring
    work = unramified_ring(r.p, r.d, r.M + k)
    a = work(alpha)
    ratio = a ** (r.p ** k) / a.frobenius(k)
    return r(padic_log(ratio) / r.p ** k)
