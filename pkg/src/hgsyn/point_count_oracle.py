"""Point counts and character sums for y^N = x(1-x)^(N-1)(1-lambda x) over F_q.

Field elements of F_Q (Q = p^D) are coded as integers sum d_i p^i from their
coordinates in F_p[u]/(P_D), P_D the primitive polynomial used by padic_core,
so residues line up with Teichmüller lifts there.  Multiplication runs
through discrete-log tables, addition through digit arrays.

The character is chi(x) = omega(x^((Q-1)/N)), which does not depend on a
choice of generator and is compatible with the norm maps between fields.
"""

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CalibrationError, DomainError, MismatchError, NonOrdinary
from .padic_core import PrimeContext, primitive_polynomial, unramified_ring

Q_CAP = 10 ** 6

# Relation between character sums and the smooth projective model, fixed once
# by calibrate() on the reference instance p=7, N=3, lambda=3 and frozen here:
# trace of Frob_q on H^1(n) = TRACE_SIGN * S_n(q), the smooth model has
# POINTS_AT_INFINITY points above x = infinity, and point-count component n is
# matched with eigencomponent COMPONENT_MAP(n) on the hypergeometric side.
TRACE_SIGN = -1
POINTS_AT_INFINITY = 1


def COMPONENT_MAP(n, N):
    return n


class FiniteField:
    """F_Q with Q = p^D, elements coded as base-p integers."""

    def __init__(self, p, D):
        Q = p ** D
        if Q > Q_CAP:
            raise DomainError(f"field size {Q} exceeds the cap {Q_CAP}")
        self.p, self.D, self.Q = p, D, Q
        self.modulus = primitive_polynomial(p, D)
        pw = p ** np.arange(D, dtype=np.int64)
        self.powers = pw
        exp = np.zeros(Q - 1, dtype=np.int64)
        digits = [1] + [0] * (D - 1)
        m = self.modulus
        for k in range(Q - 1):
            exp[k] = sum(d * p ** i for i, d in enumerate(digits))
            top = digits[-1]
            digits = [0] + digits[:-1]
            if top:
                digits = [(digits[i] - top * m[i]) % p for i in range(D)]
        self.exp = exp
        log = np.full(Q, -1, dtype=np.int64)
        log[exp] = np.arange(Q - 1, dtype=np.int64)
        if (log[1:] < 0).any():
            raise AssertionError("generator does not span F_Q^x")
        self.log = log
        codes = np.arange(Q, dtype=np.int64)
        self.digits = (codes[:, None] // pw[None, :]) % p

    def encode(self, digits):
        return int(sum(int(d) % self.p * self.p ** i for i, d in enumerate(digits)))

    def add(self, a, b):
        da, db = self.digits[a], self.digits[b]
        return int(((da + db) % self.p) @ self.powers)

    def neg(self, a):
        return int(((-self.digits[a]) % self.p) @ self.powers)

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return int(self.exp[(self.log[a] + self.log[b]) % (self.Q - 1)])

    def pow(self, a, k):
        if a == 0:
            return 0 if k else 1
        return int(self.exp[(self.log[a] * k) % (self.Q - 1)])

    def one_minus(self, codes):
        d = (-self.digits[codes]) % self.p
        d[:, 0] = (d[:, 0] + 1) % self.p
        return d @ self.powers

    def mul_vec(self, a, codes):
        """a * codes elementwise (codes may contain 0)."""
        out = np.zeros_like(codes)
        nz = codes != 0
        if a:
            out[nz] = self.exp[(self.log[codes[nz]] + self.log[a]) % (self.Q - 1)]
        return out


@lru_cache(maxsize=None)
def finite_field(p, D):
    return FiniteField(p, D)


def embed_subfield(big, small_degree):
    """Code of a root in F_Q of the defining polynomial of F_{p^small_degree}."""
    p = big.p
    q = p ** small_degree
    if big.D % small_degree:
        raise DomainError("not a subfield")
    if small_degree == 1:
        return None
    m = primitive_polynomial(p, small_degree)
    step = (big.Q - 1) // (q - 1)
    for k in range(1, q - 1):
        theta = int(big.exp[k * step])
        acc = 0
        for c in reversed(m):
            acc = big.add(big.mul(acc, theta), c % p)
        if acc == 0:
            return theta
    raise AssertionError("no embedding found")


@dataclass
class CurveInstance:
    """The fiber at lambda-bar over F_q, q = p^r."""

    p: int
    N: int
    r: int
    lam: object
    M: int = 12
    _fields: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        PrimeContext(self.p, self.N, self.M)
        if self.r < 1 or self.r > 3:
            raise DomainError("r must be 1, 2 or 3")
        self.q = self.p ** self.r
        if isinstance(self.lam, int):
            lam_digits = [self.lam % self.p] + [0] * (self.r - 1)
        else:
            lam_digits = [int(c) % self.p for c in self.lam]
            if len(lam_digits) != self.r:
                raise DomainError("lambda needs r coordinates")
        self.lam_digits = tuple(lam_digits)
        if not any(lam_digits) or lam_digits == [1] + [0] * (self.r - 1):
            raise DomainError("lambda must avoid 0 and 1")
        self.ring = unramified_ring(self.p, 1, self.M)

    def field(self, j):
        if j not in self._fields:
            F = finite_field(self.p, self.r * j)
            if self.r == 1:
                lam = self.lam_digits[0]
            else:
                theta = embed_subfield(F, self.r)
                lam = 0
                power = 1
                for c in self.lam_digits:
                    lam = F.add(lam, F.mul(c, power)) if c else lam
                    power = F.mul(power, theta)
            self._fields[j] = (F, lam)
        return self._fields[j]

    def f_codes(self, j):
        """f(x) for every x in F_(q^j), as codes."""
        F, lam = self.field(j)
        x = np.arange(F.Q, dtype=np.int64)
        omx = F.one_minus(x)
        omlx = F.one_minus(F.mul_vec(lam, x))
        nz = (x != 0) & (omx != 0) & (omlx != 0)
        out = np.zeros(F.Q, dtype=np.int64)
        lg = (F.log[x[nz]] + (self.N - 1) * F.log[omx[nz]] + F.log[omlx[nz]]) % (F.Q - 1)
        out[nz] = F.exp[lg]
        return out

    def character_histogram(self, j):
        """counts[k] = #{x : f(x) != 0, chi(f(x)) = zeta0^k}."""
        F, _ = self.field(j)
        vals = self.f_codes(j)
        nz = vals != 0
        cls = F.log[vals[nz]] % self.N
        return np.bincount(cls, minlength=self.N)

    def zeta0(self, j):
        """chi(g) for the generator g of F_(q^j)^x: omega(g^((Q-1)/N)) in Z_p."""
        F, _ = self.field(j)
        c = int(F.exp[(F.Q - 1) // self.N])
        return self.ring.teichmuller(c % self.p)

    def affine_count_bruteforce(self, j):
        """#{(x, y) in F^2 : y^N = f(x)} from a table of N-th powers."""
        F, _ = self.field(j)
        ys = np.arange(F.Q, dtype=np.int64)
        yN = np.zeros(F.Q, dtype=np.int64)
        yN[1:] = F.exp[(F.log[ys[1:]] * self.N) % (F.Q - 1)]
        table = np.bincount(yN, minlength=F.Q)
        return int(table[self.f_codes(j)].sum())


def character_sum(curve, n, j):
    """S_n(q^j) = sum_x chi^n(f(x)) in Z_p."""
    hist = curve.character_histogram(j)
    z = curve.zeta0(j)
    ring = curve.ring
    total = ring.zero()
    for k, cnt in enumerate(hist):
        if cnt:
            total = total + z ** ((n * k) % curve.N) * int(cnt)
    return total


def character_sum_complex(curve, n, j):
    """The same sum in C via zeta0 -> exp(2 pi i / N)."""
    hist = curve.character_histogram(j)
    return sum(int(c) * cmath.exp(2j * math.pi * n * k / curve.N) for k, c in enumerate(hist))


@dataclass
class ComponentCharPoly:
    n: int
    q: int
    t1: object
    t2: object
    trace: object
    norm: object
    trace_complex: complex
    norm_complex: complex

    def power_sum(self, k):
        """alpha^k + beta^k from the trace and norm."""
        s = [2, self.trace]
        for _ in range(2, k + 1):
            s.append(self.trace * s[-1] - self.norm * s[-2])
        return s[k]

    @property
    def ordinary(self):
        return self.trace.valuation() == 0

    def unit_root(self):
        if not self.ordinary:
            raise NonOrdinary(f"component {self.n} is supersingular at this point")
        t, e = self.trace, self.norm
        u = t
        for _ in range(t.ring.M + 2):
            u = u - (u * u - t * u + e) / (2 * u - t)
        return u


def component_charpoly(curve, n):
    s1 = character_sum(curve, n, 1)
    s2 = character_sum(curve, n, 2)
    t1 = s1 * TRACE_SIGN
    t2 = s2 * TRACE_SIGN
    norm = (t1 * t1 - t2) / 2
    c1 = character_sum_complex(curve, n, 1) * TRACE_SIGN
    c2 = character_sum_complex(curve, n, 2) * TRACE_SIGN
    return ComponentCharPoly(n, curve.q, t1, t2, t1, norm, c1, (c1 * c1 - c2) / 2)


def smooth_count_from_charpolys(curve, k):
    """#X(F_(q^k)) predicted by the product of the component charpolys."""
    total = curve.ring(curve.q ** k + 1)
    for n in range(1, curve.N):
        total = total - component_charpoly(curve, n).power_sum(k)
    return total


def smooth_count_bruteforce(curve, k):
    return curve.affine_count_bruteforce(k) + POINTS_AT_INFINITY


def zeta_crossfoot(curve, ks=(1, 2, 3)):
    """{k: (brute-force count, predicted count, agree)} for the smooth model."""
    out = {}
    for k in ks:
        brute = smooth_count_bruteforce(curve, k)
        pred = smooth_count_from_charpolys(curve, k)
        out[k] = (brute, pred, pred == brute)
    return out


def weil_check(cp, tol=1e-6):
    """Complex absolute values: |trace| <= 2 sqrt(q) and |norm| = q."""
    q = cp.q
    return (abs(cp.trace_complex) <= 2 * math.sqrt(q) + tol
            and abs(abs(cp.norm_complex) - q) < tol * q)


def calibrate(p=7, N=3, lam=3):
    """Recover the (trace sign, points at infinity) convention from zeta cross-feet.

    Tries every sign and every boundary constant 0..N; exactly one pair must
    make the counts over F_q, F_q^2 and F_q^3 consistent.
    """
    curve = CurveInstance(p, N, 1, lam)
    hits = []
    for sign in (1, -1):
        for inf in range(N + 1):
            ok = True
            for k in (1, 2, 3):
                brute = curve.affine_count_bruteforce(k) + inf
                total = curve.ring(curve.q ** k + 1)
                for n in range(1, N):
                    t1 = character_sum(curve, n, 1) * sign
                    t2 = character_sum(curve, n, 2) * sign
                    e = (t1 * t1 - t2) / 2
                    s = [2, t1]
                    for _ in range(2, k + 1):
                        s.append(t1 * s[-1] - e * s[-2])
                    total = total - s[k]
                if not total == brute:
                    ok = False
                    break
            if ok:
                hits.append((sign, inf))
    if len(hits) != 1:
        raise CalibrationError(f"calibration is not unique: {hits}")
    return hits[0]


def verify_unit_root(curve, n, alpha, r=None, digits=4, lift=None):
    """Compare the point-count unit root with the Dwork unit root at alpha."""
    from .frobenius_structure import dwork_unit_root, is_ordinary

    r = curve.r if r is None else r
    if r != curve.r:
        raise DomainError("r must equal the degree of the field of definition")
    ctx = PrimeContext(curve.p, curve.N, max(curve.M, digits + 2))
    cp = component_charpoly(curve, COMPONENT_MAP(n, curve.N))
    ord_points = cp.ordinary
    ord_dwork = is_ordinary(ctx, n, alpha)
    report = {"n": n, "q": curve.q, "ordinary_points": ord_points, "ordinary_dwork": ord_dwork,
              "trace": cp.trace, "norm": cp.norm}
    if ord_points != ord_dwork:
        raise MismatchError("ordinarity tests disagree")
    if not ord_points:
        raise NonOrdinary(f"component {n} is not ordinary")
    u_pts = cp.unit_root()
    u_dw = dwork_unit_root(ctx, n, alpha, r=r, lift=lift, digits=digits)
    diff = curve.ring(u_dw) - u_pts
    agree = min(diff.valuation(), digits)
    report.update({"unit_root_points": u_pts.with_prec(digits), "unit_root_dwork": u_dw,
                   "agreement_digits": agree, "match": agree >= digits})
    return report
