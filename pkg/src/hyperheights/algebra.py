"""Exact rational and p-adic scalar arithmetic, univariate polynomials over Q,
and factorization over Q and over p-adic fields.

p-adic numbers are represented exactly as ``Fraction`` values of nonnegative
valuation together with a certified precision (a power of p), never as
floating objects; the Groebner machinery downstream needs exact divisibility
tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import sympy

from .errors import FactorTimeout, PrecisionExhausted

INF = math.inf


# ---------------------------------------------------------------------------
# precision bookkeeping


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision: decimal digits for real/complex values and p-adic
    digits (power of p) for local computations.  Immutable; passed explicitly,
    never ambient."""

    real_digits: int = 30
    padic_digits: int = 50

    def __post_init__(self):
        if self.real_digits < 10 or self.padic_digits < 10:
            raise ValueError("precision context requires at least 10 digits")

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.real_digits, 2 * self.padic_digits)

    def workdps(self, guard: int = 10):
        """mpmath context manager at working precision plus guard digits."""
        return mpmath.workdps(self.real_digits + guard)

    @property
    def tol(self) -> float:
        return 10.0 ** (-self.real_digits + 4)


DEFAULT_CONTEXT = PrecisionContext()


# ---------------------------------------------------------------------------
# p-adic valuations


def padic_valuation(q, p: int):
    """Valuation v with q = p^v * (unit of Z_(p)); +inf for q = 0."""
    if p < 2 or not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    q = Fraction(q)
    if q == 0:
        return INF
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(q, p: int) -> Fraction:
    """q / p^v(q), the p-adic unit part of a nonzero rational."""
    v = padic_valuation(q, p)
    return Fraction(q) / Fraction(p) ** v


def rational_reconstruct(a: int, m: int):
    """Unique rational n/d = a mod m with |n|, d <= sqrt(m/2), or None.

    Standard half-extended Euclid; used to recognize exact rational p-adic
    factors from their Hensel approximations.
    """
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if r1 == 0 or abs(t1) > bound or math.gcd(r1, t1) != 1:
        return None
    if t1 < 0:
        r1, t1 = -r1, -t1
    return Fraction(r1, t1)


# ---------------------------------------------------------------------------
# univariate polynomials over Q

_X = sympy.Symbol("x")


class UniPoly:
    """Dense univariate polynomial with Fraction coefficients.

    ``coeffs[i]`` is the coefficient of x^i; the zero polynomial has an empty
    coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- construction helpers

    @staticmethod
    def const(c) -> "UniPoly":
        return UniPoly([c])

    @staticmethod
    def x() -> "UniPoly":
        return UniPoly([0, 1])

    @staticmethod
    def from_roots(roots: Sequence) -> "UniPoly":
        f = UniPoly([1])
        for r in roots:
            f = f * UniPoly([-Fraction(r), 1])
        return f

    @staticmethod
    def from_sympy(expr) -> "UniPoly":
        poly = sympy.Poly(expr, _X, domain="QQ")
        return UniPoly(list(reversed(poly.all_coeffs())))

    def to_sympy(self):
        return sum(sympy.Rational(c) * _X**i for i, c in enumerate(self.coeffs))

    # -- basic structure

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly.const(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i <= self.degree else Fraction(0)

    def __repr__(self):
        if not self:
            return "UniPoly(0)"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c:
                terms.append(f"{c}*x^{i}" if i else f"{c}")
        return "UniPoly(" + " + ".join(terms) + ")"

    # -- arithmetic

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly.const(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return UniPoly.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly.const(other)
        if not self or not other:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out, base = UniPoly([1]), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: "UniPoly"):
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        q = UniPoly()
        r = self
        d, c = other.degree, other.lc
        while r and r.degree >= d:
            shift = r.degree - d
            t = UniPoly([0] * shift + [r.lc / c])
            q = q + t
            r = r - t * other
        return q, r

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __call__(self, x):
        out = 0
        for c in reversed(self.coeffs):
            if isinstance(x, Fraction) or isinstance(x, int):
                out = out * x + c
            else:
                out = out * x + type(x)(c.numerator) / type(x)(c.denominator)
        return out

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "UniPoly":
        return self if not self else UniPoly([c / self.lc for c in self.coeffs])

    def shift(self, a) -> "UniPoly":
        """self(x + a), by Horner on the polynomial ring."""
        out = UniPoly()
        xa = UniPoly([Fraction(a), 1])
        for c in reversed(self.coeffs):
            out = out * xa + UniPoly.const(c)
        return out

    def reversed(self, degree: int | None = None) -> "UniPoly":
        """x^n * self(1/x) for n = degree (defaults to deg self)."""
        n = self.degree if degree is None else degree
        if n < self.degree:
            raise ValueError("reversal degree below actual degree")
        out = [Fraction(0)] * (n + 1)
        for i, c in enumerate(self.coeffs):
            out[n - i] = c
        return UniPoly(out)

    def content(self) -> Fraction:
        """Positive rational c with self/c integral and primitive."""
        if not self:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.coeffs:
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "UniPoly":
        """Integral primitive part with positive leading coefficient."""
        if not self:
            return self
        g = self * (1 / self.content())
        return -g if g.lc < 0 else g

    def min_valuation(self, p: int):
        return min((padic_valuation(c, p) for c in self.coeffs if c), default=INF)

    def is_p_integral(self, p: int) -> bool:
        v = self.min_valuation(p)
        return v == INF or v >= 0

    def gcd(self, other: "UniPoly") -> "UniPoly":
        a, b = self, other
        while b:
            a, b = b, a % b
        return a.monic() if a else a

    def squarefree_part(self) -> "UniPoly":
        if self.degree <= 0:
            return self.monic()
        return (self // self.gcd(self.derivative())).monic()

    def squarefree_decomposition(self):
        """Yundecomposition [(g1,1),(g2,2),...] with self = lc * prod gi^i."""
        f = self.monic()
        out = []
        if f.degree <= 0:
            return out
        d = f.gcd(f.derivative())
        w = f // d
        i = 1
        while w.degree > 0:
            y = w.gcd(d)
            fac = w // y
            if fac.degree > 0:
                out.append((fac.monic(), i))
            w, d = y, d // y
            i += 1
        if d.degree > 0:
            # residual multiple factor (cannot happen in characteristic 0)
            out.append((d.monic(), i))
        return out

    def resultant(self, other: "UniPoly") -> Fraction:
        r = sympy.resultant(self.to_sympy(), other.to_sympy(), _X)
        return Fraction(sympy.Rational(r))

    def discriminant(self) -> Fraction:
        d = sympy.discriminant(self.to_sympy(), _X)
        return Fraction(sympy.Rational(d))


def factor_over_Q(f: UniPoly):
    """Irreducible factorization over Q: list of (primitive integral factor,
    multiplicity), with f equal to the product up to a rational constant."""
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    if f.degree == 0:
        return []
    _, factors = sympy.factor_list(sympy.Poly(f.to_sympy(), _X, domain="QQ"))
    out = []
    for poly, mult in factors:
        out.append((UniPoly.from_sympy(poly.as_expr()).primitive(), int(mult)))
    out.sort(key=lambda t: (t[0].degree, t[0].coeffs))
    return out


# ---------------------------------------------------------------------------
# polynomials over F_p and mod p^N (integer coefficient lists, dense)


def _trim(c):
    while c and c[-1] % 1 == 0 and c[-1] == 0:
        c.pop()
    return c


def _gfp_mod(c, p):
    return _trim([x % p for x in c])


def _gfp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _gfp_divmod(a, b, p):
    a = list(a)
    if not b:
        raise ZeroDivisionError
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and _trim(a):
        if len(a) < len(b):
            break
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        q[shift] = c
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % p
        _trim(a)
    return _trim(q), _trim(a)


def _gfp_xgcd(a, b, p):
    """(g, s, t) with s*a + t*b = g (monic) over F_p."""
    r0, r1 = _gfp_mod(a, p), _gfp_mod(b, p)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _gfp_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _trim([(x - y) % p for x, y in _pad(s0, _gfp_mul(q, s1, p))])
        t0, t1 = t1, _trim([(x - y) % p for x, y in _pad(t0, _gfp_mul(q, t1, p))])
    if r0:
        inv = pow(r0[-1], -1, p)
        r0 = [x * inv % p for x in r0]
        s0 = [x * inv % p for x in s0]
        t0 = [x * inv % p for x in t0]
    return r0, s0, t0


def _pad(a, b):
    n = max(len(a), len(b))
    return zip(a + [0] * (n - len(a)), b + [0] * (n - len(b)))


def _hensel_lift_pair(f, g, h, sigma, tau, p, N):
    """Lift f = g*h from mod p to mod p^N (g monic); linear lifting.

    f, g, h are integer coefficient lists; sigma*g + tau*h = 1 mod p.
    """
    pk = p
    g = [x % p for x in g]
    h = [x % p for x in h]
    while pk < p**N:
        pnext = pk * p
        # e = (f - g*h) / pk  mod p
        prod = _poly_int_mul(g, h)
        e = [((fx - px) // pk) % p for fx, px in _pad(list(f), prod)]
        e = _trim(e)
        u = _gfp_divmod(_gfp_mul(tau, e, p), g, p)[1]          # deg u < deg g
        w = _gfp_divmod(_trim([(a - b) % p for a, b in _pad(e, _gfp_mul(u, h, p))]), g, p)[0]
        g = _trim([(a + pk * b) % pnext for a, b in _pad(g, u)])
        h = _trim([(a + pk * b) % pnext for a, b in _pad(h, w)])
        pk = pnext
    return g, h


def _poly_int_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# p-adic factorization


@dataclass(frozen=True)
class LocalFactor:
    """One factor of a univariate polynomial over Q_p.

    ``factor`` has p-integral coefficients certified modulo p^precision; it is
    irreducible over Q_p unless ``certified_irreducible`` is False, in which
    case it is only known to reduce to a power of a single irreducible mod p
    (which is all the divisor-decomposition pipeline requires).
    """

    factor: UniPoly
    multiplicity: int
    residue_degree: int
    precision: int
    ramification: int = 1
    certified_irreducible: bool = True

    @property
    def degree(self) -> int:
        return self.factor.degree


def unit_split(a: UniPoly, p: int, precision: int = 50):
    """Split a = a1 * a2 (up to a p-adic unit) where a1 has unit leading
    coefficient and p-integral roots and a2 reduces to a constant mod p
    (all roots of negative valuation).  Newton polygon vertex split, computed
    by Hensel lifting; exact rational factors are recognized when possible."""
    if not a:
        raise ValueError("cannot split the zero polynomial")
    # normalize to unit content
    v0 = a.min_valuation(p)
    a_norm = a * Fraction(p) ** (-v0)
    n = a_norm.degree
    vals = [padic_valuation(c, p) for c in a_norm.coeffs]
    j = max(i for i, v in enumerate(vals) if v == 0)
    if j == n:
        return a, UniPoly([1])
    if j == 0:
        return UniPoly([1]), a
    # clear denominators: coefficients are p-integral rationals; work with the
    # integer representatives mod p^N
    N = precision
    pN = p**N
    ints = [_frac_mod_pn(c, p, pN) for c in a_norm.coeffs]
    cj_inv = pow(ints[j], -1, pN)
    f_monicish = [c * cj_inv % pN for c in ints]  # unit-normalized
    g0 = _gfp_mod(f_monicish[: j + 1], p)  # degree j, monic mod p
    h0 = [1] + [0] * 0
    # h0 must satisfy f = g0*h0 mod p with deg h = n - j; start from constant 1
    _, sigma, tau = _gfp_xgcd(g0, h0, p)
    # pad f to full length
    f_full = f_monicish + [0] * (n + 1 - len(f_monicish))
    g, h = _hensel_lift_pair(f_full, g0, h0, sigma, tau, p, N)
    a1 = _reconstruct_poly(g, p, pN)
    # exact when a1 divides a over Q; otherwise certified mod p^N
    q, r = a.divmod(a1)
    if not r:
        return a1, q
    return a1, _reconstruct_poly(h, p, pN)


def _frac_mod_pn(c: Fraction, p: int, pN: int) -> int:
    num, den = c.numerator, c.denominator
    if den % p == 0:
        raise ValueError("coefficient not p-integral")
    return num * pow(den, -1, pN) % pN


def _lift_poly(ints, p, pN) -> UniPoly:
    """Symmetric lift of an integer coefficient list mod p^N to a UniPoly."""
    out = []
    for c in ints:
        c %= pN
        out.append(c - pN if c > pN // 2 else c)
    return UniPoly(out)


def _reconstruct_poly(ints, p, pN) -> UniPoly:
    """Per-coefficient rational reconstruction mod p^N, falling back to the
    symmetric integer lift (denominators divisible by p are rejected)."""
    out = []
    for c in ints:
        c %= pN
        r = rational_reconstruct(c, pN)
        if r is not None and r.denominator % p != 0:
            out.append(r)
        else:
            out.append(c - pN if c > pN // 2 else c)
    return UniPoly(out)


def factor_over_Qp(f: UniPoly, p: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Factor a squarefree, p-integral, unit-leading-coefficient polynomial
    over Q_p: reduce mod p, Hensel-lift the coprime parts, analyze ramified
    parts through Newton polygons.

    Factors that cannot be certified irreducible at the configured precision
    are either returned with ``certified_irreducible=False`` (when they are at
    least supported over a single residue class, which downstream divisor
    decomposition accepts) or raise PrecisionExhausted.
    """
    if not f or f.degree == 0:
        return []
    if not f.is_p_integral(p) or padic_valuation(f.lc, p) != 0:
        raise ValueError("factor_over_Qp requires p-integral f with unit lc")
    N = ctx.padic_digits
    fm = f.monic()  # lc is a unit, so still p-integral
    pieces = _coprime_split(fm, p, N)
    out = []
    for g, (gbar, e) in pieces:
        out.extend(_factor_single_residue(g, gbar, e, p, N))
    out.sort(key=lambda lf: (lf.degree, lf.factor.coeffs))
    return out


def _coprime_split(fm: UniPoly, p: int, N: int):
    """Hensel-split monic fm by the coprime-power factorization of fm mod p.

    Returns [(lifted factor, (residue factor coeffs, exponent))].
    """
    pN = p**N
    ints = [_frac_mod_pn(c, p, pN) for c in fm.coeffs]
    fbar = sympy.Poly(list(reversed(_gfp_mod(list(ints), p))), _X, modulus=p, symmetric=False)
    _, residue_factors = fbar.factor_list()
    groups = []
    for rf, e in residue_factors:
        cs = [int(c) % p for c in reversed(rf.all_coeffs())]
        groups.append((cs, int(e)))
    if len(groups) == 1:
        return [(fm, groups[0])]
    out = []
    remaining = list(ints)
    rem_groups = list(groups)
    while len(rem_groups) > 1:
        gcs, ge = rem_groups[0]
        g0 = _gfp_mod(_gfp_power(gcs, ge, p), p)
        h0, r = _gfp_divmod(_gfp_mod(remaining, p), g0, p)
        if r:
            raise PrecisionExhausted("mod-p factorization inconsistent")
        _, sigma, tau = _gfp_xgcd(g0, h0, p)
        g, h = _hensel_lift_pair(remaining, g0, h0, sigma, tau, p, N)
        out.append((_reconstruct_poly(g, p, pN), rem_groups[0]))
        remaining = [c % pN for c in h]
        rem_groups = rem_groups[1:]
    # normalize the trailing factor to be monic mod p^N
    inv = pow(remaining[-1], -1, pN)
    remaining = [c * inv % pN for c in remaining]
    out.append((_reconstruct_poly(remaining, p, pN), rem_groups[0]))
    return out


def _gfp_power(c, e, p):
    out = [1]
    for _ in range(e):
        out = _gfp_mul(out, c, p)
    return out


def _factor_single_residue(g: UniPoly, gbar, e: int, p: int, N: int):
    """Factor a monic p-integral g with g mod p = gbar^e, gbar irreducible."""
    f0 = len(gbar) - 1  # residue degree of gbar
    if e == 1:
        return [LocalFactor(g, 1, f0, N)]
    if f0 > 1:
        # inertia and ramification mixed: would need unramified extension
        # arithmetic to split further; single residue class, so usable as-is
        return [LocalFactor(g, 1, f0, N, ramification=0, certified_irreducible=False)]
    # gbar = x - a: shift the root to 0 and read the Newton polygon
    a = (-Fraction(gbar[0])) if len(gbar) == 2 else Fraction(0)
    t = g.shift(a)  # roots of t have positive valuation
    return [
        LocalFactor(h.shift(-a), 1, fr * 1, N, ramification=ram, certified_irreducible=cert)
        for (h, fr, ram, cert) in _newton_factor(t, p, N)
    ]


def _newton_polygon(t: UniPoly, p: int):
    """Lower convex hull vertices [(i, v(c_i))] of a monic polynomial."""
    pts = [(i, padic_valuation(c, p)) for i, c in enumerate(t.coeffs) if c != 0]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x2) >= (pt[1] - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _newton_factor(t: UniPoly, p: int, N: int):
    """Factor monic t whose roots all have positive valuation, by slopes.

    Returns [(factor, residue_degree, ramification, certified)].
    """
    n = t.degree
    if n == 1:
        return [(t, 1, 1, True)]
    if t.coeffs[0] == 0:
        # roots at exactly 0: split off x^k
        k = next(i for i, c in enumerate(t.coeffs) if c != 0)
        rest = UniPoly(t.coeffs[k:])
        out = [(UniPoly([0, 1]), 1, 1, True)] * k
        if rest.degree > 0:
            out += _newton_factor(rest, p, N)
        return out
    hull = _newton_polygon(t, p)
    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segments.append((Fraction(y2 - y1, x2 - x1), x2 - x1))  # (slope, length)
    if len(segments) > 1:
        return _split_at_vertex(t, segments, p, N)
    slope, length = segments[0]
    lam = -slope  # common valuation of the roots
    h, e = lam.numerator, lam.denominator
    if e == n and math.gcd(h, e) == 1:
        # totally ramified, single root orbit: irreducible
        return [(t, 1, e, True)]
    if e == 1:
        # integral slope: rescale x -> p^h x to bring roots to valuation 0,
        # then recurse through the mod-p split
        s = _rescale(t, p, h).monic()
        out = []
        for gpart, (gbar, epart) in _coprime_split(s, p, N):
            for lf in _factor_single_residue(gpart, gbar, epart, p, N):
                out.append(
                    (
                        _rescale(lf.factor, p, -h).monic(),
                        lf.residue_degree,
                        lf.ramification,
                        lf.certified_irreducible,
                    )
                )
        return out
    # fractional slope h/e with e < n: residual polynomial decides
    m = n // e
    resid = _residual_polynomial(t, p, h, e, m)
    if resid is not None and sympy.Poly(list(reversed(resid)), _X, modulus=p).is_irreducible:
        return [(t, m, e, True)]
    # splitting along a reducible residual polynomial needs ramified lifting
    return [(t, 1, 0, False)]


def _rescale(t: UniPoly, p: int, h: int) -> UniPoly:
    """t(p^h x), normalized to unit content."""
    ph = Fraction(p) ** h
    s = UniPoly([c * ph**i for i, c in enumerate(t.coeffs)])
    v = s.min_valuation(p)
    return s * Fraction(p) ** (-v)


def _residual_polynomial(t: UniPoly, p: int, h: int, e: int, m: int):
    """Residual polynomial of a one-sided polygon of slope -h/e, degree m."""
    n = t.degree
    coeffs = []
    for j in range(m + 1):
        i = j * e
        c = t.coeffs[i] if i <= n else Fraction(0)
        target = Fraction(h * (m - j))  # valuation on the segment
        if c == 0:
            coeffs.append(0)
        else:
            v = padic_valuation(c, p)
            if v > target:
                coeffs.append(0)
            elif v == target:
                u = c / Fraction(p) ** v
                coeffs.append(_frac_mod_pn(u, p, p) % p)
            else:
                return None
    return coeffs  # index j = coefficient of z^j


def _split_at_vertex(t: UniPoly, segments, p: int, N: int):
    """Split monic t (all roots of positive valuation, >= 2 polygon slopes)
    into the product of the roots above and below an integer valuation
    threshold, then recurse on both parts.

    Root valuations per segment are lam_1 > lam_2 > ... > 0.  Any integer w
    with lam_{i+1} < w <= lam_i separates the roots: after x -> p^w x the
    upper roots become p-integral and the lower ones acquire negative
    valuation, which is exactly the split computed by ``unit_split``.  When
    no integer threshold exists (all slopes inside one open unit interval)
    the polynomial is returned whole, uncertified.
    """
    lams = [-s for s, _ in segments]  # decreasing positive rationals
    w = None
    for hi, lo in zip(lams, lams[1:]):
        c = math.floor(hi)
        if c > lo:
            w = c
            break
    if w is None:
        return [(t, 1, 0, False)]
    s = _rescale(t, p, w)
    a1, a2 = unit_split(s, p, precision=N)
    if a1.degree <= 0 or a2.degree <= 0:
        # threshold failed to separate despite the polygon; do not loop
        return [(t, 1, 0, False)]
    out = []
    for part in (a1, a2):
        back = _rescale(part, p, -w).monic()
        out.extend(_newton_factor(back, p, N))
    return out


# ---------------------------------------------------------------------------
# integer factorization


def _pollard_brent(n: int, rng_seed: int, budget: int):
    """Brent's cycle variant of Pollard rho; returns (factor or None, steps)."""
    if n % 2 == 0:
        return 2, 0
    import random

    rng = random.Random(rng_seed)
    y = rng.randrange(1, n)
    c = rng.randrange(1, n)
    m = 128
    g = r = q = 1
    steps = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
            steps += m
            if steps > budget:
                return None, steps
        r *= 2
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
            steps += 1
            if steps > budget:
                return None, steps
    return (g if g != n else None), steps


def integer_factor(n: int, effort: int = 2_000_000):
    """Complete prime factorization [(p, e), ...] of n != 0 (sign dropped).

    Trial division below 10^6, then Pollard-Brent rho with an iteration
    budget; primality is certified with a deterministic test at desk scale.
    Raises FactorTimeout carrying the partial factorization when the budget
    is exhausted.
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    n = abs(n)
    out = {}
    for p in sympy.primerange(2, 10**6):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    spent = [0]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if sympy.isprime(m):
            out[m] = out.get(m, 0) + 1
            continue
        seed = 0
        d = None
        while d is None:
            d, used = _pollard_brent(m, seed, effort // 4)
            seed += 1
            spent[0] += max(used, 1)
            if d is None and spent[0] > effort:
                partial = sorted(out.items())
                raise FactorTimeout(
                    f"factoring budget exhausted with composite cofactor {m}",
                    partial=partial,
                    cofactor=m * math.prod(x for x in stack),
                )
        stack.append(d)
        stack.append(m // d)
    return sorted(out.items())


# ---------------------------------------------------------------------------
# mpmath helpers


def mpc_of(q, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Exact rational (or pair) to mpc at working precision."""
    with ctx.workdps():
        if isinstance(q, tuple):
            return mpmath.mpc(mpc_of(q[0], ctx), mpc_of(q[1], ctx))
        q = Fraction(q)
        return mpmath.mpf(q.numerator) / mpmath.mpf(q.denominator)
