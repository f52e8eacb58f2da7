"""Multivariate polynomial ideals over Q, Z and the local ring Z_(p):
monomial orders, division with unique remainder, strong Groebner bases
(Buchberger with S- and G-polynomials over Euclidean coefficient rings),
and length counting for finite local quotients.

Z_(p) is realized as exact rationals of nonnegative p-valuation; its
Euclidean function is the p-valuation and every element factors as
p^v * unit, so leading coefficients normalize to exact powers of p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import UniPoly, padic_valuation, unit_part
from .errors import InfiniteLength

RING_Q = "rationals"
RING_Z = "integers"


def ring_local(p: int):
    """Ring tag for Z localized at the prime p."""
    return ("local", p)


def _is_local(ring) -> bool:
    return isinstance(ring, tuple) and ring[0] == "local"


# ---------------------------------------------------------------------------
# monomials: exponent tuples under degrevlex


def degrevlex_key(exp):
    """Sort key: graded reverse lexicographic, larger key = larger monomial."""
    return (sum(exp), tuple(-e for e in reversed(exp)))


def _mon_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _mon_divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mon_div(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _mon_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# multivariate polynomials


class MultiPoly:
    """Sparse multivariate polynomial: exponent tuple -> Fraction, no zeros."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=()):
        self.nvars = nvars
        d = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {nvars} variables")
            c = Fraction(c)
            if c:
                d[exp] = d.get(exp, Fraction(0)) + c
        self.terms = {e: c for e, c in d.items() if c}

    # -- construction

    @staticmethod
    def const(nvars: int, c) -> "MultiPoly":
        return MultiPoly(nvars, {(0,) * nvars: Fraction(c)})

    @staticmethod
    def variable(nvars: int, i: int) -> "MultiPoly":
        exp = [0] * nvars
        exp[i] = 1
        return MultiPoly(nvars, {tuple(exp): Fraction(1)})

    @staticmethod
    def from_unipoly(f: UniPoly, nvars: int, var: int) -> "MultiPoly":
        exp = [0] * nvars
        terms = {}
        for i, c in enumerate(f.coeffs):
            if c:
                exp[var] = i
                terms[tuple(exp)] = c
        return MultiPoly(nvars, terms)

    # -- structure

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    @property
    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def leading(self):
        """(exponent, coefficient) of the degrevlex-largest term."""
        exp = max(self.terms, key=degrevlex_key)
        return exp, self.terms[exp]

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        names = [f"x{i}" for i in range(self.nvars)]
        parts = []
        for exp in sorted(self.terms, key=degrevlex_key, reverse=True):
            c = self.terms[exp]
            mono = "*".join(
                f"{names[i]}^{e}" if e > 1 else names[i] for i, e in enumerate(exp) if e
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return "MultiPoly(" + " + ".join(parts) + ")"

    # -- arithmetic

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.nvars, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MultiPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return MultiPoly.const(self.nvars, other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = Fraction(other)
            return MultiPoly(self.nvars, {e: x * c for e, x in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _mon_mul(e1, e2)
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.nvars, out)

    __rmul__ = __mul__

    def term_times(self, exp, c) -> "MultiPoly":
        """Multiply by the single term c * x^exp."""
        c = Fraction(c)
        return MultiPoly(
            self.nvars, {_mon_mul(e, exp): x * c for e, x in self.terms.items()}
        )

    def __call__(self, point: Sequence):
        out = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                t *= Fraction(x) ** k
            out += t
        return out


# ---------------------------------------------------------------------------
# ideal bases


@dataclass(frozen=True)
class IdealBasis:
    """Generators of an ideal with a coefficient-ring tag; degrevlex order.

    Over ``RING_Z`` rational coefficients are cleared to integers by a common
    denominator; over a local ring every coefficient must have nonnegative
    p-valuation (prime-to-p denominators are units and stay).
    """

    generators: tuple
    ring: object
    nvars: int
    is_groebner: bool = False

    @staticmethod
    def make(gens: Iterable[MultiPoly], ring, is_groebner=False) -> "IdealBasis":
        gens = [g for g in gens if g]
        if not gens:
            raise ValueError("ideal basis needs at least one nonzero generator")
        nvars = gens[0].nvars
        if any(g.nvars != nvars for g in gens):
            raise ValueError("mixed variable counts in ideal basis")
        norm = tuple(_normalize(g, ring) for g in gens)
        return IdealBasis(norm, ring, nvars, is_groebner)


def _normalize(g: MultiPoly, ring) -> MultiPoly:
    """Canonical scaling of a generator: monic over Q; integral with positive
    leading coefficient over Z; leading coefficient an exact power of p over
    the local ring."""
    if not g:
        return g
    _, lc = g.leading()
    if ring == RING_Q:
        return g * (1 / lc)
    if ring == RING_Z:
        den = math.lcm(*(c.denominator for c in g.terms.values()))
        g = g * den
        _, lc = g.leading()
        return g * -1 if lc < 0 else g
    if _is_local(ring):
        p = ring[1]
        for c in g.terms.values():
            if padic_valuation(c, p) < 0:
                raise ValueError(f"coefficient {c} is not integral at {p}")
        return g * (1 / unit_part(lc, p))
    raise ValueError(f"unknown ring tag {ring!r}")


# ---------------------------------------------------------------------------
# division with unique remainder


def _reduce_coeff(c: Fraction, a: Fraction, ring):
    """(q, r) with c = q*a + r, r the canonical Euclidean remainder."""
    if ring == RING_Q:
        return c / a, Fraction(0)
    if ring == RING_Z:
        q = Fraction(math.floor(c / a))
        return q, c - q * a
    p = ring[1]
    v = padic_valuation(a, p)
    if padic_valuation(c, p) >= v:
        return c / a, Fraction(0)
    # canonical residue of c modulo p^v: an integer in [0, p^v)
    pv = p**v
    r = Fraction(c.numerator * pow(c.denominator, -1, pv) % pv)
    if r == c:
        return Fraction(0), c
    return (c - r) / a, r


def reduce(h: MultiPoly, B: IdealBasis) -> MultiPoly:
    """Unique remainder of h on division by the (strong) Groebner basis B.

    Terms are processed from the degrevlex-largest down; a term c*x^g is
    rewritten by the first basis element (in a fixed sorted order) whose
    leading monomial divides x^g and whose leading coefficient Euclidean-
    reduces c.  No term of the result is so reducible.
    """
    if h.nvars != B.nvars:
        raise ValueError("variable count mismatch")
    reducers = sorted(
        ((g.leading(), g) for g in B.generators),
        key=lambda t: (degrevlex_key(t[0][0]), abs(t[0][1])),
    )
    work = dict(h.terms)
    remainder = {}
    while work:
        exp = max(work, key=degrevlex_key)
        c = work.pop(exp)
        hit = None
        for (lm, la), g in reducers:
            if _mon_divides(lm, exp):
                q, r = _reduce_coeff(c, la, B.ring)
                if q:
                    hit = (g, lm, q, r)
                    break
        if hit is None:
            if c:
                remainder[exp] = remainder.get(exp, Fraction(0)) + c
            continue
        g, lm, q, r = hit
        sub = g.term_times(_mon_div(exp, lm), q)
        for e2, c2 in sub.terms.items():
            if e2 == exp:
                continue
            v = work.get(e2, Fraction(0)) - c2
            if v:
                work[e2] = v
            else:
                work.pop(e2, None)
        if r:
            work[exp] = r
    return MultiPoly(h.nvars, remainder)


# ---------------------------------------------------------------------------
# Buchberger with S- and G-polynomials


def _s_poly(f: MultiPoly, g: MultiPoly, ring) -> MultiPoly:
    (ef, cf), (eg, cg) = f.leading(), g.leading()
    L = _mon_lcm(ef, eg)
    if ring == RING_Q:
        c = Fraction(1)
    elif ring == RING_Z:
        c = Fraction(math.lcm(cf.numerator, cg.numerator))
    else:
        p = ring[1]
        c = Fraction(p) ** max(padic_valuation(cf, p), padic_valuation(cg, p))
    return f.term_times(_mon_div(L, ef), c / cf) - g.term_times(_mon_div(L, eg), c / cg)


def _g_poly(f: MultiPoly, g: MultiPoly, ring):
    """gcd combination of leading coefficients over Z; None when redundant
    (one leading coefficient divides the other, or over a field/local ring
    where divisibility is total)."""
    if ring != RING_Z:
        return None
    (ef, cf), (eg, cg) = f.leading(), g.leading()
    a, b = cf.numerator, cg.numerator
    if a % b == 0 or b % a == 0:
        return None
    d, s, t = sympy_gcdext(a, b)
    L = _mon_lcm(ef, eg)
    return f.term_times(_mon_div(L, ef), s) + g.term_times(_mon_div(L, eg), t)


def sympy_gcdext(a: int, b: int):
    """Extended gcd (g, s, t) with s*a + t*b = g > 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def groebner_basis(I: IdealBasis) -> IdealBasis:
    """Strong Groebner basis (degrevlex) of I over its coefficient ring,
    autoreduced.  Buchberger's algorithm; over Z the pair set also carries
    gcd combinations of leading coefficients so that division yields unique
    remainders."""
    if I.is_groebner:
        return I
    basis = list(I.generators)
    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]

    def key(pair):
        i, j = pair
        return degrevlex_key(_mon_lcm(basis[i].leading()[0], basis[j].leading()[0]))

    while pairs:
        pairs.sort(key=key)
        i, j = pairs.pop(0)
        f, g = basis[i], basis[j]
        candidates = [_s_poly(f, g, I.ring)]
        gp = _g_poly(f, g, I.ring)
        if gp is not None:
            candidates.append(gp)
        for cand in candidates:
            rem = reduce(cand, IdealBasis(tuple(basis), I.ring, I.nvars, True))
            if rem:
                rem = _normalize(rem, I.ring)
                basis.append(rem)
                k = len(basis) - 1
                pairs.extend((t, k) for t in range(k))
    basis = _autoreduce(basis, I.ring, I.nvars)
    return IdealBasis(tuple(basis), I.ring, I.nvars, True)


def _autoreduce(basis, ring, nvars):
    changed = True
    while changed:
        changed = False
        for i in range(len(basis)):
            others = basis[:i] + basis[i + 1 :]
            if not others:
                continue
            rem = reduce(basis[i], IdealBasis(tuple(others), ring, nvars, True))
            if rem != basis[i]:
                changed = True
                if rem:
                    basis[i] = _normalize(rem, ring)
                else:
                    basis = others
                break
    basis.sort(key=lambda g: (degrevlex_key(g.leading()[0]), sorted(g.terms.items())))
    return basis


# ---------------------------------------------------------------------------
# ideal-theoretic queries


def constant_of_basis(B: IdealBasis) -> int:
    """The unique positive constant in a Groebner basis over Z, generating
    the intersection of the ideal with Z; 0 when the ideal meets Z trivially
    (the supports fail to be disjoint on the generic fiber)."""
    if not B.is_groebner:
        B = groebner_basis(B)
    consts = [g for g in B.generators if g.is_constant()]
    if not consts:
        return 0
    vals = [abs(g.terms[(0,) * B.nvars]) for g in consts]
    q = min(vals)
    if q.denominator != 1:
        return 1  # a unit constant: empty intersection
    return int(q)


def local_length(I: IdealBasis) -> int:
    """Length over Z_(p) of Z_(p)[x_1..x_s]/I for a finite-length quotient.

    With a strong Groebner basis B, the residue classes of p^j * x^alpha
    with p^j * x^alpha outside the leading-term ideal of B form a filtration
    basis, so the length is counted by walking monomials in increasing total
    degree: for each monomial g, the number of new classes is the least
    leading-coefficient valuation among basis elements whose leading monomial
    divides g (capped by the constant element).  A total degree contributing
    nothing ends the walk, since unit-led leading monomials absorb all their
    multiples.
    """
    if not _is_local(I.ring):
        raise ValueError("local_length requires a local-at-p ideal")
    p = I.ring[1]
    B = groebner_basis(I)
    leads = []
    const_val = None
    for g in B.generators:
        exp, lc = g.leading()
        v = padic_valuation(lc, p)
        leads.append((exp, v))
        if sum(exp) == 0:
            const_val = v if const_val is None else min(const_val, v)
    if const_val is None:
        raise InfiniteLength(
            "ideal contains no power of p: the local quotient has infinite length"
        )
    m = const_val  # classes p^j * 1 for 0 <= j < v(q)
    blocked = set()  # monomials none of whose multiples contribute
    d = 0
    while True:
        d += 1
        added = 0
        for ks in _monomials_of_degree(I.nvars, d):
            if any(_mon_divides(t, ks) for t in blocked):
                continue
            n = min(v for exp, v in leads if _mon_divides(exp, ks))
            if n == 0:
                blocked.add(ks)
            added += n
        m += added
        if added == 0:
            return m


def _monomials_of_degree(nvars: int, d: int):
    for bars in itertools.combinations(range(d + nvars - 1), nvars - 1):
        exp = []
        prev = -1
        for b in bars:
            exp.append(b - prev - 1)
            prev = b
        exp.append(d + nvars - 2 - prev)
        yield tuple(exp)
