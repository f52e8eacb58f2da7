"""Arrangement of divisor representatives with disjoint support, and the
search for the finite set of non-archimedean places that can carry a nonzero
local symbol.

The canonical height of a class P is recovered as scale * <D, E> where D and
E are explicitly arranged degree-0 divisors with disjoint support, D in the
class of n*P for a small multiple n, and E linearly equivalent to -D (or to
-2D with scale halved, when the affine degree is odd on a single-infinity
model).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import SimpleNamespace
from typing import Optional

from .algebra import UniPoly, integer_factor
from .errors import InfiniteLength, NoRationalArrangement, TorsionDetected
from .groebner import IdealBasis, MultiPoly, RING_Z, constant_of_basis, groebner_basis
from .jacobian import (
    INF_MINUS,
    INF_PLUS,
    INF_W,
    TWO_RATIONAL,
    TWO_CONJUGATE,
    ONE_WEIERSTRASS,
    FreeDivisor,
    HyperCurve,
    JacPoint,
    MumfordDivisor,
    infinity_entry,
    involution_free,
    jac_mul,
    mumford_to_free,
    supports_disjoint,
    x_fiber_divisor,
)


@dataclass(frozen=True)
class ArrangedPair:
    """Disjoint-support divisor pair with h(P) = scale * <D, E>."""

    D: FreeDivisor
    E: FreeDivisor
    scale: Fraction
    zeta_list: tuple
    multiple_used: int


def free_divisor_class(D: FreeDivisor, C: HyperCurve) -> JacPoint:
    """The class of a degree-0 free divisor as a reduced Jacobian point.

    Vertical fibers (affine part of div(x - zeta)) are linearly equivalent to
    the divisor at infinity and contribute nothing; infinity entries feed the
    balance; everything else is composed through Mumford pairs.
    """
    from .jacobian import _compose, _normalize  # raw composition, no reduction

    if D.degree != 0:
        raise ValueError("free_divisor_class requires a degree-0 divisor")
    u, v = UniPoly([1]), UniPoly()
    delta = 0
    for e, m in D.entries:
        if e.kind == "vert":
            continue
        if e.kind == "inf":
            tag = e.data[0]
            if tag == INF_PLUS:
                delta += m
            elif tag == INF_MINUS:
                delta -= m
            # the single Weierstrass infinity is the reduction base: no-op
            continue
        if e.kind == "pt":
            x0, y0 = e.data
            a, b = UniPoly([-x0, 1]), UniPoly([y0])
        else:
            a, b = e.data
        if m < 0:
            b = (-b - C.H) % a
        # raw Mumford composition on unreduced data; these intermediates are
        # not balanced classes, so they must not pass JacPoint validation
        piece = SimpleNamespace(u=a, v=b, delta=0)
        for _ in range(abs(m)):
            uu, vv, _ = _compose(C, SimpleNamespace(u=u, v=v, delta=0), piece)
            u, v = uu, vv % uu if uu.degree else UniPoly()
    return _normalize(C, u, v, delta)


def _weierstrass_free(P: JacPoint, C: HyperCurve) -> bool:
    return P.u.gcd(C.branch_poly).degree <= 0


def _x_coordinates_blocked(free: FreeDivisor):
    """Polynomials whose roots are x-coordinates already in use."""
    polys = []
    for e, _ in free.entries:
        if e.kind == "pt":
            polys.append(UniPoly([-e.data[0], 1]))
        elif e.kind == "mum":
            polys.append(e.data[0])
        elif e.kind == "vert":
            polys.append(UniPoly([-e.data[0], 1]))
    return polys


def _pick_zetas(C: HyperCurve, free: FreeDivisor, count: int, hint=None):
    blocked = _x_coordinates_blocked(free)
    out = []
    candidates = []
    if hint is not None:
        candidates.append(Fraction(hint))
    candidates.extend(Fraction(k) for k in range(0, 100))
    for z in candidates:
        if len(out) == count:
            break
        if z in out:
            continue
        if C.branch_poly(z) == 0:
            continue  # x-fiber would consist of a doubled Weierstrass point
        if any(p(z) == 0 for p in blocked):
            continue
        out.append(z)
    if len(out) < count:
        raise NoRationalArrangement("no admissible zeta value found below 100")
    return out


def arrange_divisors(
    P: JacPoint,
    C: HyperCurve,
    zeta_hint=None,
    min_multiple: int = 1,
) -> ArrangedPair:
    """Disjoint-support arrangement (D, E, scale) with h(P) = scale * <D,E>.

    Replaces P by the smallest multiple n*P (n >= min_multiple) whose reduced
    representative avoids affine Weierstrass points, dividing the scale by
    n^2; raises TorsionDetected when the search runs into n*P = 0.
    """
    if P.is_zero:
        raise ValueError("cannot arrange the zero class")
    if C.infinity_kind == TWO_CONJUGATE:
        raise NoRationalArrangement(
            "the two points at infinity are conjugate; no rational "
            "divisor at infinity is available for reduction"
        )
    n = min_multiple
    while True:
        Pn = jac_mul(n, P)
        if Pn.is_zero:
            raise TorsionDetected(
                f"the class is torsion of order dividing {n}; its height is 0",
                order=n,
            )
        if _weierstrass_free(Pn, C):
            break
        n += 1
        if n > min_multiple + 64:
            raise NoRationalArrangement(
                "no small multiple avoids Weierstrass support"
            )
    dtilde = Pn.reduced_mumford()
    free_affine = mumford_to_free(MumfordDivisor(dtilde.a, dtilde.b, 0, 0), C)
    inv_affine = involution_free(free_affine, C)
    d = dtilde.degree
    scale = Fraction(1, n * n)
    if C.infinity_kind == ONE_WEIERSTRASS:
        zetas = _pick_zetas(C, free_affine, 1, hint=zeta_hint)
        zeta = zetas[0]
        D = free_affine - FreeDivisor(((infinity_entry(INF_W), d),))
        if d % 2 == 0:
            E = inv_affine - (d // 2) * x_fiber_divisor(zeta, C)
        else:
            E = 2 * inv_affine - d * x_fiber_divisor(zeta, C)
            scale = scale / 2
        pair = ArrangedPair(D, E, scale, (zeta,), n)
    else:
        delta = Pn.delta
        if delta == 0:
            zetas = _pick_zetas(C, free_affine, 1, hint=zeta_hint)
            zeta = zetas[0]
            D = free_affine - FreeDivisor(
                ((infinity_entry(INF_PLUS), d // 2), (infinity_entry(INF_MINUS), d // 2))
            )
            E = inv_affine - (d // 2) * x_fiber_divisor(zeta, C)
            pair = ArrangedPair(D, E, scale, (zeta,), n)
        else:
            zeta, zeta2 = _pick_zetas(C, free_affine, 2, hint=zeta_hint)
            tag_d = INF_PLUS if delta > 0 else INF_MINUS
            tag_e = INF_MINUS if delta > 0 else INF_PLUS
            D = (
                free_affine
                + FreeDivisor(((infinity_entry(tag_d), abs(delta)),))
                - (d // 2) * x_fiber_divisor(zeta2, C)
            )
            E = (
                inv_affine
                + FreeDivisor(((infinity_entry(tag_e), abs(delta)),))
                - (d // 2) * x_fiber_divisor(zeta, C)
            )
            pair = ArrangedPair(D, E, scale, (zeta, zeta2), n)
    _verify_arrangement(pair, Pn, C)
    return pair


def _verify_arrangement(pair: ArrangedPair, Pn: JacPoint, C: HyperCurve):
    if pair.D.degree != 0 or pair.E.degree != 0:
        raise AssertionError("arranged divisors must have degree 0")
    if not supports_disjoint(pair.D, pair.E):
        raise AssertionError("arranged supports are not disjoint")
    clsD = free_divisor_class(pair.D, C)
    clsE = free_divisor_class(pair.E, C)
    if clsD != Pn:
        raise AssertionError("D does not represent the requested class")
    # E ~ -D, except for the doubled odd-degree case where E ~ -2D
    mult = -2 if 2 * pair.scale * pair.multiple_used**2 == 1 else -1
    if clsE != jac_mul(mult, clsD):
        raise AssertionError("E is not linearly equivalent to the negative class")


# ---------------------------------------------------------------------------
# relevant places


@dataclass(frozen=True)
class PlaceReport:
    primes: tuple  # of (prime, source)
    q_value: int


def _cleared_x_generator(val: Fraction) -> UniPoly:
    return UniPoly([-val.numerator, val.denominator])


def _entry_ideal_gens(e):
    """Integral generators in (x, y) cutting out the closed point, as
    (x-polys, (c, b) y-relation or None)."""
    if e.kind == "pt":
        x0, y0 = e.data
        return [_cleared_x_generator(x0)], (y0.denominator, UniPoly([y0.numerator]))
    if e.kind == "mum":
        a, b = e.data
        aa = a.primitive()
        c = math.lcm(*(cf.denominator for cf in b.coeffs), 1)
        return [aa], (c, b * c)
    if e.kind == "vert":
        return [_cleared_x_generator(e.data[0])], None
    return None  # infinity


def _entry_leading_int(e) -> Optional[int]:
    """Leading coefficient of the cleared x-polynomial: its prime divisors
    are the residue characteristics where the piece escapes to infinity."""
    gens = _entry_ideal_gens(e)
    if gens is None:
        return None
    return abs(int(gens[0][0].lc))


def _curve_multipoly(C: HyperCurve) -> MultiPoly:
    # variables (x, y)
    eq = MultiPoly.from_unipoly(C.H, 2, 0) * MultiPoly.variable(2, 1)
    eq = eq + MultiPoly.variable(2, 1) * MultiPoly.variable(2, 1)
    eq = eq - MultiPoly.from_unipoly(C.F, 2, 0)
    return eq


def _pair_constant(e1, e2, C: HyperCurve) -> int:
    """The positive generator of Z meeting the ideal of common zeros of the
    two closed points on the affine chart."""
    g1 = _entry_ideal_gens(e1)
    g2 = _entry_ideal_gens(e2)
    if g1 is None or g2 is None:
        return 1
    gens = [_curve_multipoly(C)]
    for xpolys, yrel in (g1, g2):
        for a in xpolys:
            gens.append(MultiPoly.from_unipoly(a, 2, 0))
        if yrel is not None:
            c, b = yrel
            gens.append(
                MultiPoly.variable(2, 1) * c - MultiPoly.from_unipoly(b, 2, 0)
            )
    B = groebner_basis(IdealBasis.make(gens, RING_Z))
    q = constant_of_basis(B)
    if q == 0:
        raise InfiniteLength(
            "divisor pieces share a common point on the generic fiber"
        )
    return q


def _infinity_pair_constant(e1, e2, C: HyperCurve) -> int:
    """Integer whose prime divisors are the candidates for a common
    reduction at infinity of the two pieces."""
    l1 = _entry_leading_int(e1)
    l2 = _entry_leading_int(e2)
    if l1 is None and l2 is None:
        t1, t2 = e1.data[0], e2.data[0]
        if t1 == t2:
            raise InfiniteLength("equal points at infinity in both supports")
        if C.infinity_kind == TWO_RATIONAL:
            r1, r2 = C.inf_roots
            diff = r1 - r2
            return abs(diff.numerator)
        return 1
    if l1 is None:
        return l2
    if l2 is None:
        return l1
    return math.gcd(l1, l2)


def _divisor_meets_singular_locus(D: FreeDivisor, p: int, sing) -> bool:
    """Conservative test: does some support point of D reduce mod p to one
    of the listed singular fiber points?"""
    from .algebra import padic_valuation

    if any(pt.x is None and pt.s_poly is None for pt in sing):
        return True  # fully singular fiber: stay conservative
    for e, _ in D.entries:
        if e.kind == "inf":
            for pt in sing:
                if pt.chart == 2 and pt.x == 0:
                    return True
            continue
        if e.kind == "vert":
            z = e.data[0]
            if padic_valuation(z, p) < 0:
                if any(pt.chart == 2 for pt in sing):
                    return True
                continue
            zr = z.numerator * pow(z.denominator, -1, p) % p
            if any(pt.chart == 1 and pt.x == zr for pt in sing):
                return True
            if any(pt.chart == 1 and pt.x is None for pt in sing):
                return True  # irrational singular cluster: conservative
            continue
        if e.kind == "pt":
            x0, y0 = e.data
            if padic_valuation(x0, p) < 0:
                if any(pt.chart == 2 for pt in sing):
                    return True
                continue
            xr = x0.numerator * pow(x0.denominator, -1, p) % p
            yr = y0.numerator * pow(y0.denominator, -1, p) % p
            if any(pt.chart == 1 and pt.x == xr and pt.y == yr for pt in sing):
                return True
            continue
        a, b = e.data
        if a.min_valuation(p) < 0 or (b and b.min_valuation(p) < 0):
            return True  # cannot rule the reduction out: stay conservative
        aa = a.primitive()
        if padic_valuation(aa.lc, p) > 0 and any(pt.chart == 2 for pt in sing):
            return True
        for pt in sing:
            if pt.chart == 1:
                if pt.x is None:
                    return True  # irrational singular cluster: conservative
                av = aa(Fraction(pt.x))
                if padic_valuation(av, p) > 0:
                    bv = b(Fraction(pt.x)) - pt.y
                    if padic_valuation(bv, p) > 0 or not b:
                        return True
    return False


def relevant_places(
    D: FreeDivisor, E: FreeDivisor, C: HyperCurve, effort: int = 2_000_000
) -> PlaceReport:
    """All primes where <D,E>_p can be nonzero: primes dividing a pairwise
    affine elimination constant, primes where both pieces can collide at
    infinity (gcd of leading coefficients), and bad-reduction primes whose
    singular locus meets either divisor."""
    found = {}
    qs = 1
    for e1, _ in D.entries:
        for e2, _ in E.entries:
            both_affine = e1.kind != "inf" and e2.kind != "inf"
            if both_affine:
                q = _pair_constant(e1, e2, C)
                qs = math.lcm(qs, q)
                for p, _e in integer_factor(q, effort):
                    found.setdefault(p, "affine-groebner")
            g = _infinity_pair_constant(e1, e2, C)
            for p, _e in integer_factor(g, effort):
                found.setdefault(p, "infinity-gcd")
    # bad-reduction primes meeting either divisor
    from .nonarch import singular_locus_mod_p

    bad_candidates = {2}
    for p, _e in integer_factor(C.discriminant_integer(), effort):
        bad_candidates.add(p)
    for p in sorted(bad_candidates):
        sing = singular_locus_mod_p(C, p)
        if not sing:
            continue
        if _divisor_meets_singular_locus(D, p, sing) or _divisor_meets_singular_locus(
            E, p, sing
        ):
            found.setdefault(p, "bad-reduction")
    primes = tuple(sorted(found.items()))
    return PlaceReport(primes, qs)
