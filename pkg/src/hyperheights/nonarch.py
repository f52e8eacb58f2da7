"""Local Neron symbols at finite places: p-adic decomposition of divisors,
intersection multiplicities on the integral closure, singular-locus analysis,
component incidence, and correction terms from regular-model data.

The symbol at p is (naive intersection + correction) * log p.  The naive part
is computed on the two affine charts of the projective closure; the
correction vanishes whenever the special fiber is irreducible, or whenever
one of the two divisors reduces entirely into a single fiber component
through regular points of the arithmetic surface (the "regularity dodge").
Corrections at genuinely reducible fibers require externally supplied
regular-model data; blow-ups are never computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
import sympy

from .algebra import (
    PrecisionContext,
    UniPoly,
    _gfp_divmod,
    _gfp_mod,
    _gfp_mul,
    _gfp_xgcd,
    factor_over_Qp,
    padic_valuation,
    unit_split,
)
from .errors import InconsistentModel, InfiniteLength, ModelRequired
from .groebner import IdealBasis, MultiPoly, groebner_basis, local_length, ring_local
from .jacobian import (
    INF_MINUS,
    INF_PLUS,
    FreeDivisor,
    HyperCurve,
    ONE_WEIERSTRASS,
)

INF_VAL = object()  # sentinel valuation for an exact zero difference


# ---------------------------------------------------------------------------
# small GF(p) utilities on integer coefficient lists (ascending order)


def _gfp_of_unipoly(f: UniPoly, p: int):
    out = []
    for c in f.coeffs:
        if c.denominator % p == 0:
            raise ValueError("polynomial not p-integral")
        out.append(c.numerator * pow(c.denominator, -1, p) % p)
    while out and out[-1] == 0:
        out.pop()
    return out


def _gfp_derivative(f, p):
    return _gfp_mod([i * c for i, c in enumerate(f)][1:], p)


def _gfp_gcd(a, b, p):
    g, _, _ = _gfp_xgcd(a, b, p)
    return g


def _gfp_powmod(c, e, m, p):
    """c^e mod (m, p) by square and multiply."""
    _, c = _gfp_divmod(c, m, p)
    out = [1]
    while e:
        if e & 1:
            _, out = _gfp_divmod(_gfp_mul(out, c, p), m, p)
        c_sq = _gfp_mul(c, c, p)
        _, c = _gfp_divmod(c_sq, m, p)
        e >>= 1
    return out


def _gfp_eval(f, x0, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x0 + c) % p
    return acc


def _gfp_factor(f, p):
    """Irreducible factorization over GF(p) via sympy; returns a list of
    (ascending int coefficient list, exponent) with monic factors."""
    if not f:
        raise ValueError("cannot factor zero")
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(f)), x, modulus=p, symmetric=False)
    _, facs = poly.factor_list()
    out = []
    for fac, e in facs:
        cs = [int(c) % p for c in reversed(fac.all_coeffs())]
        out.append((cs, e))
    return out


def _lift_gfp(f) -> UniPoly:
    return UniPoly(list(f))


def _sqrt_mod_char2(c, m, p=2):
    """Square root in the field GF(2)[x]/(m): Frobenius inverse."""
    d = len(m) - 1
    return _gfp_powmod(c, 2 ** max(d - 1, 0), m, p)


def _is_square_gfp(f, p):
    """Is f a square in GF(p)[x]?  Returns the root or None."""
    if not f:
        return []
    lc = f[-1]
    if p != 2:
        if sympy.jacobi_symbol(lc, p) == -1:
            return None
        s_lc = int(sympy.sqrt_mod(lc, p))
    else:
        s_lc = lc  # every element of GF(2) is its own square root
    root = [s_lc]
    for fac, e in _gfp_factor(f, p):
        if e % 2:
            return None
        for _ in range(e // 2):
            root = _gfp_mul(root, fac, p)
    if _gfp_mod([-c for c in _gfp_mul(root, root, p)], p) != _gfp_mod(
        [-c for c in f], p
    ):
        # sign bookkeeping of the leading square root
        root = [(-c) % p for c in root]
    return root


# ---------------------------------------------------------------------------
# charts and the singular locus


def chart2_polys(C: HyperCurve):
    """The second affine chart (z, w) = (1/x, y/x^(g+1)) of the closure:
    w^2 + H~(z) w = F~(z)."""
    g = C.genus
    return C.F.reversed(2 * g + 2), C.H.reversed(g + 1)


@dataclass(frozen=True)
class SingularPoint:
    """A singular point of the special fiber mod p (or a Galois cluster of
    them, when the residue x-coordinate is irrational).  ``regular`` records
    whether the arithmetic surface is regular there; ``x is None`` with
    ``s_poly is None`` marks a fully singular fiber."""

    chart: int
    x: Optional[int]
    y: Optional[int]
    regular: bool
    p: int = 0
    s_poly: Optional[UniPoly] = None
    y_poly: Optional[UniPoly] = None


def _surface_regular_at(F: UniPoly, H: UniPoly, s: UniPoly, yhat: UniPoly, p: int):
    """Second-order test: with m = (p, s(x), y - yhat(x)) at a fiber-singular
    point, the surface is regular iff G(x, yhat) has p-valuation exactly 1
    modulo s."""
    w = (yhat * yhat + H * yhat - F) % s if s.degree else (yhat * yhat + H * yhat - F)
    if not w:
        return False
    return w.min_valuation(p) == 1


def _chart_singular_points(F: UniPoly, H: UniPoly, chart: int, p: int):
    fbar = _gfp_of_unipoly(F, p)
    hbar = _gfp_of_unipoly(H, p)
    out = []
    if p != 2:
        U = F * 4 + H * H
        ubar = _gfp_of_unipoly(U, p)
        if not ubar:
            out.append(SingularPoint(chart, None, None, False, p))
            return out
        locus = _gfp_gcd(ubar, _gfp_derivative(ubar, p), p)
        if len(locus) <= 1:
            return out
        inv2 = pow(2, -1, p)
        for s, _e in _gfp_factor(locus, p):
            shat = _lift_gfp(s)
            _, ybar = _gfp_divmod([(-c * inv2) % p for c in hbar], s, p)
            yhat = _lift_gfp(ybar)
            reg = _surface_regular_at(F, H, shat, yhat, p)
            if len(s) == 2:  # rational point
                x0 = (-s[0]) % p
                out.append(
                    SingularPoint(chart, x0, _gfp_eval(ybar, x0, p), reg, p, shat, yhat)
                )
            else:
                out.append(SingularPoint(chart, None, None, reg, p, shat, yhat))
        return out
    # p = 2
    if not hbar:
        locus = _gfp_derivative(fbar, p)
        if not locus:
            out.append(SingularPoint(chart, None, None, False, p))
            return out
        factors = _gfp_factor(locus, p)
    else:
        factors = _gfp_factor(hbar, p) if len(hbar) > 1 else []
    for s, _e in factors:
        if len(s) <= 1:
            continue
        _, fr = _gfp_divmod(fbar, s, p)
        ybar = _sqrt_mod_char2(fr, s)
        if hbar:
            # remaining Jacobian condition: H'(x) y - F'(x) = 0 mod (2, s)
            cond = _gfp_mul(_gfp_derivative(hbar, p), ybar, p)
            cond = [(a - b) % p for a, b in _zip_pad(cond, _gfp_derivative(fbar, p))]
            _, cond = _gfp_divmod(_gfp_mod(cond, p), s, p) if _gfp_mod(cond, p) else (0, [])
            if cond:
                continue
        shat = _lift_gfp(s)
        yhat = _lift_gfp(ybar)
        reg = _surface_regular_at(F, H, shat, yhat, p)
        if len(s) == 2:
            x0 = (-s[0]) % p
            out.append(
                SingularPoint(chart, x0, _gfp_eval(ybar, x0, p), reg, p, shat, yhat)
            )
        else:
            out.append(SingularPoint(chart, None, None, reg, p, shat, yhat))
    return out


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return zip(a + [0] * (n - len(a)), b + [0] * (n - len(b)))


def singular_locus_mod_p(C: HyperCurve, p: int):
    """Singular points of the special fiber mod p on both charts, each
    flagged with the second-order surface-regularity test.  Chart-2 entries
    are restricted to z = 0 (the rest is glued to chart 1)."""
    out = list(_chart_singular_points(C.F, C.H, 1, p))
    F2, H2 = chart2_polys(C)
    for pt in _chart_singular_points(F2, H2, 2, p):
        if pt.x == 0 or pt.x is None:
            out.append(pt)
    return tuple(out)


def _fiber_sections(C: HyperCurve, p: int):
    """If the special fiber mod p is reducible over GF(p), it splits into two
    sections y = r1(x), y = r2(x); returns (r1, r2) as GF(p) coefficient
    lists, or None when the fiber has a single component (possibly with
    multiplicity)."""
    hbar = _gfp_of_unipoly(C.H, p)
    fbar = _gfp_of_unipoly(C.F, p)
    if p != 2:
        U = C.F * 4 + C.H * C.H
        ubar = _gfp_of_unipoly(U, p)
        if not ubar:
            return None  # double section: single support component
        s = _is_square_gfp(ubar, p)
        if s is None:
            return None
        inv2 = pow(2, -1, p)
        r1 = _gfp_mod([(-h + sv) * inv2 for h, sv in _zip_pad(hbar, s)], p)
        r2 = _gfp_mod([(-h - sv) * inv2 for h, sv in _zip_pad(hbar, s)], p)
        if r1 == r2:
            return None
        return r1, r2
    if not hbar:
        return None  # y^2 = f in char 2: a single (possibly doubled) component
    t = max(len(hbar) - 1, (len(fbar)) // 2, 1)
    if t > 16:
        return None  # out of reach; conservative single-component answer
    for mask in range(2 ** (t + 1)):
        r = [(mask >> i) & 1 for i in range(t + 1)]
        test = _gfp_mul(r, r, p)
        test = _gfp_mod(
            [a + b for a, b in _zip_pad(test, _gfp_mul(hbar, r, p))], p
        )
        test = _gfp_mod([a - b for a, b in _zip_pad(test, fbar)], p)
        if not test:
            r1 = _gfp_mod(r, p)
            r2 = _gfp_mod([a + b for a, b in _zip_pad(r1, hbar)], p)
            if r1 == r2:
                return None
            return r1, r2
    return None


def _poly_mod_key(poly, q: int) -> str:
    """Compact ascending string of the coefficients of ``poly`` reduced
    mod q (denominators inverted mod q); used in fine incidence labels."""
    if poly is None:
        return "0"
    terms = []
    for k, c in enumerate(poly.coeffs):
        c = Fraction(c)
        if math.gcd(c.denominator, q) != 1:
            r = "?"
        else:
            r = c.numerator * pow(c.denominator, -1, q) % q
            if r == 0:
                continue
        if k == 0:
            terms.append(f"{r}")
        elif k == 1:
            terms.append(f"{r}x" if r != 1 else "x")
        else:
            terms.append(f"{r}x^{k}" if r != 1 else f"x^{k}")
    return "+".join(terms) if terms else "0"


# ---------------------------------------------------------------------------
# p-adic decomposition of divisors


@dataclass(frozen=True)
class LocalDivisorPiece:
    """An irreducible (or single-residue-class) piece of a divisor over Q_p
    in the R-rational ideal normal form (a1(x), p^s y - b1(x)) on one of the
    two charts.  ``yquad`` replaces the y-relation for full-fiber pieces
    whose residue field is generated by y."""

    prime: int
    chart: int
    a: UniPoly  # monic, p-integral, in the chart coordinate
    s: int = 0
    bprime: Optional[UniPoly] = None  # generator p^s*y - bprime(x)
    yquad: Optional[UniPoly] = None  # generator yquad(y), for fiber pieces
    exact: Optional[tuple] = None  # exact rational (x, y) when available
    residue_degree: int = 1
    certified: bool = True

    def label(self) -> str:
        red = self.reduction()
        if red is None:
            return f"{self.chart}:?"
        xs, ys = red
        return f"{self.chart}:{xs}:{ys}"

    def fine_label(self) -> str:
        """Finer key for incidence hints: the defining data reduced mod p^2,
        which separates sections landing on different components of the
        blown-up fiber when the mod-p reduction alone does not."""
        q = self.prime * self.prime
        astr = _poly_mod_key(self.a, q)
        if self.yquad is not None:
            ystr = "q" + _poly_mod_key(self.yquad, q)
        elif self.s > 0:
            ystr = f"s{self.s}" + _poly_mod_key(self.bprime, q)
        else:
            ystr = _poly_mod_key(self.bprime, q)
        return f"{self.chart}:{astr}:{ystr}"

    def reduction(self):
        """(xbar, ybar) when the piece reduces to a single rational fiber
        point; None otherwise."""
        p = self.prime
        abar = _gfp_of_unipoly(self.a, p)
        facs = _gfp_factor(abar, p)
        if len(facs) != 1 or len(facs[0][0]) != 2:
            return None
        x0 = (-facs[0][0][0]) % p
        if self.yquad is not None:
            yb = _gfp_of_unipoly(self.yquad, p)
            yfacs = _gfp_factor(yb, p)
            if len(yfacs) != 1 or len(yfacs[0][0]) != 2:
                return None
            return x0, (-yfacs[0][0][0]) % p
        if self.s > 0:
            return None  # ramified y: reduction of y not a unit story
        return x0, _gfp_eval(_gfp_of_unipoly(self.bprime, p), x0, p)


def _normal_form(p: int, chart: int, a: UniPoly, b: UniPoly, res_deg: int, certified=True):
    s = max(0, -(b.min_valuation(p) if b else 0))
    bprime = b * Fraction(p) ** s
    return LocalDivisorPiece(
        p, chart, a.monic(), s, bprime, None, None, res_deg, certified
    )


def _rational_point_piece(p: int, chart: int, x0: Fraction, y0: Fraction):
    a = UniPoly([-x0, 1])
    s = max(0, -padic_valuation(y0, p)) if y0 else 0
    return LocalDivisorPiece(
        p, chart, a, s, UniPoly([y0 * Fraction(p) ** s]), None, (x0, y0), 1
    )


def chart2_point(C: HyperCurve, x0: Fraction, y0: Fraction):
    g = C.genus
    z0 = 1 / x0
    return z0, y0 * z0 ** (g + 1)


def chart2_mumford(C: HyperCurve, a: UniPoly, b: UniPoly):
    """Transform a Mumford-style piece (a(x), y - b(x)) whose roots all have
    negative valuation into chart-2 data (a~(z), w - b~(z)): exact rational
    arithmetic in Q[z]/(a~)."""
    g = C.genus
    rev = a.reversed()
    atil = rev.monic()
    if atil[0] == 0:
        raise ValueError("piece has a root at x = 0; not a chart-2 piece")
    c0 = atil[0]
    # inverse of z modulo a~: z * t = 1
    t = UniPoly([-(c / c0) for c in atil.coeffs[1:]])
    # evaluate b at x = t(z) modulo a~ (Horner), then multiply by z^(g+1)
    acc = UniPoly()
    for c in reversed(b.coeffs):
        acc = (acc * t + UniPoly([c])) % atil
    zpow = UniPoly([0] * (g + 1) + [1]) % atil
    btil = (acc * zpow) % atil
    return atil, btil


def decompose_at_p(
    D: FreeDivisor, p: int, C: HyperCurve, ctx: PrecisionContext = PrecisionContext()
):
    """Decompose every entry of D into Q_p-irreducible pieces in normal form,
    keyed back to the originating entry: returns a list of
    (entry, entry_multiplicity, [(piece, piece_multiplicity), ...])."""
    F2, H2 = chart2_polys(C)
    g = C.genus
    out = []
    for e, m in D.entries:
        pieces = []
        if e.kind == "pt":
            x0, y0 = e.data
            if padic_valuation(x0, p) >= 0:
                pieces.append((_rational_point_piece(p, 1, x0, y0), 1))
            else:
                z0, w0 = chart2_point(C, x0, y0)
                pieces.append((_rational_point_piece(p, 2, z0, w0), 1))
        elif e.kind == "inf":
            tag = e.data[0]
            if C.infinity_kind == ONE_WEIERSTRASS:
                w0 = Fraction(0)
            else:
                r1, r2 = C.inf_roots
                w0 = r1 if tag == INF_PLUS else r2
            pieces.append((_rational_point_piece(p, 2, Fraction(0), w0), 1))
        elif e.kind == "vert":
            zeta = e.data[0]
            if padic_valuation(zeta, p) >= 0:
                chart, coord, (FF, HH) = 1, zeta, (C.F, C.H)
            else:
                chart, coord, (FF, HH) = 2, 1 / zeta, (F2, H2)
            quad = UniPoly([-FF(coord), HH(coord), 1])
            a = UniPoly([-coord, 1])
            for lf in factor_over_Qp(quad, p, ctx):
                if lf.factor.degree == 1:
                    y0 = -lf.factor[0]
                    s = max(0, -padic_valuation(y0, p)) if y0 else 0
                    pieces.append(
                        (
                            LocalDivisorPiece(
                                p, chart, a, s,
                                UniPoly([y0 * Fraction(p) ** s]),
                                None, None, 1, lf.certified_irreducible,
                            ),
                            lf.multiplicity,
                        )
                    )
                else:
                    pieces.append(
                        (
                            LocalDivisorPiece(
                                p, chart, a, 0, None, lf.factor, None,
                                lf.factor.degree, lf.certified_irreducible,
                            ),
                            lf.multiplicity,
                        )
                    )
        else:  # mum
            a, b = e.data
            a1, a2 = unit_split(a, p, ctx.padic_digits)
            if a1.degree > 0:
                for lf in factor_over_Qp(a1.monic(), p, ctx):
                    b1 = b % lf.factor
                    pieces.append(
                        (
                            _normal_form(
                                p, 1, lf.factor, b1, lf.factor.degree,
                                lf.certified_irreducible,
                            ),
                            lf.multiplicity,
                        )
                    )
            if a2.degree > 0:
                atil, btil = chart2_mumford(C, a2.monic(), b)
                for lf in factor_over_Qp(atil, p, ctx):
                    bt = btil % lf.factor
                    pieces.append(
                        (
                            _normal_form(
                                p, 2, lf.factor, bt, lf.factor.degree,
                                lf.certified_irreducible,
                            ),
                            lf.multiplicity,
                        )
                    )
        out.append((e, m, pieces))
    return out


# ---------------------------------------------------------------------------
# intersection multiplicities


def _chart2_entry_gens(e, C: HyperCurve):
    """Exact integral generators of the entry's chart-2 locus in (z, w), or
    None when the entry has no points in chart 2 (x = 0 support)."""
    from .heightprep import _cleared_x_generator

    g = C.genus
    if e.kind == "pt":
        x0, y0 = e.data
        if x0 == 0:
            return None
        z0 = 1 / x0
        w0 = y0 * z0 ** (g + 1)
        return [_cleared_x_generator(z0)], (w0.denominator, UniPoly([w0.numerator]))
    if e.kind == "inf":
        tag = e.data[0]
        if C.infinity_kind == ONE_WEIERSTRASS:
            w0 = Fraction(0)
        else:
            r1, r2 = C.inf_roots
            w0 = r1 if tag == INF_PLUS else r2
        return [UniPoly([0, 1])], (w0.denominator, UniPoly([w0.numerator]))
    if e.kind == "vert":
        zeta = e.data[0]
        if zeta == 0:
            return None
        return [_cleared_x_generator(1 / zeta)], None
    a, b = e.data
    if a(Fraction(0)) == 0:
        return None
    atil, btil = chart2_mumford(C, a, b)
    c = math.lcm(*(cf.denominator for cf in btil.coeffs), 1)
    return [atil.primitive()], (c, btil * c)


def _pair_constant_chart2(e1, e2, C: HyperCurve) -> int:
    from .groebner import RING_Z, constant_of_basis

    g1 = _chart2_entry_gens(e1, C)
    g2 = _chart2_entry_gens(e2, C)
    if g1 is None or g2 is None:
        return 1
    F2, H2 = chart2_polys(C)
    w = MultiPoly.variable(2, 1)
    eq = w * w + MultiPoly.from_unipoly(H2, 2, 0) * w - MultiPoly.from_unipoly(F2, 2, 0)
    gens = [eq]
    for xpolys, yrel in (g1, g2):
        for a in xpolys:
            gens.append(MultiPoly.from_unipoly(a, 2, 0))
        if yrel is not None:
            c, b = yrel
            gens.append(w * c - MultiPoly.from_unipoly(b, 2, 0))
    B = groebner_basis(IdealBasis.make(gens, RING_Z))
    q = constant_of_basis(B)
    if q == 0:
        raise InfiniteLength("divisor pieces share a chart-2 point generically")
    return q


def _min_val_pair(p: int, pc1: LocalDivisorPiece, pc2: LocalDivisorPiece) -> Fraction:
    """Rational-point formula: min of the valuations of the coordinate
    differences."""
    (x1, y1), (x2, y2) = pc1.exact, pc2.exact
    dx, dy = x1 - x2, y1 - y2
    if dx == 0 and dy == 0:
        raise InfiniteLength("identical points in both supports")
    vx = padic_valuation(dx, p) if dx else None
    vy = padic_valuation(dy, p) if dy else None
    v = min(w for w in (vx, vy) if w is not None)
    return Fraction(max(v, 0))


def _chart_equation(C: HyperCurve, chart: int) -> MultiPoly:
    if chart == 1:
        F, H = C.F, C.H
    else:
        F, H = chart2_polys(C)
    y = MultiPoly.variable(2, 1)
    return y * y + MultiPoly.from_unipoly(H, 2, 0) * y - MultiPoly.from_unipoly(F, 2, 0)


def _piece_ideal_gens(pc: LocalDivisorPiece):
    gens = [MultiPoly.from_unipoly(pc.a, 2, 0)]
    y = MultiPoly.variable(2, 1)
    if pc.bprime is not None:
        gens.append(y * (Fraction(pc.prime) ** pc.s) - MultiPoly.from_unipoly(pc.bprime, 2, 0))
    if pc.yquad is not None:
        gens.append(MultiPoly.from_unipoly(pc.yquad, 2, 1))
    return gens


def _ideal_pair(C, p, pc1, pc2, cap: int) -> Fraction:
    gens = [_chart_equation(C, pc1.chart)]
    gens.extend(_piece_ideal_gens(pc1))
    gens.extend(_piece_ideal_gens(pc2))
    gens.append(MultiPoly.const(2, Fraction(p) ** cap))
    B = groebner_basis(IdealBasis.make(gens, ring_local(p)))
    return Fraction(local_length(B))


def _pieces_collide(p: int, pc1: LocalDivisorPiece, pc2: LocalDivisorPiece) -> bool:
    """Can the two pieces share a reduction point mod p?"""
    if pc1.chart != pc2.chart:
        return False
    a1 = _gfp_of_unipoly(pc1.a, p)
    a2 = _gfp_of_unipoly(pc2.a, p)
    if len(_gfp_gcd(a1, a2, p)) <= 1:
        return False
    r1, r2 = pc1.reduction(), pc2.reduction()
    if r1 is not None and r2 is not None:
        return r1 == r2
    return True  # conservative for non-rational reductions


def _piece_meets_singular(pc: LocalDivisorPiece, pt: SingularPoint, p: int) -> bool:
    if pc.chart != pt.chart:
        return False
    if pt.x is None and pt.s_poly is None:
        return True  # fully singular fiber: everything meets it
    abar = _gfp_of_unipoly(pc.a, p)
    sbar = _gfp_of_unipoly(pt.s_poly, p)
    if len(_gfp_gcd(abar, sbar, p)) <= 1:
        return False
    red = pc.reduction()
    if red is not None and pt.x is not None:
        return red == (pt.x, pt.y)
    if pc.s == 0 and pc.bprime is not None and pt.y_poly is not None:
        # y-sections must agree somewhere over the common x-locus
        diff = pc.bprime - pt.y_poly
        common = _lift_gfp(_gfp_gcd(abar, sbar, p))
        try:
            dbar = _gfp_of_unipoly(diff % common, p) if common.degree else []
        except ValueError:
            return True
        if dbar and len(_gfp_gcd(dbar, _gfp_of_unipoly(common, p), p)) <= 1:
            return False
    return True


def intersection_at_p(
    D: FreeDivisor,
    E: FreeDivisor,
    C: HyperCurve,
    p: int,
    ctx: PrecisionContext = PrecisionContext(),
    singular=None,
    model=None,
    effort: int = 2_000_000,
) -> Fraction:
    """The intersection number i_p(D, E) on the integral closure, bilinear
    over pieces: rational-point formula where both pieces are Q_p-rational,
    the Algorithm-1 ideal length otherwise.  Raises ModelRequired when a
    common reduction point is non-regular on the surface."""
    from .heightprep import _pair_constant

    if singular is None:
        singular = singular_locus_mod_p(C, p)
    nonreg = [pt for pt in singular if not pt.regular]
    dparts = decompose_at_p(D, p, C, ctx)
    eparts = decompose_at_p(E, p, C, ctx)
    total = Fraction(0)
    for e1, m1, pcs1 in dparts:
        for e2, m2, pcs2 in eparts:
            caps = {}
            pair_total = Fraction(0)
            for pc1, k1 in pcs1:
                for pc2, k2 in pcs2:
                    if not _pieces_collide(p, pc1, pc2):
                        continue
                    separated = False
                    for pt in nonreg:
                        if _piece_meets_singular(pc1, pt, p) and _piece_meets_singular(
                            pc2, pt, p
                        ):
                            # an irreducible piece reduces to one fiber point;
                            # hints placing the two pieces at different points
                            # of the blown-up fiber prove they do not meet
                            _v1, id1 = _incidence_hint(model, pc1)
                            _v2, id2 = _incidence_hint(model, pc2)
                            if id1 is not None and id2 is not None and id1 != id2:
                                separated = True
                                break
                            raise ModelRequired(
                                f"common reduction at a non-regular point of the "
                                f"integral closure at p={p} "
                                f"(chart {pt.chart}, x={pt.x}, y={pt.y})",
                                prime=p,
                                point=(pt.chart, pt.x, pt.y),
                            )
                    if separated:
                        continue
                    if pc1.exact is not None and pc2.exact is not None:
                        pair_total += k1 * k2 * _min_val_pair(p, pc1, pc2)
                        continue
                    chart = pc1.chart
                    if chart not in caps:
                        if chart == 1:
                            q = _pair_constant(e1, e2, C)
                        else:
                            q = _pair_constant_chart2(e1, e2, C)
                        caps[chart] = padic_valuation(Fraction(q), p)
                    cap = caps[chart]
                    if cap == 0:
                        continue
                    if cap + 10 > ctx.padic_digits:
                        hi = PrecisionContext(ctx.real_digits, cap + 20)
                        return intersection_at_p(
                            D, E, C, p, hi, singular, model, effort
                        )
                    pair_total += k1 * k2 * _ideal_pair(C, p, pc1, pc2, cap)
            total += m1 * m2 * pair_total
    return total


# ---------------------------------------------------------------------------
# regular-model data, component incidence, correction terms


@dataclass(frozen=True)
class ModelData:
    """Regular-model description of the special fiber at one prime: component
    multiplicities n_i, the (unweighted) symmetric intersection matrix
    M_ij = i(Gamma_i, Gamma_j) with M n = 0, and optional incidence hints
    mapping piece labels (coarse "chart:xbar:ybar" or the fine mod-p^2 form)
    to weighted incidence vectors, optionally paired with a landing-point
    name that identifies the piece's reduction point on the regular model."""

    prime: int
    multiplicities: tuple
    matrix: tuple  # of tuples of Fraction
    incidence: dict = field(default_factory=dict)

    def validate(self):
        n = len(self.multiplicities)
        if any(len(row) != n for row in self.matrix) or len(self.matrix) != n:
            raise InconsistentModel("intersection matrix is not square")
        for i in range(n):
            for j in range(n):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise InconsistentModel("intersection matrix not symmetric")
        for i in range(n):
            if sum(self.matrix[i][j] * self.multiplicities[j] for j in range(n)):
                raise InconsistentModel(
                    "intersection matrix does not annihilate the fiber vector"
                )
        if any(m <= 0 for m in self.multiplicities):
            raise InconsistentModel("component multiplicities must be positive")
        return self


def _incidence_hint(model: Optional[ModelData], piece: LocalDivisorPiece):
    """(vector, landing point id) from the model's hints, trying the fine
    (mod p^2) label before the coarse one; (None, None) when nothing applies.
    A hint value is either a bare incidence vector or a (vector, point_id)
    pair naming the reduction point on the regular model."""
    if model is None:
        return None, None
    for key in (piece.fine_label(), piece.label()):
        if key in model.incidence:
            val = model.incidence[key]
            if (
                isinstance(val, tuple)
                and len(val) == 2
                and isinstance(val[0], (tuple, list))
            ):
                return tuple(val[0]), val[1]
            return tuple(val), None
    return None, None


def component_incidence(
    piece: LocalDivisorPiece, C: HyperCurve, p: int, model: Optional[ModelData] = None
):
    """The weighted incidence vector s(piece)_i = n_i * i(piece, Gamma_i).
    Component 0 is the strict transform of the given model's fiber."""
    vec, _pt = _incidence_hint(model, piece)
    if vec is not None:
        return vec
    ncomp = len(model.multiplicities) if model is not None else 1
    singular = singular_locus_mod_p(C, p)
    if any(_piece_meets_singular(piece, pt, p) for pt in singular if not pt.regular):
        raise ModelRequired(
            f"piece reduces to a blown-up point at p={p}; supply incidence hints",
            prime=p,
        )
    sections = _fiber_sections(C, p)
    if sections is None:
        out = [Fraction(0)] * ncomp
        out[0] = Fraction(piece.residue_degree)
        return tuple(out)
    raise ModelRequired(
        f"reducible fiber at p={p}: component membership requires model data",
        prime=p,
    )


def _solve_linear(A, b):
    """Exact Gaussian elimination; A square nonsingular, Fractions."""
    n = len(A)
    M = [list(row) + [bv] for row, bv in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise InconsistentModel("singular reduced intersection matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def correction_term(model: ModelData, sD, sE) -> Fraction:
    """The correction i(Phi(D), E) with M alpha = -t(D) mod the fiber kernel,
    t_i = s_i / n_i: Cox-Zucker normalization (alpha_i = 0 at a multiplicity-1
    component) when available, rational pseudoinverse otherwise."""
    model.validate()
    n = list(model.multiplicities)
    r = len(n)
    M = [list(map(Fraction, row)) for row in model.matrix]
    tD = [Fraction(s) / n[i] for i, s in enumerate(sD)]
    tE = [Fraction(s) / n[i] for i, s in enumerate(sE)]
    if sum(tD[i] * n[i] for i in range(r)) != 0 or sum(
        tE[i] * n[i] for i in range(r)
    ) != 0:
        raise InconsistentModel("incidence vector not orthogonal to the fiber")
    if r == 1:
        return Fraction(0)
    pivot = next((i for i, ni in enumerate(n) if ni == 1), None)
    if pivot is not None:
        idx = [i for i in range(r) if i != pivot]
        A = [[M[i][j] for j in idx] for i in idx]
        rhs = [-tD[i] for i in idx]
        sol = _solve_linear(A, rhs)
        alpha = [Fraction(0)] * r
        for k, i in enumerate(idx):
            alpha[i] = sol[k]
    else:
        # invertible perturbation M - n n^T agrees with M modulo the kernel
        A = [[M[i][j] - n[i] * n[j] for j in range(r)] for i in range(r)]
        alpha = _solve_linear(A, [-t for t in tD])
    # verify M alpha = -t(D) up to a multiple of the kernel direction
    resid = [sum(M[i][j] * alpha[j] for j in range(r)) + tD[i] for i in range(r)]
    ratios = {resid[i] / n[i] for i in range(r)}
    if len(ratios) > 1:
        raise InconsistentModel("correction solve failed consistency check")
    return sum(tE[i] * alpha[i] for i in range(r))


# ---------------------------------------------------------------------------
# the local symbol


@dataclass(frozen=True)
class LocalSymbolResult:
    prime: int
    naive_part: Fraction
    correction: Fraction
    value: object  # mpmath mpf
    note: str = ""


def _sections_of_piece(pc: LocalDivisorPiece, sections, C: HyperCurve, p: int):
    """Which fiber sections (indices into ``sections``) can the piece reduce
    into?  Chart-2 pieces are tested against the transformed sections."""
    r1, r2 = sections
    if pc.chart == 2:
        g = C.genus
        r1 = list(reversed(r1 + [0] * (g + 2 - len(r1))))
        r2 = list(reversed(r2 + [0] * (g + 2 - len(r2))))
        while r1 and r1[-1] == 0:
            r1.pop()
        while r2 and r2[-1] == 0:
            r2.pop()
    out = set()
    abar = _gfp_of_unipoly(pc.a, p)
    for i, r in enumerate((r1, r2)):
        if pc.s > 0 or (pc.bprime is None and pc.yquad is None):
            out.add(i)
            continue
        if pc.yquad is not None:
            # residue field generated by y: compare against r mod a (constant)
            out.add(i)
            continue
        diff = _gfp_of_unipoly(pc.bprime, p)
        dd = [(a - b) % p for a, b in _zip_pad(diff, list(r))]
        dd = _gfp_mod(dd, p)
        if not dd or len(_gfp_gcd(dd, abar, p)) > 1:
            out.add(i)
    return out


def _divisor_regular_single_component(
    parts, C: HyperCurve, p: int, singular, sections
) -> bool:
    """The regularity dodge test for one divisor: every piece reduces to
    regular surface points, all inside a single fiber component."""
    nonreg = [pt for pt in singular if not pt.regular]
    members = None
    for _e, _m, pcs in parts:
        for pc, _k in pcs:
            if any(_piece_meets_singular(pc, pt, p) for pt in nonreg):
                return False
            if sections is not None:
                touch = _sections_of_piece(pc, sections, C, p)
                if len(touch) != 1:
                    return False
                members = touch if members is None else members | touch
    if sections is not None and members is not None and len(members) != 1:
        return False
    return True


def local_symbol_nonarch(
    D: FreeDivisor,
    E: FreeDivisor,
    C: HyperCurve,
    p: int,
    ctx: PrecisionContext = PrecisionContext(),
    model: Optional[ModelData] = None,
    effort: int = 2_000_000,
) -> LocalSymbolResult:
    """<D, E>_p = (i_p(D,E) + correction) * log p."""
    singular = singular_locus_mod_p(C, p)
    naive = intersection_at_p(D, E, C, p, ctx, singular, model, effort)
    sections = _fiber_sections(C, p)
    note = ""
    if model is not None:
        model.validate()
        sD = _assemble_incidence(D, C, p, ctx, model)
        sE = _assemble_incidence(E, C, p, ctx, model)
        corr = correction_term(model, sD, sE)
        note = "model"
    elif not singular and sections is None:
        corr = Fraction(0)
        note = "good reduction"
    else:
        dparts = decompose_at_p(D, p, C, ctx)
        eparts = decompose_at_p(E, p, C, ctx)
        if _divisor_regular_single_component(
            dparts, C, p, singular, sections
        ) or _divisor_regular_single_component(eparts, C, p, singular, sections):
            corr = Fraction(0)
            note = "dodge"
        else:
            raise ModelRequired(
                f"correction term at p={p} requires regular-model data: "
                "both divisors meet non-regular points or several fiber "
                "components",
                prime=p,
            )
    with ctx.workdps():
        value = (mpmath.mpf(naive.numerator) / naive.denominator
                 + mpmath.mpf(corr.numerator) / corr.denominator) * mpmath.log(p)
    return LocalSymbolResult(p, naive, corr, value, note)


def _assemble_incidence(D, C, p, ctx, model):
    parts = decompose_at_p(D, p, C, ctx)
    r = len(model.multiplicities)
    s = [Fraction(0)] * r
    for _e, m, pcs in parts:
        for pc, k in pcs:
            vec = component_incidence(pc, C, p, model)
            if len(vec) != r:
                raise InconsistentModel("incidence vector length mismatch")
            for i in range(r):
                s[i] += m * k * Fraction(vec[i])
    return tuple(s)
