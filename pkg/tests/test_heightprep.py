"""Divisor arrangement and relevant-place search: disjoint supports, class
verification, torsion detection, and completeness of the candidate prime set
(every prime where the divisors could meet is reported)."""

from fractions import Fraction

import pytest

from hyperheights import HyperCurve, JacPoint, UniPoly
from hyperheights.errors import TorsionDetected
from hyperheights.heightprep import (
    arrange_divisors,
    free_divisor_class,
    relevant_places,
)
from hyperheights.jacobian import jac_mul, jac_neg, supports_disjoint


G2_FAMILY = HyperCurve(UniPoly([1, 0, 3, 0, 0, 1]), UniPoly([]))  # odd degree
G1 = HyperCurve(UniPoly([0, -1, 0, 1]), UniPoly([1]))
G4 = HyperCurve(UniPoly([1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 1]), UniPoly([]))  # split


def _check_pair(pair, Pn, C):
    assert pair.D.degree == 0 and pair.E.degree == 0
    assert supports_disjoint(pair.D, pair.E)
    assert free_divisor_class(pair.D, C) == Pn


def test_arrangement_odd_degree_point():
    P = JacPoint(G2_FAMILY, UniPoly([0, 1]), UniPoly([1]), 0)
    pair = arrange_divisors(P, G2_FAMILY)
    Pn = jac_mul(pair.multiple_used, P)
    _check_pair(pair, Pn, G2_FAMILY)
    # odd affine degree doubles E and halves the scale
    d = Pn.u.degree
    expected = Fraction(1, pair.multiple_used**2)
    if d % 2:
        expected /= 2
        assert free_divisor_class(pair.E, G2_FAMILY) == jac_mul(-2, Pn)
    else:
        assert free_divisor_class(pair.E, G2_FAMILY) == jac_neg(Pn)
    assert pair.scale == expected


def test_arrangement_split_model_with_delta():
    P = JacPoint(G4, UniPoly([0, 1]), UniPoly([1]), 1)
    pair = arrange_divisors(P, G4)
    Pn = jac_mul(pair.multiple_used, P)
    _check_pair(pair, Pn, G4)
    assert free_divisor_class(pair.E, G4) == jac_neg(Pn)
    assert len(pair.zeta_list) == 2  # distinct fibers balance D and E


def test_arrangement_zeta_hint_respected():
    P = JacPoint(G1, UniPoly([0, 1]), UniPoly([0]), 0)
    pair = arrange_divisors(P, G1, zeta_hint=Fraction(5))
    assert Fraction(5) in pair.zeta_list


def test_arrangement_min_multiple():
    P = JacPoint(G1, UniPoly([0, 1]), UniPoly([0]), 0)
    pair = arrange_divisors(P, G1, min_multiple=3)
    assert pair.multiple_used >= 3
    assert pair.scale <= Fraction(1, 9)


def test_torsion_detected():
    C = HyperCurve(UniPoly([0, 0, 0, 1]), UniPoly([1]))  # y^2 + y = x^3
    P = JacPoint(C, UniPoly([0, 1]), UniPoly([0]), 0)  # 3-torsion
    with pytest.raises(TorsionDetected):
        arrange_divisors(P, C, min_multiple=3)  # 3P = 0 surfaces the torsion


def test_relevant_places_cover_visible_intersections():
    # D and E share the reduction x=0, y=1 mod 3 by construction
    P = JacPoint(G2_FAMILY, UniPoly([0, 1]), UniPoly([1]), 0)
    pair = arrange_divisors(P, G2_FAMILY)
    report = relevant_places(pair.D, pair.E, G2_FAMILY)
    primes = {p for p, _src in report.primes}
    # bad-reduction primes of the curve are always included
    disc = G2_FAMILY.discriminant_integer()
    for p in (2,):
        if disc % p == 0:
            assert p in primes
