"""End-to-end height pipeline: product-formula self-tests, the genus-1
doubling-limit oracle, quadraticity, zeta-independence, pairing symmetry and
the regulator assembly."""

from fractions import Fraction

import mpmath
from mpmath import mp

import pytest

from hyperheights import (
    HyperCurve,
    JacPoint,
    PrecisionContext,
    UniPoly,
    height,
    pairing,
    regulator,
    selftest_product_formula,
)
from hyperheights.jacobian import (
    FreeDivisor,
    cantor_add,
    jac_mul,
    naive_x_height_limit,
    point_entry,
)

CTX = PrecisionContext(real_digits=30)


def _tol(digits_off):
    with mp.workdps(40):
        return mp.mpf(10) ** digits_off


@pytest.fixture(scope="module")
def h_g1(curve_g1, point_g1):
    return height(point_g1, curve_g1, CTX)


def test_height_zero_class(curve_g1):
    res = height(JacPoint.zero(curve_g1), curve_g1, CTX)
    assert res.total == 0
    assert res.per_place == ()


def test_genus1_height_matches_doubling_limit(curve_g1, point_g1, h_g1):
    oracle = naive_x_height_limit(curve_g1, point_g1, 8)
    with mp.workdps(40):
        assert abs(h_g1.total - mp.mpf(oracle)) < _tol(-3)


def test_genus1_height_reports_all_places(h_g1):
    places = [t.place for t in h_g1.per_place]
    assert "infinity" in places
    assert all(t.correction == 0 for t in h_g1.per_place if t.place != "infinity")


def test_torsion_height_is_zero():
    C = HyperCurve(UniPoly([0, 0, 0, 1]), UniPoly([1]))  # y^2 + y = x^3
    P = JacPoint(C, UniPoly([0, 1]), UniPoly([0]), 0)  # 3-torsion
    res = height(P, C, CTX)
    with mp.workdps(40):
        assert abs(res.total) < _tol(-10)


def test_quadraticity_genus1(curve_g1, point_g1, h_g1):
    res2 = height(jac_mul(2, point_g1), curve_g1, CTX)
    with mp.workdps(40):
        assert abs(res2.total - 4 * h_g1.total) < _tol(-10)


def test_zeta_independence(curve_g1, point_g1):
    a = height(point_g1, curve_g1, CTX, zeta=Fraction(2))
    b = height(point_g1, curve_g1, CTX, zeta=Fraction(7))
    assert a.zeta_list != b.zeta_list
    with mp.workdps(40):
        assert abs(a.total - b.total) < _tol(-25)


def test_jobs_parallel_matches_serial(curve_g1, point_g1, h_g1):
    res = height(point_g1, curve_g1, CTX, jobs=3)
    with mp.workdps(40):
        assert abs(res.total - h_g1.total) < _tol(-25)


def test_pairing_of_point_with_itself(curve_g1, point_g1, h_g1):
    v = pairing(point_g1, point_g1, curve_g1, CTX)
    with mp.workdps(40):
        assert abs(v - h_g1.total) < _tol(-20)


def test_regulator_single_point(curve_g1, point_g1, h_g1):
    r = regulator([point_g1], curve_g1, CTX)
    with mp.workdps(40):
        assert abs(r - h_g1.total) < _tol(-20)


def test_product_formula_rational_divisor(curve_g1):
    # D = (0,0) - (0,-1): affine, disjoint from div(x - zeta) for zeta != 0
    D = FreeDivisor(((point_entry(0, 0), 1), (point_entry(0, -1), -1)))
    rep = selftest_product_formula(Fraction(3), D, curve_g1, CTX)
    assert rep.passed
    with mp.workdps(40):
        assert abs(rep.total) < _tol(-26)


def test_product_formula_on_genus4_with_model(curve_g4, model_g4_p2):
    D = FreeDivisor(((point_entry(0, 1), 1), (point_entry(0, -1), -1)))
    rep = selftest_product_formula(
        Fraction(3), D, curve_g4, CTX, models={2: model_g4_p2}
    )
    assert rep.passed
    with mp.workdps(40):
        assert abs(rep.total) < _tol(-26)


def test_height_with_model_multiple_one(curve_g4, point_g4, model_g4_p2):
    res = height(point_g4, curve_g4, CTX, models={2: model_g4_p2})
    assert res.multiple_used == 1
    p2 = next(t for t in res.per_place if t.place == 2)
    assert p2.correction == Fraction(-11, 21)
    assert p2.note == "model"
