"""Exact-arithmetic foundations: univariate polynomials, p-adic valuations,
rational reconstruction, integer factoring and p-adic polynomial factoring.
Oracles: sympy for polynomial and integer arithmetic; direct product checks
for the factorizations."""

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperheights.algebra import (
    UniPoly,
    factor_over_Q,
    factor_over_Qp,
    integer_factor,
    padic_valuation,
    rational_reconstruct,
    unit_part,
    unit_split,
    PrecisionContext,
)

fractions = st.fractions(
    min_value=-50, max_value=50, max_denominator=12
)
polys = st.lists(fractions, min_size=0, max_size=7).map(UniPoly)


# ---------------------------------------------------------------------------
# UniPoly ring axioms and agreement with sympy


@given(polys, polys)
def test_unipoly_add_matches_sympy(f, g):
    x = sympy.Symbol("x")
    lhs = (f + g).to_sympy()
    rhs = sympy.expand(f.to_sympy() + g.to_sympy())
    assert sympy.expand(lhs - rhs) == 0


@given(polys, polys)
@settings(max_examples=40)
def test_unipoly_mul_matches_sympy(f, g):
    lhs = (f * g).to_sympy()
    rhs = sympy.expand(f.to_sympy() * g.to_sympy())
    assert sympy.expand(lhs - rhs) == 0


@given(polys, polys)
def test_unipoly_divmod_identity(f, g):
    if not g:
        return
    q, r = f.divmod(g)
    assert q * g + r == f
    assert r.degree < g.degree or not r


@given(polys, fractions)
def test_unipoly_evaluation_is_ring_hom(f, a):
    x = sympy.Symbol("x")
    expr = sympy.sympify(f.to_sympy())
    expected = Fraction(sympy.Rational(expr.subs(x, sympy.Rational(a))))
    assert f(a) == expected


@given(polys)
def test_unipoly_derivative_matches_sympy(f):
    x = sympy.Symbol("x")
    lhs = f.derivative().to_sympy()
    rhs = sympy.expand(sympy.diff(f.to_sympy(), x))
    assert sympy.expand(lhs - rhs) == 0


@given(polys, polys)
@settings(max_examples=30)
def test_unipoly_resultant_matches_sympy(f, g):
    if f.degree < 1 or g.degree < 1:
        return
    x = sympy.Symbol("x")
    expected = Fraction(sympy.Rational(sympy.resultant(f.to_sympy(), g.to_sympy(), x)))
    assert f.resultant(g) == expected


def test_from_roots_and_shift():
    f = UniPoly.from_roots([1, 2, Fraction(1, 2)])
    assert f(1) == 0 and f(2) == 0 and f(Fraction(1, 2)) == 0
    g = f.shift(3)
    assert g(-2) == 0  # root moved from 1 to 1 - 3


# ---------------------------------------------------------------------------
# valuations and reconstruction


def test_padic_valuation_basics():
    assert padic_valuation(Fraction(12), 2) == 2
    assert padic_valuation(Fraction(1, 9), 3) == -2
    assert padic_valuation(Fraction(0), 5) == float("inf")


@given(st.integers(-10, 10), st.sampled_from([2, 3, 5, 7]))
def test_unit_part_recomposes(v, p):
    q = Fraction(p) ** v * Fraction(3 if p != 3 else 2, 7 if p != 7 else 11)
    assert padic_valuation(q, p) == v
    assert unit_part(q, p) * Fraction(p) ** v == q


@given(
    st.integers(-40, 40).filter(bool),
    st.integers(1, 40),
)
def test_rational_reconstruct_roundtrip(num, den):
    q = Fraction(num, den)  # reduced form keeps |num|, den <= 40
    m = 3203  # prime > 2 * 40^2, so such fractions reconstruct uniquely
    a = q.numerator * pow(q.denominator, -1, m) % m
    assert rational_reconstruct(a, m) == q


# ---------------------------------------------------------------------------
# factoring


@given(st.integers(2, 10**9))
@settings(max_examples=50)
def test_integer_factor_matches_sympy(n):
    assert dict(integer_factor(n)) == sympy.factorint(n)


def test_integer_factor_deep_composite():
    # a product of several 30+-bit primes exercises repeated rho splits
    ps = [1073741827, 1073741831, 2147483647, 2305843009213693951]
    n = 1
    for p in ps:
        n *= p
    assert dict(integer_factor(n)) == {p: 1 for p in ps}


def test_factor_over_Q_recomposes():
    rng = random.Random(7)
    for _ in range(10):
        f = UniPoly([Fraction(rng.randint(-9, 9)) for _ in range(rng.randint(2, 6))])
        if f.degree < 1:
            continue
        prod = UniPoly([1])
        for g, e in factor_over_Q(f):
            prod = prod * g**e
        assert prod.degree == f.degree
        assert prod * (f.lc / prod.lc) == f  # equal up to the constant


def test_factor_over_Qp_recomposes_mod_pN():
    ctx = PrecisionContext(padic_digits=30)
    rng = random.Random(11)
    checked = 0
    for p in (2, 3, 5):
        while checked < 5 * (1 if p == 2 else 2):
            f = UniPoly(
                [Fraction(rng.randint(-20, 20)) for _ in range(rng.randint(3, 6))]
            )
            if (
                f.degree < 2
                or padic_valuation(f.lc, p) != 0
                or f.gcd(f.derivative()).degree > 0
            ):
                continue
            pieces = factor_over_Qp(f, p, ctx)
            prod = UniPoly([Fraction(1)])
            total = 0
            for lf in pieces:
                prod = prod * lf.factor**lf.multiplicity
                total += lf.degree * lf.multiplicity
            assert total == f.degree
            diff = prod - f.monic()
            margin = min(lf.precision for lf in pieces) - 4
            for c in diff.coeffs:
                assert padic_valuation(c, p) >= margin
            checked += 1


def test_unit_split_separates_integral_roots():
    # (x + 1)(2x + 1): one 2-integral root, one of valuation -1
    f = UniPoly([Fraction(1), Fraction(3), Fraction(2)])
    a1, a2 = unit_split(f, 2)
    assert a1 * a2 == f
    assert a1.degree == 1
    assert padic_valuation(a1.lc, 2) == 0
    assert a1.is_p_integral(2)
