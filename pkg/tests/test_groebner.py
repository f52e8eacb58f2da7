"""Local ideal machinery: strong Groebner bases over Z and Z_(p), the
constant-of-basis extraction, and length counting for finite local quotients.

The length oracle enumerates residue classes directly: for an ideal
containing p^e and x_i^(a_i) for every variable, the quotient is a finite
module over Z/p^e on the monomial basis below the caps, and its cardinality
is computed from the Smith normal form of the relation matrix.  The length
over Z_(p) is then log_p of that cardinality.
"""

import math
import random
from fractions import Fraction

import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form

from hyperheights.errors import InfiniteLength
from hyperheights.groebner import (
    IdealBasis,
    MultiPoly,
    RING_Z,
    constant_of_basis,
    groebner_basis,
    local_length,
    reduce,
    ring_local,
)


def _mono_basis(caps):
    """All exponent tuples below the per-variable caps."""
    out = [()]
    for cap in caps:
        out = [e + (k,) for e in out for k in range(cap)]
    return out


def brute_force_length(p, e, caps, extra_gens):
    """log_p of the cardinality of Z[x]/(p^e, x_i^caps_i, extra_gens).

    Relations: p^e times each basis monomial, plus every basis-monomial
    multiple of each extra generator with cap-exceeding terms dropped
    (they are zero in the quotient).  Cardinality = product of the
    elementary divisors of the relation matrix taken in Z/p^e.
    """
    basis = _mono_basis(caps)
    index = {m: i for i, m in enumerate(basis)}
    rows = []
    pe = p**e
    for i in range(len(basis)):
        row = [0] * len(basis)
        row[i] = pe
        rows.append(row)
    for g in extra_gens:
        for m in basis:
            row = [0] * len(basis)
            for exp, c in g.terms.items():
                prod = tuple(a + b for a, b in zip(exp, m))
                if all(a < cap for a, cap in zip(prod, caps)):
                    assert c.denominator == 1
                    row[index[prod]] += int(c)
            rows.append(row)
    M = sympy.Matrix(rows)
    D = smith_normal_form(M, domain=sympy.ZZ)
    count = 1
    for i in range(len(basis)):
        d = int(D[i, i])
        count *= math.gcd(abs(d), pe) if d else pe
    length = 0
    while count > 1:
        assert count % p == 0
        count //= p
        length += 1
    return length


def _random_ideal(rng, p):
    """A random finite-colength ideal (p^e, x_i^a_i, extras) with its data."""
    nvars = rng.randint(1, 3)
    e = rng.randint(1, 3)
    caps = [rng.randint(1, 3) for _ in range(nvars)]
    while e * math.prod(caps) > 12:
        caps[rng.randrange(nvars)] = 1
    basis = _mono_basis(caps)
    extras = []
    for _ in range(rng.randint(0, 2)):
        terms = {}
        for m in basis:
            if rng.random() < 0.5:
                terms[m] = Fraction(rng.randint(0, p**e - 1))
        g = MultiPoly(nvars, terms)
        if g:
            extras.append(g)
    gens = [MultiPoly.const(nvars, p**e)]
    for i, cap in enumerate(caps):
        gens.append(MultiPoly(nvars, {tuple(cap if j == i else 0 for j in range(nvars)): 1}))
    gens.extend(extras)
    return nvars, e, caps, extras, IdealBasis.make(gens, ring_local(p))


def test_local_length_matches_brute_force():
    rng = random.Random(2024)
    trials = 0
    while trials < 30:
        p = rng.choice([2, 3, 5])
        nvars, e, caps, extras, I = _random_ideal(rng, p)
        expected = brute_force_length(p, e, caps, extras)
        assert local_length(I) == expected, (p, e, caps, extras)
        trials += 1
    assert trials >= 25


def test_local_length_monomial_ideal_exact():
    # Z_(2)[x,y]/(4, x^2, y^2, 2x): classes 1,2,y,2y,x,xy -> length 6
    I = IdealBasis.make(
        [
            MultiPoly.const(2, 4),
            MultiPoly(2, {(2, 0): 1}),
            MultiPoly(2, {(0, 2): 1}),
            MultiPoly(2, {(1, 0): 2}),
        ],
        ring_local(2),
    )
    assert local_length(I) == 6
    assert local_length(I) == brute_force_length(2, 2, [2, 2], [MultiPoly(2, {(1, 0): 2})])


def test_local_length_without_p_power_is_infinite():
    I = IdealBasis.make([MultiPoly(2, {(1, 0): 1})], ring_local(3))
    with pytest.raises(InfiniteLength):
        local_length(I)


def test_constant_of_basis_transverse_lines():
    # (y - x, y + x) over Z contains 2x and 2y but no smaller constant... the
    # ideal meets Z trivially; adding x - 3 forces the constant 6 at y = -x = -3
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    I = IdealBasis.make([y - x, y + x, x - MultiPoly.const(2, 3)], RING_Z)
    assert constant_of_basis(groebner_basis(I)) == 6


def test_constant_of_basis_disjoint_points():
    # points x=1 and x=2 on a line: (x-1)(x-2) plus x -> constant 2
    x = MultiPoly.variable(1, 0)
    one = MultiPoly.const(1, 1)
    two = MultiPoly.const(1, 2)
    I = IdealBasis.make([(x - one) * (x - two), x], RING_Z)
    assert constant_of_basis(groebner_basis(I)) == 2


def test_reduce_is_idempotent_and_in_ideal_complement():
    rng = random.Random(5)
    for _ in range(10):
        p = rng.choice([2, 3, 5])
        _, _, _, _, I = _random_ideal(rng, p)
        B = groebner_basis(I)
        h = MultiPoly(
            B.nvars,
            {
                tuple(rng.randint(0, 2) for _ in range(B.nvars)): rng.randint(-9, 9)
                for _ in range(4)
            },
        )
        r = reduce(h, B)
        assert reduce(r, B) == r
