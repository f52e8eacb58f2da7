"""Canonical heights, Neron-Tate pairings and regulators: the top of the
pipeline.  A height is computed by arranging disjoint-support divisor
representatives, determining the finite set of relevant places, evaluating
the local Neron symbol at each of them (p-adic intersection numbers plus
correction terms, and the theta-function Green's function at infinity), and
returning the scaled sum.

When a prime demands regular-model data that was not supplied, the pipeline
retries with a larger multiple n*P of the input class (dividing by n^2),
which frequently moves the divisors off the troublesome fibre components.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
from mpmath import mp

from .algebra import PrecisionContext
from .arch import archimedean_symbol
from .errors import ModelRequired, TorsionDetected
from .heightprep import arrange_divisors, relevant_places
from .jacobian import (
    FreeDivisor,
    HyperCurve,
    INF_MINUS,
    INF_PLUS,
    INF_W,
    JacPoint,
    ONE_WEIERSTRASS,
    TWO_RATIONAL,
    cantor_add,
    infinity_entry,
    x_fiber_divisor,
)
from .nonarch import local_symbol_nonarch


@dataclass(frozen=True)
class PlaceTerm:
    """One local Neron symbol in a height computation."""

    place: object  # prime int, or the string "infinity"
    value: object  # mpmath mpf
    naive_part: object
    correction: object
    note: str = ""


@dataclass(frozen=True)
class HeightResult:
    """Canonical height with its per-place breakdown.

    total = scale * sum of per-place values (the scale carries both the
    arrangement factor and 1/n^2 for the multiple n that was used)."""

    total: object  # mpmath mpf
    per_place: tuple  # of PlaceTerm
    scale: Fraction
    multiple_used: int
    zeta_list: tuple
    digits: int
    torsion_order: Optional[int] = None


_MAX_MULTIPLE_ATTEMPTS = 8


def height(
    P: JacPoint,
    C: HyperCurve,
    ctx: PrecisionContext = PrecisionContext(),
    models: Optional[dict] = None,
    zeta=None,
    effort: int = 2_000_000,
    jobs: int = 1,
) -> HeightResult:
    """Canonical (Neron-Tate) height of the divisor class P."""
    models = models or {}
    if P.is_zero:
        with ctx.workdps():
            zero = mpmath.mpf(0)
        return HeightResult(zero, (), Fraction(0), 0, (), ctx.real_digits, 1)
    try:
        return _height_attempts(P, C, ctx, models, zeta, effort, jobs)
    except TorsionDetected as exc:
        with ctx.workdps():
            zero = mpmath.mpf(0)
        return HeightResult(
            total=zero,
            per_place=(),
            scale=Fraction(0),
            multiple_used=exc.order or 0,
            zeta_list=(),
            digits=ctx.real_digits,
            torsion_order=exc.order,
        )


def _height_attempts(P, C, ctx, models, zeta, effort, jobs):
    min_multiple = 1
    last_exc = None
    for _ in range(_MAX_MULTIPLE_ATTEMPTS):
        pair = arrange_divisors(P, C, zeta_hint=zeta, min_multiple=min_multiple)
        try:
            return _height_of_pair(pair, C, ctx, models, effort, jobs)
        except ModelRequired as exc:
            if exc.prime is not None and exc.prime in models:
                raise  # the supplied model itself was insufficient
            last_exc = exc
            min_multiple = pair.multiple_used + 1
    raise last_exc


def _height_of_pair(pair, C, ctx, models, effort, jobs):
    D, E = pair.D, pair.E
    report = relevant_places(D, E, C, effort=effort)
    primes = sorted({p for p, _src in report.primes})

    def one_prime(p):
        return local_symbol_nonarch(D, E, C, p, ctx, model=models.get(p), effort=effort)

    if jobs > 1 and len(primes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one_prime, primes))
    else:
        results = [one_prime(p) for p in primes]

    arch_value = archimedean_symbol(D, E, C, ctx)

    terms = [
        PlaceTerm(r.prime, r.value, r.naive_part, r.correction, r.note)
        for r in results
    ]
    terms.append(PlaceTerm("infinity", arch_value, arch_value, Fraction(0), "theta"))

    with ctx.workdps():
        total = mpmath.mpf(0)
        for t in terms:
            total += t.value
        total *= mpmath.mpf(pair.scale.numerator) / pair.scale.denominator
    return HeightResult(
        total=total,
        per_place=tuple(terms),
        scale=pair.scale,
        multiple_used=pair.multiple_used,
        zeta_list=pair.zeta_list,
        digits=ctx.real_digits,
    )


def pairing(
    P: JacPoint,
    Q: JacPoint,
    C: HyperCurve,
    ctx: PrecisionContext = PrecisionContext(),
    models: Optional[dict] = None,
    **kw,
):
    """Neron-Tate pairing (P,Q) = (h(P+Q) - h(P) - h(Q)) / 2."""
    S = cantor_add(P, Q, C)
    hS = _height_total(S, C, ctx, models, **kw)
    hP = _height_total(P, C, ctx, models, **kw)
    hQ = _height_total(Q, C, ctx, models, **kw)
    with ctx.workdps():
        return (hS - hP - hQ) / 2


def _height_total(P, C, ctx, models, **kw):
    if P.is_zero:
        with ctx.workdps():
            return mpmath.mpf(0)
    return height(P, C, ctx, models, **kw).total


def regulator(
    points,
    C: HyperCurve,
    ctx: PrecisionContext = PrecisionContext(),
    models: Optional[dict] = None,
    **kw,
):
    """Gram determinant det((P_i, P_j)) of the Neron-Tate pairing."""
    n = len(points)
    if n == 0:
        return mpmath.mpf(1)
    heights = [_height_total(P, C, ctx, models, **kw) for P in points]
    with ctx.workdps():
        G = mp.matrix(n, n)
        for i in range(n):
            G[i, i] = heights[i]
    for i in range(n):
        for j in range(i + 1, n):
            S = cantor_add(points[i], points[j], C)
            hS = _height_total(S, C, ctx, models, **kw)
            with ctx.workdps():
                G[i, j] = G[j, i] = (hS - heights[i] - heights[j]) / 2
    with ctx.workdps():
        return mp.det(G)


def _principal_x_divisor(zeta, C: HyperCurve) -> FreeDivisor:
    """div(x - zeta): the affine fibre minus the poles at infinity."""
    fiber = x_fiber_divisor(zeta, C)
    if C.infinity_kind == ONE_WEIERSTRASS:
        poles = FreeDivisor(((infinity_entry(INF_W), 2),))
    elif C.infinity_kind == TWO_RATIONAL:
        poles = FreeDivisor(
            ((infinity_entry(INF_PLUS), 1), (infinity_entry(INF_MINUS), 1))
        )
    else:
        raise ValueError("no rational points at infinity")
    return fiber - poles


@dataclass(frozen=True)
class SelfTestReport:
    zeta: Fraction
    per_place: tuple  # of PlaceTerm
    total: object  # should be ~0
    tolerance: object
    passed: bool


def selftest_product_formula(
    zeta,
    D: FreeDivisor,
    C: HyperCurve,
    ctx: PrecisionContext = PrecisionContext(),
    models: Optional[dict] = None,
    effort: int = 2_000_000,
) -> SelfTestReport:
    """Sum of <D, div(x - zeta)>_v over all places; the product formula makes
    it exactly zero, so the numerical sum certifies the whole chain."""
    models = models or {}
    zeta = Fraction(zeta)
    E = _principal_x_divisor(zeta, C)
    report = relevant_places(D, E, C, effort=effort)
    primes = sorted({p for p, _src in report.primes})
    terms = []
    for p in primes:
        r = local_symbol_nonarch(D, E, C, p, ctx, model=models.get(p), effort=effort)
        terms.append(PlaceTerm(r.prime, r.value, r.naive_part, r.correction, r.note))
    v = archimedean_symbol(D, E, C, ctx)
    terms.append(PlaceTerm("infinity", v, v, Fraction(0), "theta"))
    with ctx.workdps():
        total = mpmath.mpf(0)
        for t in terms:
            total += t.value
        tol = mpmath.mpf(10) ** (-ctx.real_digits + 4)
        passed = abs(total) < tol
    return SelfTestReport(zeta, tuple(terms), total, tol, passed)
