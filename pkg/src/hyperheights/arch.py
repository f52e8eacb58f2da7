"""The archimedean local Neron symbol: hyperelliptic period matrices,
Abel-Jacobi maps, theta functions with characteristic, the Neron function
lambda_Theta, and the Green's-function evaluation formula.

Everything is computed on the squared model y1^2 = U(x), U = 4F + H^2
(y1 = 2y + H), whose branch points drive the homology construction: the
branch points are chained in lexicographic order, each edge carries the cycle
that runs along it on one sheet and back on the other, intersection numbers
of adjacent edge cycles are read off from square-root argument comparison at
the shared branch point, and an integer symplectic reduction produces the
period matrix tau.  Square roots along paths are tracked exactly by counting
branch-cut crossings of the individual factors x - e_j on each straight
segment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
from mpmath import mp, mpc, mpf

from .algebra import PrecisionContext, UniPoly
from .errors import (
    BranchCollision,
    NotSiegel,
    OnThetaDivisor,
    PaddingExhausted,
    PrecisionExhausted,
)
from .jacobian import (
    INF_MINUS,
    INF_PLUS,
    FreeDivisor,
    HyperCurve,
    ONE_WEIERSTRASS,
)


# ---------------------------------------------------------------------------
# square-root tracking along straight segments


def _segment_crossings(z0, z1, roots):
    """Parameters t in (0,1) where some factor x(t) - e crosses the negative
    real axis (the principal square root's branch cut), x(t) = z0 + t(z1-z0)."""
    out = []
    dz = z1 - z0
    for e in roots:
        di = mp.im(dz)
        if abs(di) < mp.eps * (1 + abs(dz)) * 10:
            continue  # segment parallel to the cut: no transversal crossing
        t = mp.im(e - z0) / di
        if t <= mp.eps or t >= 1 - mp.eps:
            continue
        if mp.re(z0 + t * dz - e) < 0:
            out.append(t)
    out.sort()
    return out


class _TrackedSqrt:
    """A continuous branch of sqrt(c * prod (x - e_j)) along the segment
    [z0, z1], anchored at a starting value at t = 0."""

    def __init__(self, z0, z1, roots, const, start_value=None):
        self.z0, self.z1, self.roots, self.const = z0, z1, list(roots), const
        self.crossings = _segment_crossings(z0, z1, self.roots)
        self.sign = 1
        v0 = self._raw(mpf(0))
        if start_value is not None and abs(start_value - v0) > abs(start_value + v0):
            self.sign = -1

    def _raw(self, t):
        x = self.z0 + t * (self.z1 - self.z0)
        acc = mp.sqrt(self.const)
        for e in self.roots:
            acc *= mp.sqrt(x - e)
        flips = sum(1 for c in self.crossings if c < t)
        return acc if flips % 2 == 0 else -acc

    def __call__(self, t):
        return self.sign * self._raw(t)


# ---------------------------------------------------------------------------
# period data


@dataclass
class PeriodData:
    """Everything needed to evaluate archimedean symbols on one curve at one
    precision: branch points, the symplectic period matrix tau, the inverse
    A-period matrix mapping raw integrals to lattice coordinates, the
    Abel-Jacobi base point (the first branch point), images of the points at
    infinity, and the calibrated theta characteristic."""

    curve: HyperCurve
    digits: int
    branch_points: list
    lc: object  # leading coefficient of U
    tau: object  # g x g mpmath matrix
    a_inv: object  # inverse of the A-period matrix
    imtau_inv: object
    char_a: tuple
    char_b: tuple
    z_inf: dict  # tag -> lattice coordinate vector
    base_index: int = 0

    @property
    def genus(self):
        return self.curve.genus


def _u_poly(C: HyperCurve) -> UniPoly:
    return C.F * 4 + C.H * C.H


def _branch_points(C: HyperCurve, digits):
    U = _u_poly(C)
    with mp.workdps(digits + 10):
        coeffs = [mpc(c.numerator) / c.denominator for c in reversed(U.coeffs)]
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=120)
        roots.sort(key=lambda r: (mp.re(r), mp.im(r)))
        scale = max(abs(r) for r in roots) + 1
        for r1, r2 in itertools.combinations(roots, 2):
            if abs(r1 - r2) < scale * mpf(10) ** (-digits + 2):
                raise BranchCollision(
                    "two branch points coincide at working precision"
                )
    return roots, mpc(U.lc.numerator) / U.lc.denominator


def _edge_sqrt_const(lc, roots, i, j):
    """Constant c with y_edge(t)^2 = (1-t^2) * c * prod_others(x(t)-e):
    c = -h^2 * lc for h = (e_j - e_i)/2."""
    h = (roots[j] - roots[i]) / 2
    return -lc * h * h


def _edge_period(C, roots, lc, i, j, digits):
    """Vector of 2 * int_{e_i}^{e_j} x^(k-1) dx / y1, k = 1..g, by
    Gauss-Chebyshev with node doubling, plus the tracked square root used
    (for intersection-sign queries)."""
    g = C.genus
    with mp.workdps(digits + 10):
        u, v = roots[i], roots[j]
        m, h = (u + v) / 2, (v - u) / 2
        others = [roots[k] for k in range(len(roots)) if k not in (i, j)]
        tracked = _TrackedSqrt(m - h, m + h, others, _edge_sqrt_const(lc, roots, i, j))

        def values(N):
            acc = [mpc(0)] * g
            for jj in range(1, N + 1):
                t = mp.cos(mp.pi * (2 * jj - 1) / (2 * N))
                x = m + h * t
                c = tracked((t + 1) / 2)
                w = 1 / c
                xp = mpc(1)
                for k in range(g):
                    acc[k] += xp * w
                    xp *= x
            return [2 * h * (mp.pi / N) * a for a in acc]

        N = 32
        prev = values(N)
        target = mpf(10) ** (-digits - 2)
        while N < 1024:
            N *= 2
            cur = values(N)
            err = max(abs(a - b) for a, b in zip(cur, prev))
            norm = max(max(abs(a) for a in cur), mpf(1))
            if err < target * norm:
                return cur, tracked
            prev = cur
        # a nearby branch point spoils the Chebyshev convergence rate: fall
        # back to adaptive path integration along the same segment, matching
        # the edge determination at the midpoint
        per = _edge_period_by_path(C, roots, lc, u, v, tracked, digits)
        return per, tracked


def _edge_period_by_path(C, roots, lc, u, v, tracked_edge, digits):
    """Edge period by adaptive segment integration from u to v through the
    midpoint, with the square root anchored to the edge determination."""
    g = C.genus
    m = (u + v) / 2
    total = [mpc(0)] * g
    value = None
    for half in ((u, m), (m, v)):
        pieces = _refine_segment(half[0], half[1], roots, 0)
        for z0, z1 in zip(pieces, pieces[1:]):
            vec, value = _integrate_segment(C, roots, lc, z0, z1, value, digits)
            total = [a + b for a, b in zip(total, vec)]
        if half[1] is m or half[1] == m:
            ref = tracked_edge(mpf("0.5"))  # the edge determination at m
            if abs(value - ref) > abs(value + ref):
                total = [-a for a in total]
                value = -value
    return [2 * a for a in total]


def _edge_arg_at(tracked: _TrackedSqrt, at_end: bool):
    """Argument of the edge determination of y1 near one endpoint (t in the
    segment parametrization [0,1])."""
    eps = mpf(10) ** (-6)
    t = 1 - eps if at_end else eps
    # y_edge = sqrt(1-s^2) * c(t); the sqrt(1-s^2) factor is positive real
    return mp.arg(tracked(t))


def _intersection_sign(tr1, tr2):
    """Sign of the intersection of the two adjacent edge cycles at the shared
    branch point (end of edge 1 = start of edge 2)."""
    th1 = _edge_arg_at(tr1, True)
    th2 = _edge_arg_at(tr2, False)
    s = mp.sin(th2 - th1)
    if abs(s) < mpf("0.01"):
        raise PrecisionExhausted("ambiguous cycle intersection angle")
    return -1 if s > 0 else 1


def _symplectic_basis(K):
    """Integer change of basis S with S^T K S = [[0,I],[-I,0]] for a
    nondegenerate skew-symmetric integer matrix K (column convention)."""
    n = len(K)
    basis = [[1 if i == j else 0 for i in range(n)] for j in range(n)]  # columns

    def pair(u, v):
        return sum(u[i] * K[i][j] * v[j] for i in range(n) for j in range(n))

    a_vecs, b_vecs = [], []
    pool = list(basis)
    while pool:
        best = None
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                c = pair(pool[i], pool[j])
                if c and (best is None or abs(c) < abs(best[2])):
                    best = (i, j, c)
        if best is None:
            raise NotSiegel("degenerate intersection form")
        i, j, c = best
        u, v = pool[i], pool[j]
        if c < 0:
            v = [-x for x in v]
            c = -c
        if c != 1:
            raise NotSiegel("intersection form is not unimodular on the basis")
        rest = [pool[k] for k in range(len(pool)) if k not in (i, j)]
        newrest = []
        for w in rest:
            cu, cv = pair(w, v), pair(w, u)
            w2 = [w[t] - cu * u[t] + cv * v[t] for t in range(n)]
            newrest.append(w2)
        a_vecs.append(u)
        b_vecs.append(v)
        pool = newrest
    cols = a_vecs + b_vecs
    return [[cols[j][i] for j in range(n)] for i in range(n)]  # matrix with columns


def _build_periods(C: HyperCurve, digits):
    roots, lc = _branch_points(C, digits)
    g = C.genus
    n = len(roots)
    nedges = n - 1
    with mp.workdps(digits + 10):
        periods, trackers = [], []
        for i in range(nedges):
            per, tr = _edge_period(C, roots, lc, i, i + 1, digits)
            periods.append(per)
            trackers.append(tr)
        ncyc = 2 * g  # a chain on 2g+2 points has one redundant edge cycle
        K = [[0] * ncyc for _ in range(ncyc)]
        for i in range(ncyc - 1):
            s = _intersection_sign(trackers[i], trackers[i + 1])
            K[i][i + 1] = s
            K[i + 1][i] = -s
        S = _symplectic_basis(K)
        Per = mp.matrix(g, ncyc)
        for j in range(ncyc):
            for k in range(g):
                Per[k, j] = periods[j][k]
        Smat = mp.matrix(S)
        PerS = Per * Smat
        A = PerS[:, :g]
        B = PerS[:, g:]
        a_inv = mp.inverse(A)
        tau = a_inv * B
        # enforce the Siegel conditions, flipping the B-cycles if needed
        tau = (tau + tau.T) / 2 if _sym_ok(tau, digits) else None
        if tau is None:
            raise NotSiegel("period matrix is not symmetric")
        if not _posdef(_im_matrix(tau)):
            tau = -tau
            a_inv = -a_inv  # = inverse(-A): flip both period blocks
            if not _posdef(_im_matrix(tau)):
                raise NotSiegel("imaginary part of tau is not definite")
        imtau_inv = mp.inverse(_im_matrix(tau))
    return roots, lc, tau, a_inv, imtau_inv


def _sym_ok(tau, digits):
    scale = max(abs(tau[i, j]) for i in range(tau.rows) for j in range(tau.cols))
    tol = (1 + scale) * mpf(10) ** (-digits + 3)
    return all(
        abs(tau[i, j] - tau[j, i]) < tol
        for i in range(tau.rows)
        for j in range(tau.cols)
    )


def _im_matrix(tau):
    M = mp.matrix(tau.rows, tau.cols)
    for i in range(tau.rows):
        for j in range(tau.cols):
            M[i, j] = mp.im(tau[i, j])
    return M


def _posdef(M):
    try:
        mp.cholesky(M)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Abel-Jacobi map


def _route(z0, z1, avoid, scale, depth=0):
    """A polyline from z0 to z1 keeping clear of the points in ``avoid``."""
    if depth > 8:
        return [z0, z1]
    dz = z1 - z0
    L = abs(dz)
    if L == 0:
        return [z0]
    for e in avoid:
        t = max(0, min(1, mp.re((e - z0) * mp.conj(dz)) / (L * L)))
        foot = z0 + t * dz
        d = abs(e - foot)
        if d < scale / 25 and t not in (0, 1) and abs(e - z0) > mp.eps and abs(e - z1) > mp.eps:
            # detour around e perpendicular to the segment
            perp = dz / L * mpc(0, 1)
            w = e + perp * (scale / 10) * (1 if mp.re(mp.conj(perp) * (foot - e)) >= 0 else -1)
            return (
                _route(z0, w, avoid, scale, depth + 1)[:-1]
                + _route(w, z1, avoid, scale, depth + 1)
            )
    return [z0, z1]


def _refine_path(path, roots, depth=0):
    """Split path segments until each is shorter than its clearance from the
    branch points (excluding branch points sitting at a segment endpoint), so
    every quadrature below converges geometrically."""
    out = [path[0]]
    for z0, z1 in zip(path, path[1:]):
        out.extend(_refine_segment(z0, z1, roots, 0)[1:])
    return out


def _refine_segment(z0, z1, roots, depth):
    L = abs(z1 - z0)
    if depth > 40 or L == 0:
        return [z0, z1]
    clear = None
    for e in roots:
        if abs(e - z0) < L * mpf(10) ** -12 or abs(e - z1) < L * mpf(10) ** -12:
            continue
        dz = z1 - z0
        t = max(0, min(1, mp.re((e - z0) * mp.conj(dz)) / (L * L)))
        d = abs(e - (z0 + t * dz))
        clear = d if clear is None else min(clear, d)
    if clear is None or L <= mpf("0.8") * clear:
        return [z0, z1]
    m = (z0 + z1) / 2
    return (
        _refine_segment(z0, m, roots, depth + 1)[:-1]
        + _refine_segment(m, z1, roots, depth + 1)
    )


def _integrate_segment(C, roots, lc, z0, z1, start_value, digits):
    """Integrals of x^(k-1) dx / y1 (k=1..g) along [z0, z1] with the square
    root continued from start_value at z0 (None: free choice); returns the
    integral vector and the endpoint value of y1.

    When an endpoint is a branch point the inverse-square-root singularity is
    removed by an s^2 substitution, leaving analytic integrands throughout."""
    g = C.genus
    near = mpf(10) ** (-digits + 5)
    sing0 = any(abs(z0 - e) < near * (1 + abs(e)) for e in roots)
    sing1 = any(abs(z1 - e) < near * (1 + abs(e)) for e in roots)
    tracked = _TrackedSqrt(z0, z1, roots, lc, start_value)
    dz = z1 - z0

    def f(t):
        x = z0 + t * dz
        y = tracked(t)
        xp = mpc(1)
        out = []
        for _k in range(g):
            out.append(xp / y * dz)
            xp *= x
        return out

    vec = _quad_vec(f, tracked.crossings, digits, sing0, sing1)
    return vec, tracked(mpf(1))


def _quad_vec(f, interior_pts, digits, sing0=False, sing1=False):
    """Componentwise integral of the vector-valued f over [0,1], splitting at
    the branch-cut crossing points; sing0/sing1 flag an inverse-square-root
    endpoint singularity, removed by substituting t = s^2 from that end."""
    pts = [mpf(0)] + [t for t in interior_pts] + [mpf(1)]
    if sing0 and sing1 and len(pts) == 2:
        pts = [mpf(0), mpf("0.5"), mpf(1)]
    g = len(f(mpf("0.5")))
    cache = {}

    def fk(t, k):
        if t not in cache:
            cache[t] = f(t)
        return cache[t][k]

    out = [mpc(0)] * g
    tol = mpf(10) ** (-digits - 2)
    for idx, (a, b) in enumerate(zip(pts, pts[1:])):
        h = b - a
        if sing0 and idx == 0:

            def gk(s, k):
                return fk(a + h * s * s, k) * 2 * h * s

            method = "gauss-legendre"
        elif sing1 and idx == len(pts) - 2:

            def gk(s, k):
                return fk(b - h * s * s, k) * 2 * h * s

            method = "gauss-legendre"
        else:

            def gk(s, k):
                return fk(a + h * s, k) * h

            method = "tanh-sinh"
        for k in range(g):
            val, err = mp.quad(
                lambda s, k=k: gk(s, k),
                [0, 1],
                maxdegree=10,
                error=True,
                method=method,
            )
            if err > tol * (1 + abs(val)):
                raise PrecisionExhausted("path integral did not converge")
            out[k] += val
    return out


class _AbelJacobi:
    """Path integration from the base branch point, with memoization."""

    def __init__(self, C, roots, lc, a_inv, digits):
        self.C, self.roots, self.lc = C, roots, lc
        self.a_inv, self.digits = a_inv, digits
        self.base = roots[0]
        self.scale = max(abs(r - self.base) for r in roots) + 1
        self.cache = {}

    def _integrate_path(self, x_target):
        path = _route(self.base, x_target, self.roots, self.scale)
        path = _refine_path(path, self.roots)
        total = [mpc(0)] * self.C.genus
        value = None
        for z0, z1 in zip(path, path[1:]):
            vec, value = _integrate_segment(
                self.C, self.roots, self.lc, z0, z1, value, self.digits
            )
            total = [a + b for a, b in zip(total, vec)]
        return total, value

    def raw_integral(self, x_target, y1_target=None):
        """Integral vector from the base to (x_target, y1_target); when
        y1_target is None (branch point or either-sheet request) the sheet is
        the one the tracked continuation lands on."""
        with mp.workdps(self.digits + 10):
            total, value = self._integrate_path(x_target)
            if y1_target is not None and value is not None:
                if abs(value - y1_target) > abs(value + y1_target):
                    total = [-a for a in total]
            return total

    def z_of(self, x, y1):
        key = (mp.nstr(mpc(x), 20), mp.nstr(mpc(y1), 20))
        if key not in self.cache:
            with mp.workdps(self.digits + 10):
                raw = self.raw_integral(mpc(x), mpc(y1))
                self.cache[key] = self.a_inv * mp.matrix(raw)
        return self.cache[key]

    def z_of_branch(self, idx):
        key = ("branch", idx)
        if key not in self.cache:
            with mp.workdps(self.digits + 10):
                raw = self.raw_integral(self.roots[idx], None)
                self.cache[key] = self.a_inv * mp.matrix(raw)
        return self.cache[key]

    def z_of_infinity(self, C):
        """Lattice coordinates of the points over x = infinity, keyed by the
        divisor-entry tags."""
        g = C.genus
        U = _u_poly(C)
        with mp.workdps(self.digits + 10):
            R = 3 * self.scale + abs(self.base) + 2
            X0 = mpc(R, mpf(R) / 7)  # off axis: clear of real branch points
            main, value = self._integrate_path(X0)
            u0 = 1 / X0
            # roots of the reversed polynomial: 1/e_j, plus u = 0 (odd degree)
            uroots = [1 / e for e in self.roots if e != 0]
            m_zero = (2 * g + 2) - U.degree
            # utilde(u) = u^(2g+2) U(1/u) = cfac * u^m_zero * prod(u - 1/e_j)
            lead = mpc(U.lc.numerator) / U.lc.denominator
            prod_e = mpc(1)
            for e in self.roots:
                if e != 0:
                    prod_e *= -e
            cfac = lead * prod_e  # so that utilde(u) = cfac*u^m*prod(u-1/e)

            start = value * u0 ** (g + 1)

            tracked = _TrackedSqrt(u0, mpc(0), uroots, cfac, None)
            # anchor: tracked(0) corresponds to u = u0
            anchor = tracked(mpf(0)) * mp.sqrt(u0) ** m_zero
            sgn = 1 if abs(anchor - start) <= abs(anchor + start) else -1

            def f(t):
                u = u0 * (1 - t)
                su = tracked(t) * mp.sqrt(u) ** m_zero * sgn
                du = -u0
                out = []
                for k in range(1, g + 1):
                    out.append(-(u ** (g - k)) * du / su)
                return out

            tail = _quad_vec(
                f, tracked.crossings, self.digits, sing1=(m_zero % 2 == 1)
            )
            total = [a + b for a, b in zip(main, tail)]
            zvec = self.a_inv * mp.matrix(total)
            out = {}
            if C.infinity_kind == ONE_WEIERSTRASS:
                out["inf"] = zvec
                return out
            # which infinity did the continuation land on?
            # y1/x^(g+1) -> sqrt(utilde(0)) with the tracked sign as u -> 0
            if m_zero:
                raise NotSiegel("even-degree model expected at a split infinity")
            limit = tracked(mpf(1)) * sgn
            r1 = C.inf_roots[0]
            hstar = C.H[g + 1]
            # y1/x^(g+1) -> 2*r1 + hstar at the "+" point at infinity
            s1q = 2 * r1 + hstar
            s1 = mpc(s1q.numerator) / s1q.denominator
            if abs(limit - s1) <= abs(limit + s1):
                out[INF_PLUS] = zvec
                out[INF_MINUS] = -zvec
            else:
                out[INF_MINUS] = zvec
                out[INF_PLUS] = -zvec
            return out


# ---------------------------------------------------------------------------
# theta functions


def _float_cholesky(B):
    """Upper-triangular float R with R^T R = B (B symmetric positive
    definite, given as an mpmath matrix)."""
    g = B.rows
    A = [[float(B[i, j]) for j in range(g)] for i in range(g)]
    R = [[0.0] * g for _ in range(g)]
    for i in range(g):
        s = A[i][i] - sum(R[k][i] * R[k][i] for k in range(i))
        if s <= 0:
            raise NotSiegel("Im tau not positive definite in theta")
        R[i][i] = s**0.5
        for j in range(i + 1, g):
            R[i][j] = (A[i][j] - sum(R[k][i] * R[k][j] for k in range(i))) / R[i][i]
    return R


def _fp_enumerate(R, t, rad2):
    """Integer vectors m with ||R (m - t)||^2 <= rad2 (float arithmetic,
    Fincke-Pohst recursion from the last coordinate)."""
    import math

    g = len(t)
    out = []

    def rec(k, ms, rem):
        off = sum(R[k][j] * (ms[j - k - 1] - t[j]) for j in range(k + 1, g))
        c = t[k] - off / R[k][k]
        hw = math.sqrt(rem) / R[k][k]
        for mk in range(math.ceil(c - hw), math.floor(c + hw) + 1):
            d = R[k][k] * (mk - t[k]) + off
            rem2 = rem - d * d
            if rem2 < 0:
                continue
            if k == 0:
                out.append((mk,) + tuple(ms))
            else:
                rec(k - 1, [mk] + ms, rem2)

    rec(g - 1, [], rad2)
    return out


class _ThetaSeries:
    """theta_[a;b](z, tau) = sum_m exp(2 pi i (1/2 (m+a)^T tau (m+a)
    + (m+a)^T (z+b))), truncated over the ellipsoid centred at the
    stationary point of the Gaussian envelope, so the term count does not
    grow with Im z.  Quadratic-part exponentials are cached per lattice
    point."""

    def __init__(self, tau, a, b, digits):
        self.tau, self.digits = tau, digits
        g = tau.rows
        self.g = g
        with mp.workdps(digits + 10):
            self.imtau = _im_matrix(tau)
            self.imtau_inv = mp.inverse(self.imtau)
            self.chol = _float_cholesky(self.imtau)
            self.avec = [mpf(x.numerator) / x.denominator for x in a]
            self.bvec = [mpf(x.numerator) / x.denominator for x in b]
            self.quad_cache = {}
            # terms below exp(pi y^T B^-1 y) * 10^-(digits+8) are dropped;
            # the dropped tail is controlled by the Gaussian decay beyond
            # w^T B w = rad2
            self.rad2 = float((digits + 8) * mp.log(10) / mp.pi) + 4.0

    def _quad_exp(self, m):
        if m not in self.quad_cache:
            w = [m[k] + self.avec[k] for k in range(self.g)]
            q = mpc(0)
            for i in range(self.g):
                q += self.tau[i, i] * w[i] * w[i]
                for j in range(i + 1, self.g):
                    q += 2 * self.tau[i, j] * w[i] * w[j]
            self.quad_cache[m] = mp.expjpi(q)
        return self.quad_cache[m]

    def __call__(self, z):
        g = self.g
        with mp.workdps(self.digits + 10):
            y = mp.matrix([mp.im(z[k]) for k in range(g)])
            c = self.imtau_inv * y
            # envelope |term| = exp(pi y B^-1 y) exp(-pi w^T B w),
            # w = m + a + B^-1 y: enumerate the w-ellipsoid
            t = [float(-c[k] - self.avec[k]) for k in range(g)]
            points = _fp_enumerate(self.chol, t, self.rad2)
            total = mpc(0)
            for m in points:
                lin = mpc(0)
                for k in range(g):
                    lin += (m[k] + self.avec[k]) * (z[k] + self.bvec[k])
                total += self._quad_exp(m) * mp.expjpi(2 * lin)
            return total


_THETA_CACHE = {}


def _theta_ab(z, tau, a, b, digits):
    key = (id(tau), a, b, digits)
    series = _THETA_CACHE.get(key)
    if series is None or series.tau is not tau:
        series = _ThetaSeries(tau, a, b, digits)
        _THETA_CACHE[key] = series
    return series(z)


def _lattice_reduce(z, tau, imtau_inv):
    """z' = z - tau*n - m with n, m integer vectors chosen to shrink the
    imaginary and real parts; theta magnitudes are corrected by the caller
    through the Neron-function combination, which is lattice invariant."""
    g = tau.rows
    y = imtau_inv * mp.matrix([mp.im(z[k]) for k in range(g)])
    nvec = mp.matrix([mp.nint(y[k]) for k in range(g)])
    z2 = mp.matrix([z[k] - sum(tau[k, j] * nvec[j] for j in range(g)) for k in range(g)])
    z3 = mp.matrix([z2[k] - mp.nint(mp.re(z2[k])) for k in range(g)])
    return z3


def theta_ab(z, pd: PeriodData):
    return _theta_ab(z, pd.tau, pd.char_a, pd.char_b, pd.digits)


def neron_lambda(z, pd: PeriodData):
    """lambda_Theta(z) = -log|theta_ab(z)| + pi Im(z)^T (Im tau)^(-1) Im(z);
    lattice invariant, evaluated after lattice reduction for stability."""
    g = pd.genus
    with mp.workdps(pd.digits + 10):
        zr = _lattice_reduce(z, pd.tau, pd.imtau_inv)
        th = theta_ab(zr, pd)
        if abs(th) < mpf(10) ** (-pd.digits // 2):
            raise OnThetaDivisor("theta vanished: support collision upstream")
        y = mp.matrix([mp.im(zr[k]) for k in range(g)])
        quad = (y.T * pd.imtau_inv * y)[0, 0]
        return -mp.log(abs(th)) + mp.pi * quad


# ---------------------------------------------------------------------------
# calibration


def _default_characteristic(g):
    a = tuple(Fraction(1, 2) for _ in range(g))
    b = tuple(Fraction(g - k, 2) for k in range(g))
    return a, b


def _calibration_targets(aj: _AbelJacobi, g, nroots):
    """Images z(S(W)) of effective degree g-1 divisors supported on branch
    points: exhaustive for g <= 3, sampled otherwise."""
    idxs = list(range(nroots))
    combos = list(itertools.combinations(idxs, g - 1)) if g >= 2 else [()]
    if g > 3 and len(combos) > 40:
        combos = combos[:: len(combos) // 40][:40]
    out = []
    with mp.workdps(aj.digits + 10):
        for combo in combos:
            z = mp.matrix(g, 1)
            for i in combo:
                z = z + aj.z_of_branch(i)
            out.append(z)
    return out


def _half_lattice_coords(z, tau, imtau_inv, digits):
    """(p, q) half-integer vectors with z = tau p + q, or None when z is not
    a half-period at working precision."""
    g = tau.rows
    y = imtau_inv * mp.matrix([mp.im(z[k]) for k in range(g)])
    p = [mp.nint(2 * y[k]) / 2 for k in range(g)]
    rest = [z[k] - sum(tau[k, j] * p[j] for j in range(g)) for k in range(g)]
    q = [mp.nint(2 * mp.re(rest[k])) / 2 for k in range(g)]
    tol = mpf(10) ** (-digits + 6)
    if any(abs(rest[k] - q[k]) > tol for k in range(g)):
        return None
    return (
        tuple(Fraction(int(2 * pk), 2) for pk in p),
        tuple(Fraction(int(2 * qk), 2) for qk in q),
    )


class _NullGate:
    """Vanishing test for theta at half-periods via theta-null lookups:
    theta_[a;b](tau p + q) = 0 iff theta_[a+p;b+q](0, tau) = 0, which is
    exact for odd characteristics and one cached evaluation for even ones
    (even theta nulls can still vanish on hyperelliptic period matrices)."""

    def __init__(self, tau, digits):
        self.tau, self.digits = tau, digits
        self.nulls = {}
        self.zero = mp.matrix(tau.rows, 1)

    def null_magnitude(self, a, b):
        a = tuple(x % 1 for x in a)
        b = tuple(x % 1 for x in b)
        key = (a, b)
        if key not in self.nulls:
            parity = sum(4 * x * y for x, y in zip(a, b)) % 2
            if parity == 1:
                self.nulls[key] = mpf(0)
            else:
                self.nulls[key] = abs(_theta_ab(self.zero, self.tau, a, b, self.digits))
        return self.nulls[key]

    def vanishes(self, a, b, pq, thresh):
        p, q = pq
        ca = tuple(x + y for x, y in zip(a, p))
        cb = tuple(x + y for x, y in zip(b, q))
        return self.null_magnitude(ca, cb) < thresh


def _calibrate(aj, tau, g, nroots, digits):
    targets = _calibration_targets(aj, g, nroots)
    a, b = _default_characteristic(g)
    with mp.workdps(digits + 10):
        imtau_inv = mp.inverse(_im_matrix(tau))
        coords = [_half_lattice_coords(z, tau, imtau_inv, digits) for z in targets]
        gate = _NullGate(tau, digits)
        thresh = mpf(10) ** (-digits // 2)

        def passes(av, bv):
            for z, pq in zip(targets, coords):
                if pq is None:
                    if abs(_theta_ab(z, tau, av, bv, digits)) >= thresh:
                        return False
                elif not gate.vanishes(av, bv, pq, thresh):
                    return False
            return True

        if passes(a, b):
            return a, b, False
        half = (Fraction(0), Fraction(1, 2))
        passing = []
        for avec in itertools.product(half, repeat=g):
            for bvec in itertools.product(half, repeat=g):
                if passes(avec, bvec):
                    passing.append((avec, bvec))
        odd = [
            (av, bv)
            for av, bv in passing
            if sum(4 * x * y for x, y in zip(av, bv)) % 2 == 1
        ]
        if len(odd) == 1:
            return odd[0][0], odd[0][1], True
        if len(passing) == 1:
            return passing[0][0], passing[0][1], True
    raise NotSiegel(
        "theta calibration failed: no unique vanishing characteristic found"
    )


_PERIOD_CACHE = {}


def period_matrix(C: HyperCurve, ctx: PrecisionContext = PrecisionContext()):
    """PeriodData for the curve at the context's precision (cached)."""
    digits = ctx.real_digits
    key = (C, digits)
    if key in _PERIOD_CACHE:
        return _PERIOD_CACHE[key]
    roots, lc, tau, a_inv, imtau_inv = _build_periods(C, digits)
    aj = _AbelJacobi(C, roots, lc, a_inv, digits)
    g = C.genus
    a, b, substituted = _calibrate(aj, tau, g, len(roots), digits)
    with mp.workdps(digits + 10):
        z_inf = aj.z_of_infinity(C)
    pd = PeriodData(
        curve=C,
        digits=digits,
        branch_points=roots,
        lc=lc,
        tau=tau,
        a_inv=a_inv,
        imtau_inv=imtau_inv,
        char_a=a,
        char_b=b,
        z_inf=z_inf,
    )
    pd.aj = aj
    pd.characteristic_substituted = substituted
    _PERIOD_CACHE[key] = pd
    return pd


def abel_jacobi(point, pd: PeriodData):
    """Lattice coordinates of a point: ('aff', x, y1) with y1 = 2y + H(x), an
    infinity tag string, or an index pair ('branch', i)."""
    if isinstance(point, tuple) and point[0] == "aff":
        return pd.aj.z_of(point[1], point[2])
    if isinstance(point, tuple) and point[0] == "branch":
        return pd.aj.z_of_branch(point[1])
    return pd.z_inf[point]


# ---------------------------------------------------------------------------
# embedding divisors into complex points


def embed_divisor(D: FreeDivisor, C: HyperCurve, digits):
    """Complex-embedded support lists (positive part, negative part), each a
    list of ('aff', x, y1) / infinity-tag points repeated with multiplicity."""
    plus, minus = [], []
    with mp.workdps(digits + 10):
        for e, m in D.entries:
            pts = []
            if e.kind == "pt":
                x0, y0 = e.data
                x = mpc(x0.numerator) / x0.denominator
                y = mpc(y0.numerator) / y0.denominator
                h = _eval_poly(C.H, x)
                pts.append(("aff", x, 2 * y + h))
            elif e.kind == "inf":
                pts.append(e.data[0])
            elif e.kind == "vert":
                z0 = e.data[0]
                x = mpc(z0.numerator) / z0.denominator
                u = _eval_poly(_u_poly(C), x)
                s = mp.sqrt(u)
                pts.append(("aff", x, s))
                pts.append(("aff", x, -s))
            else:
                a, b = e.data
                coeffs = [mpc(c.numerator) / c.denominator for c in reversed(a.coeffs)]
                for x in mpmath.polyroots(coeffs, maxsteps=200, extraprec=120):
                    y = _eval_poly(b, x)
                    h = _eval_poly(C.H, x)
                    pts.append(("aff", x, 2 * y + h))
            for _ in range(abs(m)):
                (plus if m > 0 else minus).extend(pts)
    return plus, minus


def _eval_poly(f: UniPoly, x):
    acc = mpc(0)
    for c in reversed(f.coeffs):
        acc = acc * x + mpc(c.numerator) / c.denominator
    return acc


def _is_weierstrass_pt(pt, pd, tol):
    if isinstance(pt, str):
        return pt == "inf"  # the single point at infinity on odd models
    return abs(pt[2]) < tol


def _involutes(p, q, C: HyperCurve, tol):
    if isinstance(p, str) or isinstance(q, str):
        if isinstance(p, str) and isinstance(q, str):
            if C.infinity_kind == ONE_WEIERSTRASS:
                return p == q
            return p != q  # inf+ and inf- are exchanged by the involution
        return False
    return abs(p[1] - q[1]) < tol and abs(p[2] + q[2]) < tol


def _conflicts(pts, C, tol):
    """A degree-g effective divisor is special exactly when it contains an
    involution-conjugate pair; a Weierstrass point is its own conjugate, so a
    doubled Weierstrass point also conflicts."""
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if _involutes(pts[i], pts[j], C, tol):
                return True
    return False


def _padding_points(C, pd, count, forbidden_x, existing, offset, digits):
    """Deterministic auxiliary points with rational x, scanned from a fixed
    sequence; avoids forbidden x-coordinates, Weierstrass loci and involute
    conflicts."""
    if count == 0:
        return []
    out = []
    U = _u_poly(C)
    with mp.workdps(digits + 10):
        tol = mpf(10) ** (-digits // 2)
        k = 0
        tried = 0
        while len(out) < count:
            tried += 1
            if tried > 100:
                raise PaddingExhausted("no valid auxiliary points among candidates")
            xq = Fraction(offset + 7 * k, 3) + Fraction(1, 5)
            k += 1
            x = mpc(xq.numerator) / xq.denominator
            u = _eval_poly(U, x)
            if abs(u) < tol:
                continue
            if any(abs(x - fx) < tol for fx in forbidden_x):
                continue
            cand = ("aff", x, mp.sqrt(u))
            if _conflicts([cand] + out + existing, C, tol):
                continue
            out.append(cand)
    return out


def split_nonspecial(E: FreeDivisor, C: HyperCurve, forbidden_support, ctx=None, offset=0):
    """E (degree 0) as a sum of differences E1_j - E2_j of effective
    non-special degree-g divisors sharing their padding points; returns a
    list of (E1 points, E2 points)."""
    digits = ctx.real_digits if ctx is not None else 30
    pd = None
    g = C.genus
    plus, minus = embed_divisor(E, C, digits)
    if len(plus) != len(minus):
        raise ValueError("split_nonspecial requires a degree-0 divisor")
    with mp.workdps(digits + 10):
        tol = mpf(10) ** (-digits // 2)
        forbidden_x = list(forbidden_support)
        pairs = []
        while plus:
            take1 = _greedy_chunk(plus, g, C, tol)
            take2 = _greedy_chunk(minus, g, C, tol)
            c = min(len(take1), len(take2))
            take1, take2 = take1[:c], take2[:c]
            for t in take1:
                plus.remove(t)
            for t in take2:
                minus.remove(t)
            pads = _padding_points(
                C, pd, g - c, forbidden_x, take1 + take2, offset, digits
            )
            pairs.append((take1 + pads, take2 + pads))
        return pairs


def _greedy_chunk(pts, g, C, tol):
    chunk = []
    for p in pts:
        if len(chunk) == g:
            break
        if not _conflicts(chunk + [p], C, tol):
            chunk.append(p)
    return chunk


# ---------------------------------------------------------------------------
# the archimedean symbol


def _symbol_once(D: FreeDivisor, E: FreeDivisor, pd: PeriodData, offset=0):
    C = pd.curve
    digits = pd.digits
    with mp.workdps(digits + 10):
        Dp, Dm = embed_divisor(D, C, digits)
        if len(Dp) != len(Dm):
            raise ValueError("archimedean symbol requires degree-0 divisors")
        forbidden = [p[1] for p in Dp + Dm if not isinstance(p, str)]
        ctx = PrecisionContext(max(digits, 10), 50)
        pairs = split_nonspecial(E, C, forbidden, ctx, offset)
        zP = [abel_jacobi(p, pd) for p in Dp]
        zQ = [abel_jacobi(q, pd) for q in Dm]
        total = mpf(0)
        for E1, E2 in pairs:
            w1 = mp.matrix(pd.genus, 1)
            for p in E1:
                w1 = w1 + abel_jacobi(p, pd)
            w2 = mp.matrix(pd.genus, 1)
            for p in E2:
                w2 = w2 + abel_jacobi(p, pd)
            for z in zP:
                total += neron_lambda(z - w1, pd) - neron_lambda(z - w2, pd)
            for z in zQ:
                total += neron_lambda(z - w2, pd) - neron_lambda(z - w1, pd)
        return total


def local_symbol_arch(D: FreeDivisor, E: FreeDivisor, pd: PeriodData):
    """<D, E>_infinity via the theta-function Green's function formula,
    retrying with fresh padding when a theta value degenerates."""
    last = None
    for offset in range(4):
        try:
            return _symbol_once(D, E, pd, offset)
        except OnThetaDivisor as exc:
            last = exc
    raise last


def archimedean_symbol(
    D: FreeDivisor, E: FreeDivisor, C: HyperCurve, ctx: PrecisionContext
):
    """Double-run discipline: evaluate at d and d+10 digits; escalate when
    the two runs disagree beyond tolerance."""
    digits = ctx.real_digits
    for _ in range(3):
        pd1 = period_matrix(C, PrecisionContext(digits, ctx.padic_digits))
        pd2 = period_matrix(C, PrecisionContext(digits + 10, ctx.padic_digits))
        v1 = local_symbol_arch(D, E, pd1)
        v2 = local_symbol_arch(D, E, pd2)
        with mp.workdps(digits + 10):
            if abs(v1 - v2) < (1 + abs(v2)) * mpf(10) ** (-digits + 4):
                return v2
        digits = 2 * digits
    raise PrecisionExhausted("archimedean symbol failed the double-run check")
