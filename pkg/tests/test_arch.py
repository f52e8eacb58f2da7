"""Archimedean machinery: period matrices, theta functions, and the
Neron lambda function.  Oracles: the j-invariant of a genus-1 period lattice
(computed independently by mpmath), oddness of the calibrated characteristic,
and lattice invariance of lambda."""

import mpmath
from mpmath import mp

import pytest

from hyperheights import HyperCurve, PrecisionContext, UniPoly
from hyperheights.arch import neron_lambda, period_matrix, theta_ab

CTX = PrecisionContext(real_digits=25)


@pytest.fixture(scope="module")
def pd_g1():
    # y^2 = x^3 - x
    return period_matrix(HyperCurve(UniPoly([0, -1, 0, 1]), UniPoly([])), CTX)


@pytest.fixture(scope="module")
def pd_g2():
    # y^2 = x^5 + 3x^2 + 1
    return period_matrix(HyperCurve(UniPoly([1, 0, 3, 0, 0, 1]), UniPoly([])), CTX)


def test_genus1_j_invariant_lemniscatic(pd_g1):
    # the curve y^2 = x^3 - x has CM by i: j = 1728, i.e. kleinj(tau) = 1
    with mp.workdps(30):
        tau = pd_g1.tau[0, 0]
        assert mp.im(tau) > 0
        j = mpmath.kleinj(tau)
        assert abs(j - 1) < mp.mpf(10) ** -15


def test_tau_symmetric_positive_imaginary(pd_g2):
    tau = pd_g2.tau
    g = pd_g2.genus
    with mp.workdps(30):
        for i in range(g):
            for j in range(g):
                assert abs(tau[i, j] - tau[j, i]) < mp.mpf(10) ** -18
        # positive-definite imaginary part: Sylvester minors
        y11 = mp.im(tau[0, 0])
        det = mp.im(tau[0, 0]) * mp.im(tau[1, 1]) - mp.im(tau[0, 1]) ** 2
        assert y11 > 0 and det > 0


def test_theta_characteristic_is_odd(pd_g2):
    # theta_ab(-z) = -theta_ab(z) for the calibrated odd characteristic
    with mp.workdps(30):
        z = mp.matrix([mp.mpc("0.31", "0.17"), mp.mpc("-0.12", "0.23")])
        minus = mp.matrix([-z[0], -z[1]])
        a = theta_ab(z, pd_g2)
        b = theta_ab(minus, pd_g2)
        assert abs(a + b) < mp.mpf(10) ** -18 * max(1, abs(a))
        assert abs(theta_ab(mp.matrix([mp.mpf(0), mp.mpf(0)]), pd_g2)) < mp.mpf(10) ** -18


def test_neron_lambda_lattice_invariant(pd_g2):
    with mp.workdps(35):
        z = mp.matrix([mp.mpc("0.31", "0.17"), mp.mpc("-0.12", "0.23")])
        base = neron_lambda(z, pd_g2)
        shift_int = mp.matrix([z[0] + 2, z[1] - 1])
        shift_tau = mp.matrix(
            [z[k] + pd_g2.tau[k, 0] - 3 * pd_g2.tau[k, 1] for k in range(2)]
        )
        tol = mp.mpf(10) ** (-CTX.real_digits + 4)
        assert abs(neron_lambda(shift_int, pd_g2) - base) < tol
        assert abs(neron_lambda(shift_tau, pd_g2) - base) < tol
