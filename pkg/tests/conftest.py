"""Shared fixtures: the standard test curves, points and the hand-built
regular-model file for y^2 = x^10 - x^3 + 1 at p = 2."""

from pathlib import Path

import pytest

from hyperheights import HyperCurve, JacPoint, UniPoly
from hyperheights.cli import parse_model_text

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def curve_g2_rank0():
    """y^2 + y = x^5: genus 2, closure regular at every prime, rank 0."""
    return HyperCurve(UniPoly([0, 0, 0, 0, 0, 1]), UniPoly([1]))


@pytest.fixture(scope="session")
def point_g2_rank0(curve_g2_rank0):
    """[(0,0) - infinity] on y^2 + y = x^5."""
    return JacPoint(curve_g2_rank0, UniPoly([0, 1]), UniPoly([0]), 0)


@pytest.fixture(scope="session")
def curve_g1():
    """y^2 + y = x^3 - x: genus 1, conductor 37, rank 1."""
    return HyperCurve(UniPoly([0, -1, 0, 1]), UniPoly([1]))


@pytest.fixture(scope="session")
def point_g1(curve_g1):
    """[(0,0) - infinity], a generator of the Mordell-Weil group."""
    return JacPoint(curve_g1, UniPoly([0, 1]), UniPoly([0]), 0)


@pytest.fixture(scope="session")
def curve_g2_family():
    """y^2 = x^5 + 3x^2 + 1: genus 2, one Weierstrass point at infinity."""
    return HyperCurve(UniPoly([1, 0, 3, 0, 0, 1]), UniPoly([]))


@pytest.fixture(scope="session")
def curve_g4():
    """y^2 = x^10 - x^3 + 1: genus 4, two rational points at infinity."""
    return HyperCurve(UniPoly([1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 1]), UniPoly([]))


@pytest.fixture(scope="session")
def point_g4(curve_g4):
    """[(0,1) - one point at infinity] on the genus-4 curve."""
    return JacPoint(curve_g4, UniPoly([0, 1]), UniPoly([1]), +1)


@pytest.fixture(scope="session")
def model_g4_p2():
    """Hand-built 9-component regular model of the genus-4 curve at p = 2."""
    return parse_model_text((FIXTURES / "genus4_p2.model").read_text())
