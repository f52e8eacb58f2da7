"""Canonical heights, height pairings and regulators on Jacobians of
hyperelliptic curves over Q, computed by summing local Neron symbols."""

from .algebra import PrecisionContext, UniPoly, padic_valuation
from .errors import (
    FactorTimeout,
    HyperHeightsError,
    ModelRequired,
    NotSiegel,
    OnThetaDivisor,
    PrecisionExhausted,
    TorsionDetected,
)
from .heights import (
    HeightResult,
    PlaceTerm,
    SelfTestReport,
    height,
    pairing,
    regulator,
    selftest_product_formula,
)
from .jacobian import FreeDivisor, HyperCurve, JacPoint, MumfordDivisor
from .nonarch import ModelData

__all__ = [
    "PrecisionContext",
    "UniPoly",
    "padic_valuation",
    "HyperCurve",
    "JacPoint",
    "MumfordDivisor",
    "FreeDivisor",
    "ModelData",
    "HeightResult",
    "PlaceTerm",
    "SelfTestReport",
    "height",
    "pairing",
    "regulator",
    "selftest_product_formula",
    "HyperHeightsError",
    "ModelRequired",
    "FactorTimeout",
    "TorsionDetected",
    "PrecisionExhausted",
    "NotSiegel",
    "OnThetaDivisor",
]
