"""Exception hierarchy shared across the package."""


class HyperHeightsError(Exception):
    """Base class for all errors raised by this package."""


class SingularEquation(HyperHeightsError):
    """The given hyperelliptic equation has vanishing discriminant."""


class PrecisionExhausted(HyperHeightsError):
    """A p-adic or floating computation could not be certified at the
    configured precision.  Always recoverable: retry at higher precision."""


class FactorTimeout(HyperHeightsError):
    """Integer factorization exceeded its effort bound.

    Carries the partial factorization found so far in ``partial`` and the
    unfactored cofactor in ``cofactor``.
    """

    def __init__(self, message, partial=None, cofactor=None):
        super().__init__(message)
        self.partial = partial or []
        self.cofactor = cofactor


class InfiniteLength(HyperHeightsError):
    """The local quotient module has infinite length (supports not disjoint)."""


class ModelRequired(HyperHeightsError):
    """Regular-model data is needed at a prime and none was supplied."""

    def __init__(self, message, prime=None, point=None):
        super().__init__(message)
        self.prime = prime
        self.point = point


class InconsistentModel(HyperHeightsError):
    """Supplied regular-model data violates its own invariants."""


class NoRationalArrangement(HyperHeightsError):
    """No rational divisor arrangement exists (conjugate points at infinity)."""


class TorsionDetected(HyperHeightsError):
    """The input class is torsion; its canonical height is exactly zero."""

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class PointAtInfinity(HyperHeightsError):
    """An iteration ran into the group identity / a point at infinity."""


class BranchCollision(HyperHeightsError):
    """Two branch points coincide within working tolerance."""


class NotSiegel(HyperHeightsError):
    """The computed period matrix is not in the Siegel upper half space."""


class OnThetaDivisor(HyperHeightsError):
    """A theta evaluation landed (numerically) on the theta divisor."""


class PaddingExhausted(HyperHeightsError):
    """No valid auxiliary points found when splitting a divisor."""
