"""Exception types raised by isounit.

Every error carries a stable class name; the CLI prints that name so batch
scripts can match on it.
"""


class IsoUnitError(ValueError):
    """Base class for data and validation errors."""


class LengthMismatch(IsoUnitError):
    pass


class NegativeDuration(IsoUnitError):
    pass


class NonPositiveDuration(IsoUnitError):
    pass


class NonPositiveTarget(IsoUnitError):
    pass


class EmptyInput(IsoUnitError):
    pass


class EmptyCorpus(IsoUnitError):
    pass


class InfeasibleAdjustment(IsoUnitError):
    pass


class TooFewPoints(IsoUnitError):
    pass


class NonFiniteInput(IsoUnitError):
    pass


class DimMismatch(IsoUnitError):
    pass


class ShapeMismatch(IsoUnitError):
    pass


class InvalidWeights(IsoUnitError):
    pass


class PositiveLogProb(IsoUnitError):
    pass


class WrongFrameRate(IsoUnitError):
    pass


class NotIsometric(IsoUnitError):
    pass


class InvalidSpec(IsoUnitError):
    pass


class UnitOutOfRange(IsoUnitError):
    pass


class FormatError(IsoUnitError):
    """A file parsed but its contents violate the format."""
