"""Exception hierarchy for the toda_hyper package."""


class TodaHyperError(Exception):
    """Base class for all package errors."""


class InvalidRank(TodaHyperError, ValueError):
    pass


class InvalidStrengths(TodaHyperError, ValueError):
    pass


class WrongRank(TodaHyperError, ValueError):
    pass


class IntegerDifference(TodaHyperError, ValueError):
    """Some alpha_j - beta_k is an integer, so interlacing is undefined."""


# numerical layer

class StepUnderflow(TodaHyperError, RuntimeError):
    pass


class ClearanceViolation(TodaHyperError, ValueError):
    pass


class NoInvariantForm(TodaHyperError, RuntimeError):
    pass


class IndefiniteForm(TodaHyperError, RuntimeError):
    pass


class AmbiguousForm(TodaHyperError, RuntimeError):
    pass


class NonconstantWronskian(TodaHyperError, RuntimeError):
    pass


class NonpositiveMinor(TodaHyperError, RuntimeError):
    pass


class QuadratureNonconvergent(TodaHyperError, RuntimeError):
    pass


class IllConditionedFit(TodaHyperError, RuntimeError):
    pass


class NonconvergentExtrapolation(TodaHyperError, RuntimeError):
    pass


class NotInterlacing(TodaHyperError, ValueError):
    """alpha and beta do not interlace, so no definite invariant form exists."""
