"""Semantic exception hierarchy for the anmasym toolkit.

Public functions raise these instead of bare ValueError/RuntimeError so
callers can distinguish contract violations (bad arguments, bad data)
from numerical breakdowns (quadrature budget, ill-conditioned solves).
"""


class AnmasymError(Exception):
    """Base class for all toolkit errors."""


class DomainError(AnmasymError, ValueError):
    """Input lies outside the domain of an oracle function."""


class InvalidParam(AnmasymError, ValueError):
    """A parameter violates its documented range or type."""


class DegenerateColumn(AnmasymError, ValueError):
    """A data column is constant where a spread is required."""


class ResampleBudgetError(AnmasymError, RuntimeError):
    """Noise resampling failed to produce an in-range effect value
    within the per-sample attempt cap."""


class QuadratureFailure(AnmasymError, RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance
    within its node budget (often a divergent integrand)."""

    def __init__(self, message, value=None, error_estimate=None, nodes=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.nodes = nodes


class SingularSlope(AnmasymError, ArithmeticError):
    """The oracle derivative fell below the positivity floor at an
    evaluation point, making 1/phi' meaningless."""


class NotInvertible(AnmasymError, ValueError):
    """A fitted model is not monotone and cannot be inverted."""


class IllConditioned(AnmasymError, RuntimeError):
    """A linear system solve failed for every attempted regularization."""


class ParseError(AnmasymError, ValueError):
    """A corpus file could not be parsed; carries file and line."""

    def __init__(self, message, path=None, line=None):
        super().__init__(message)
        self.path = path
        self.line = line


class MissingMetadata(AnmasymError, FileNotFoundError):
    """The pair-corpus metadata file is absent or unreadable."""
