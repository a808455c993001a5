"""Exception types shared across the package."""


class FeistabError(Exception):
    """Base class for all errors raised by this package."""


class DomainViolation(FeistabError, ValueError):
    """A coordinate left the unit cube or a membership invariant failed."""


class NonzeroOverZero(FeistabError, ZeroDivisionError):
    """Componentwise division hit a zero denominator with a nonzero numerator.

    Signals a point outside the legal domain; the 0/0 case is fine and
    resolves to 0 by convention.
    """


class NoWitness(FeistabError):
    """No interior point certifies that M fails additivity.

    Raised for projections and other degenerate specs; the stability
    machinery has nothing to divide by in that case.
    """


class DegenerateWitness(FeistabError):
    """The supplied witness point has a defect below the working threshold."""


class EvaluationOutsideTable(FeistabError, KeyError):
    """A tabulated function was queried off its declared grid."""


class ConfigError(FeistabError, ValueError):
    """Malformed CLI, suite or report configuration."""
