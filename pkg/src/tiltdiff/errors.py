"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """A tilt family was evaluated outside its domain (negative base, bad g)."""


class WeightOverflowError(OverflowError):
    """exp() of a tilt exponent left float64 range; use the log-weight path."""


class DegenerateMeasureError(ValueError):
    """Every weight vanished, so the normalized plug-in measure is undefined."""


class BoundViolationError(ValueError):
    """An observed weight exceeded the rejection bound; the bound is invalid."""


class SlowOracleWarning(UserWarning):
    """Rejection acceptance rate fell below the configured floor."""


class SizeError(ValueError):
    """Input too large for an exact small-instance oracle."""


class CoverageWarning(UserWarning):
    """Histogram range missed some points; strays counted in boundary cells."""


class RegimeError(ValueError):
    """Bound parameters violate an inequality the bound requires."""


class MissingBoundError(ValueError):
    """A bound on ||g(x)|| is required here but was not provided."""


class NumericsError(ArithmeticError):
    """Non-finite value produced; carries the layer or step where it appeared."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TrainingDivergedError(RuntimeError):
    """Training loss became non-finite. Carries the loss trace up to failure."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SingularTimeError(ValueError):
    """Score conversion requested at t <= 0 where the noise variance vanishes."""


class OracleUnavailableError(ValueError):
    """No true-score oracle given and the surrogate mode was not requested."""


class ParseError(ValueError):
    """Malformed CSV input. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ConfigError(ValueError):
    """Experiment configuration is invalid."""


class InequalityViolationError(RuntimeError):
    """A guaranteed inequality failed beyond its Monte Carlo margin."""
