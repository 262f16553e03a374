"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Vector or matrix operands have incompatible shapes."""


class ConfigError(ValueError):
    """Invalid parameter value, algorithm spec, or experiment config."""


class OutOfRegimeError(ValueError):
    """Theory expression evaluated outside its validity region."""


class SingularMatrixError(ValueError):
    """A matrix that must be inverted is singular."""


class StreamExhaustedError(RuntimeError):
    """Training sample stream ended before the stop criterion was met."""


class ExperimentError(RuntimeError):
    """A Monte-Carlo cell failed; the message names the cell."""
