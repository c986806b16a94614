"""Exception types shared across the package."""


class MwmatchError(Exception):
    """Base class for every package-specific error."""


class DimensionError(MwmatchError, ValueError):
    """Operand shapes or sizes do not line up."""


class ValidationError(MwmatchError, ValueError):
    """Input content violates a structural invariant."""


class ParameterError(MwmatchError, ValueError):
    """A parameter value is outside its legal range."""


class SizeError(MwmatchError, ValueError):
    """Problem size exceeds a hard cap."""


class ConvergenceError(MwmatchError, RuntimeError):
    """An iterative routine failed to converge."""


class ParseError(MwmatchError, ValueError):
    """A file could not be parsed."""
