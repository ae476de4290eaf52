"""Error types shared by the services and mapped to exit codes by the CLI."""


class TasepError(Exception):
    """Base class for errors raised by tasepcheck."""

    exit_code = 3


class ArgumentError(TasepError, ValueError):
    """Invalid arguments: out-of-range k, wrong species word, bad grid."""

    exit_code = 2


class IneligibleMoveError(TasepError, RuntimeError):
    """A move was applied to a configuration where it cannot fire."""


class ResourceLimitError(TasepError):
    """A configured cap (particles, permutations, states, dense size) was exceeded."""


class NumericError(TasepError, ArithmeticError):
    """A numeric procedure failed to converge."""


class SingularityError(NumericError):
    """A spectral variable sits on a pole (xi == 1)."""


class NumericWarning(UserWarning):
    """A numeric result is usable but a diagnostic is above its tolerance."""
