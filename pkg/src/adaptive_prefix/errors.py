"""Exception hierarchy shared by the codec, the sorter and the command line."""


class CodecError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CodecError, ValueError):
    """Stream parameters that the algorithm cannot run with (n < 2, bad F, ...)."""


class AlphabetError(CodecError, KeyError):
    """A symbol outside the declared alphabet."""

    def __str__(self):
        return Exception.__str__(self)


class CorruptStreamError(CodecError):
    """The bitstream does not decode under the active code, or is truncated."""


class CodeInfeasibleError(CodecError):
    """A length histogram violates the Kraft inequality."""


class BudgetOverrunError(CodecError, AssertionError):
    """A rebuild job missed its phase deadline.

    This is a hard failure: the worst-case time guarantee depends on every job
    finishing inside its phase.
    """


class GuaranteeWarning(UserWarning):
    """The alphabet is too large for the o(m) redundancy term to be meaningful."""
