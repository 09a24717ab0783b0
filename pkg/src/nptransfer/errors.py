"""Exception hierarchy shared by every module."""


class NPTransferError(Exception):
    """Base class for all library errors."""


class DomainMismatchError(NPTransferError, TypeError):
    """A continuous object was combined with a discrete one (or vice versa)."""


class UnsupportedOperationError(NPTransferError):
    pass


class EmptySampleError(NPTransferError, ValueError):
    pass


class NotAchievableError(NPTransferError):
    """No density-ratio level set has Type-I mass exactly alpha.

    Use brute_force_solutions over a finite class or a discrete relaxation
    instead of the Neyman-Pearson closed form.
    """


class InfeasibleError(NPTransferError):
    """The (empirical or population) Type-I constraint admits no classifier."""


class OutOfSlackError(NPTransferError, ValueError):
    pass


class PackingError(NPTransferError, RuntimeError):
    pass


class ConfigError(NPTransferError, ValueError):
    pass


class InsufficientDataError(NPTransferError, ValueError):
    """Too few usable grid points for a rate fit."""
