"""Exception hierarchy.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalCheckError` to exit code 2.
"""


class CohFluctError(Exception):
    pass


class ValidationError(CohFluctError, ValueError):
    """Bad input: wrong space, out-of-range parameter, malformed config."""


class NotHermitianError(ValidationError):
    pass


class SpaceMismatchError(ValidationError):
    pass


class TruncationError(ValidationError):
    """Boson cutoff too small for the requested coherent state."""

    def __init__(self, message, required_ncut=None):
        super().__init__(message)
        self.required_ncut = required_ncut


class DegenerateNodeError(ValidationError):
    pass


class ClosureError(ValidationError):
    pass


class EmptySingletSpaceError(ValidationError):
    """Half-integer total spin: the node has no invariant subspace."""


class NumericalCheckError(CohFluctError, RuntimeError):
    """An internal cross-check between two independent routes disagreed."""
