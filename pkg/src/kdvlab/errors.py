"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented status values without a lookup table.
"""


class KdVLabError(Exception):
    exit_code = 1


class ConfigurationError(KdVLabError, ValueError):
    """Invalid user-supplied parameters (grid sizes, config files, ...)."""

    exit_code = 1


class SamplingError(KdVLabError, ValueError):
    exit_code = 1


class GridMismatchError(KdVLabError, ValueError):
    exit_code = 1


class WrongLengthError(KdVLabError, ValueError):
    """A closed-form object was requested on an interval other than 2*pi."""

    exit_code = 1


class NoKernelError(KdVLabError):
    exit_code = 2


class SearchFailureError(KdVLabError):
    exit_code = 2


class StepFailureError(KdVLabError):
    """Newton iteration of an implicit step did not converge."""

    exit_code = 2

    def __init__(self, message, residual=float("nan"), step=None):
        super().__init__(message)
        self.residual = residual
        self.step = step


class NumericalError(KdVLabError):
    exit_code = 2
