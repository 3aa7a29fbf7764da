"""Exception hierarchy shared across the package.

Two broad failure classes exist so the CLI can map them to distinct exit
codes: bad inputs (files, shapes, parameter ranges) and numerical failures
(degenerate geometry, ill-conditioned solves).
"""


class ProbelightError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ProbelightError):
    """Invalid input data, file or parameter (CLI exit code 2)."""


class NumericalError(ProbelightError):
    """Numerically degenerate or unsolvable problem (CLI exit code 3)."""


class DegenerateGeometryError(NumericalError):
    """Back-projected ray is (near-)parallel to the supporting plane."""

    def __init__(self, message, pixel=None):
        super().__init__(message)
        self.pixel = pixel


class IllConditionedError(NumericalError):
    """Least-squares normal matrix is rank deficient or near singular."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class EmptyWarpError(NumericalError):
    """No valid scene point projects into the requested panorama."""
