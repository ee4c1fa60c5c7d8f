"""Exception hierarchy shared by every module.

``InputError`` subclasses map to CLI exit code 2, ``ComputationError``
subclasses to exit code 3.
"""

from __future__ import annotations


class RadiomicsError(Exception):
    """Base class for all package errors."""


class InputError(RadiomicsError):
    """Bad file, bad header, bad geometry or bad argument."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path


class VolumeFormatError(InputError):
    pass


class GeometryError(InputError):
    pass


class EmptyMaskError(InputError):
    pass


class ComputationError(RadiomicsError):
    """A feature or statistic is undefined for the given data."""


class EmptyMatrixError(ComputationError):
    pass


class InsufficientDataError(ComputationError):
    pass
