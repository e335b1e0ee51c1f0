"""Exception types shared across the package."""

from __future__ import annotations


class NLocalityError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(NLocalityError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(NLocalityError):
    """A requested instance exceeds a configured size cap.

    Attributes:
        dimension: the offending size (Hilbert-space dimension or candidate count).
        cap: the cap that was exceeded.
    """

    def __init__(self, message: str, dimension: int, cap: int):
        super().__init__(message)
        self.dimension = dimension
        self.cap = cap


class DegenerateRealizationError(NLocalityError):
    """A verification quantity is undefined because a norm vanished."""
