"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MetroplanError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(MetroplanError, ValueError):
    """A value or record violates a documented invariant."""


class ParseError(MetroplanError):
    """An input file could not be parsed."""


class NoPathError(MetroplanError):
    """No route exists between the requested endpoints."""

    def __init__(self, message: str, origin=None, destination=None, component=None):
        super().__init__(message)
        self.origin = origin
        self.destination = destination
        self.component = component


class OptimizationFailedError(MetroplanError):
    """No ant ever completed a tour; carries abandonment statistics."""

    def __init__(self, message: str, launched: int = 0, abandoned: int = 0):
        super().__init__(message)
        self.launched = launched
        self.abandoned = abandoned


class DataLoadError(MetroplanError):
    """Fatal dataset loading failure (missing layer, too many dropped features)."""
