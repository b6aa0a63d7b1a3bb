"""Exporter error types."""

from __future__ import annotations


class ExporterError(Exception):
    """Base class for exporter failures."""


class ParseError(ExporterError):
    """Input document does not conform to its format."""


class EmptyClass(ExporterError):
    """Prompt document class with zero descriptions."""


class DuplicateClassName(ExporterError):
    """Prompt document repeats a class name."""


class DuplicateItemId(ExporterError):
    """Image manifest repeats an item id."""


class ProviderUnavailable(ExporterError):
    """Requested encoder cannot be constructed in this environment."""


class EncodingFailure(ExporterError):
    """The encoder failed on a specific input."""


class UnreadableImage(ExporterError):
    """An image path is missing or unreadable."""
