"""Exception hierarchy shared by all zeroleaf modules.

Every error a pipeline stage can raise is named here so the CLI can map
any failure to its error name plus context (exit code 1), and so tests
can assert on exact error classes.
"""

from __future__ import annotations


class ZeroleafError(Exception):
    """Base class for all errors raised by this package."""


# --- embedding-space numerics ---

class ZeroVector(ZeroleafError):
    """Vector norm at or below the degeneracy threshold; cannot normalize."""


class DimensionMismatch(ZeroleafError):
    """Operands do not share the same embedding dimension."""


class NotNormalized(ZeroleafError):
    """An operation requiring unit-norm input received an unnormalized one."""


# --- prompt documents and banks ---

class ParseError(ZeroleafError):
    """A structured text document does not conform to its format."""


class EmptyClass(ZeroleafError):
    """A class block with zero descriptions."""


class DuplicateClassName(ZeroleafError):
    """The same class name appears more than once."""


class RowCountMismatch(ZeroleafError):
    """Row count of a matrix does not match its declared companion."""


# --- classification ---

class DuplicateItemId(ZeroleafError):
    """Item ids must be unique within a batch or manifest."""


class EmptyScores(ZeroleafError):
    """A score vector with zero classes cannot be predicted on."""


# --- metrics ---

class LengthMismatch(ZeroleafError):
    """Paired label/score sequences differ in length."""


class LabelOutOfRange(ZeroleafError):
    """A label falls outside [0, C)."""


class DegenerateLabels(ZeroleafError):
    """ROC needs at least one positive and one negative item."""


class MalformedCurve(ZeroleafError):
    """An ROC curve violating the (0,0)..(1,1) sorted-points contract."""


# --- dataset harness ---

class UnresolvableEmbeddingRef(ZeroleafError):
    """Manifest entries point at embedding rows that cannot be resolved."""


class InvalidK(ZeroleafError):
    """Fold count outside [2, N]."""


class MissingRows(ZeroleafError):
    """External score file lacks rows for some manifest items."""


class ExtraRows(ZeroleafError):
    """External score file contains rows for unknown items."""


class ColumnCountMismatch(ZeroleafError):
    """External score row width disagrees with the class count."""


class NonFiniteScore(ZeroleafError):
    """External scores must be finite."""


class ModeMismatch(ZeroleafError):
    """Evaluation inputs inconsistent with the requested run mode."""


class FoldPlanMismatch(ZeroleafError):
    """A fold plan does not partition the manifest it is applied to."""


class UnknownFormat(ZeroleafError):
    """Report format not in the supported set."""


class IoFailure(ZeroleafError):
    """Filesystem read/write failure, wrapping the OS error."""


# --- embedding exchange files ---

class BadMagic(ZeroleafError):
    """File does not start with the ZSEB magic bytes."""


class UnsupportedVersion(ZeroleafError):
    """Embedding file version not understood by this reader."""


class DigestMismatch(ZeroleafError):
    """Payload bytes do not hash to the sidecar digest."""


class TruncatedPayload(ZeroleafError):
    """File shorter than the header-declared payload length."""


class TrailingBytes(ZeroleafError):
    """File longer than the header-declared payload length."""


class NonFiniteValue(ZeroleafError):
    """Embedding payloads must contain only finite values."""
