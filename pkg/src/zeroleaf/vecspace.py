"""Embedding-space numerics: vector storage, L2 normalization, cosine similarity.

Values are stored as 32-bit floats (the width encoders emit) while every
norm, dot product and score is accumulated in 64-bit arithmetic. All types
are immutable; every operation is a pure function, safe under concurrency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue, NotNormalized, ZeroVector

# Norm at or below this is treated as a degenerate (zero) embedding.
NORM_EPS = 1e-12
# A vector may carry normalized=True only if its norm is this close to 1.
NORMALIZED_ATOL = 1e-5
# Cosine results are clamped into [-1, 1] only when the excess is at most this.
COSINE_CLAMP_SLACK = 1e-6


def _as_float32(values, expect_2d: bool) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float32)
    want = 2 if expect_2d else 1
    if arr.ndim != want:
        raise ValueError(f"expected a {want}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue("embedding values must be finite (no NaN/Inf)")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EmbeddingVector:
    """A fixed-dimension real vector, optionally flagged unit-norm."""

    values: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        arr = _as_float32(self.values, expect_2d=False)
        if arr.shape[0] < 1:
            raise ValueError("embedding dimension must be >= 1")
        object.__setattr__(self, "values", arr)
        if self.normalized:
            norm = float(np.linalg.norm(np.asarray(arr, dtype=np.float64)))
            if abs(norm - 1.0) > NORMALIZED_ATOL:
                raise NotNormalized(
                    f"normalized flag set but norm is {norm!r}"
                )

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def values64(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-major stack of same-dimension vectors, optionally all unit-norm."""

    data: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        arr = _as_float32(self.data, expect_2d=True)
        if arr.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        object.__setattr__(self, "data", arr)
        if self.normalized and arr.shape[0] > 0:
            norms = np.linalg.norm(np.asarray(arr, dtype=np.float64), axis=1)
            worst = float(np.max(np.abs(norms - 1.0)))
            if worst > NORMALIZED_ATOL:
                raise NotNormalized(
                    f"normalized flag set but a row norm deviates by {worst!r}"
                )

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def row(self, i: int) -> EmbeddingVector:
        return EmbeddingVector(self.data[i], normalized=self.normalized)


def l2_normalize(v: EmbeddingVector) -> EmbeddingVector:
    """Scale v to unit Euclidean norm.

    Raises ZeroVector when the norm is at or below NORM_EPS, which signals a
    degenerate or corrupt embedding rather than something to silently pass on.
    """
    v64 = v.values64
    norm = float(np.linalg.norm(v64))
    if norm <= NORM_EPS:
        raise ZeroVector(f"vector norm {norm!r} is at or below {NORM_EPS}")
    return EmbeddingVector(v64 / norm, normalized=True)


def l2_normalize_rows(m: EmbeddingMatrix) -> EmbeddingMatrix:
    """Apply l2_normalize to every row; idempotent on already-unit rows."""
    if m.rows == 0:
        return EmbeddingMatrix(m.data, normalized=True)
    out = np.empty_like(m.data, dtype=np.float32)
    for i in range(m.rows):
        row64 = np.asarray(m.data[i], dtype=np.float64)
        norm = float(np.linalg.norm(row64))
        if norm <= NORM_EPS:
            raise ZeroVector(f"row {i} norm {norm!r} is at or below {NORM_EPS}")
        out[i] = row64 / norm
    return EmbeddingMatrix(out, normalized=True)


def cosine_similarity(u: EmbeddingVector, t: EmbeddingVector) -> float:
    """Dot product of two unit vectors, 64-bit accumulated.

    Unnormalized inputs are rejected, not silently normalized: the offline
    (text) and online (image) normalization steps stay explicit and auditable.
    The result is clamped into [-1, 1] only when floating-point excess is at
    most COSINE_CLAMP_SLACK; larger excess is returned raw.
    """
    if u.dim != t.dim:
        raise DimensionMismatch(f"dims differ: {u.dim} != {t.dim}")
    if not u.normalized or not t.normalized:
        raise NotNormalized("cosine_similarity requires both inputs normalized")
    d = float(np.dot(u.values64, t.values64))
    if 1.0 < d <= 1.0 + COSINE_CLAMP_SLACK:
        return 1.0
    if -1.0 - COSINE_CLAMP_SLACK <= d < -1.0:
        return -1.0
    return d
