"""Online zero-shot path: score an image embedding against the text bank,
aggregate per class, predict with documented tie-breaking, and surface the
best-matching description for interpretability.

Everything here is pure given an immutable bank; batch rows may be processed
concurrently as long as output order and per-row summation order (ascending
description index) are preserved. This implementation stays sequential.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateItemId,
    EmptyScores,
    LengthMismatch,
    NotNormalized,
    ParseError,
)
from .ioutil import atomic_write_text, read_text
from .promptbank import TextEmbeddingBank
from .vecspace import EmbeddingMatrix, EmbeddingVector, cosine_similarity

# Two classes tie only at exact 64-bit equality; ties resolve to the lower index.
TIE_TOL = 0.0


class Aggregation(enum.Enum):
    """How per-description similarities combine into one class score."""

    SUM = "sum"
    MEAN = "mean"
    # Score rows ingested from an external model, used as-is.
    EXTERNAL = "external"


@dataclass(frozen=True)
class ScoreVector:
    """Per-class aggregated scores for one item."""

    class_scores: np.ndarray = field(repr=False)
    aggregation: Aggregation = Aggregation.SUM

    def __post_init__(self):
        arr = np.asarray(self.class_scores, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"class_scores must be 1-d, got shape {arr.shape}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("class scores must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "class_scores", arr)

    @property
    def n_classes(self) -> int:
        return int(self.class_scores.shape[0])


@dataclass(frozen=True)
class BestDescription:
    """The single (class, description) pair most similar to an image."""

    class_id: int
    description_index: int
    similarity: float
    text: str


@dataclass(frozen=True)
class PredictionRecord:
    """One classified item, with provenance for interpretability."""

    item_id: str
    true_label: Optional[int]
    predicted_label: int
    tie: bool
    scores: ScoreVector
    best_description: Optional[BestDescription]


def aggregate_scores(image_emb: EmbeddingVector, bank: TextEmbeddingBank,
                     aggregation: Aggregation = Aggregation.SUM) -> ScoreVector:
    """Aggregate cosine similarity of the image against every class's prompts.

    Sum mode adds the per-description cosines in ascending description order;
    mean divides that sum by the class's description count. Accumulation is
    64-bit throughout.
    """
    if aggregation not in (Aggregation.SUM, Aggregation.MEAN):
        raise ValueError(f"aggregation must be sum or mean, got {aggregation}")
    if image_emb.dim != bank.dim:
        raise DimensionMismatch(f"image dim {image_emb.dim} != bank dim {bank.dim}")
    if not image_emb.normalized:
        raise NotNormalized("image embedding must be normalized before scoring")
    scores = np.empty(bank.n_classes, dtype=np.float64)
    for bc in bank.classes:
        acc = 0.0
        for j in range(bc.matrix.rows):
            acc += cosine_similarity(image_emb, bc.matrix.row(j))
        if aggregation is Aggregation.MEAN:
            acc /= bc.matrix.rows
        scores[bc.class_id] = acc
    return ScoreVector(scores, aggregation=aggregation)


def predict(scores: ScoreVector, class_names: Sequence[str],
            tie_tol: float = TIE_TOL) -> tuple[int, str, bool]:
    """Smallest class index attaining the maximum score, plus a tie flag.

    The tie flag is true iff at least one other class scores within tie_tol
    of the maximum.
    """
    c = scores.n_classes
    if c == 0:
        raise EmptyScores("cannot predict on an empty score vector")
    if len(class_names) != c:
        raise LengthMismatch(f"{len(class_names)} class names for {c} scores")
    values = scores.class_scores
    best = 0
    for i in range(1, c):
        if values[i] > values[best]:
            best = i
    top = values[best]
    tie = sum(1 for i in range(c) if top - values[i] <= tie_tol) >= 2
    return best, class_names[best], tie


def best_description(image_emb: EmbeddingVector,
                     bank: TextEmbeddingBank) -> BestDescription:
    """Exhaustive scan for the most similar single description.

    Ties break toward the smaller class id, then the smaller description
    index. Note the winning class need not equal the aggregated prediction:
    a class can win on aggregate while another holds the single best prompt.
    """
    if image_emb.dim != bank.dim:
        raise DimensionMismatch(f"image dim {image_emb.dim} != bank dim {bank.dim}")
    if not image_emb.normalized:
        raise NotNormalized("image embedding must be normalized before scoring")
    best: Optional[BestDescription] = None
    for bc in bank.classes:
        for j in range(bc.matrix.rows):
            sim = cosine_similarity(image_emb, bc.matrix.row(j))
            if best is None or sim > best.similarity:
                best = BestDescription(
                    class_id=bc.class_id,
                    description_index=j,
                    similarity=sim,
                    text=bc.descriptions[j],
                )
    assert best is not None  # bank always has >= 1 class with >= 1 description
    return best


def classify_batch(images: EmbeddingMatrix, ids: Sequence[str],
                   bank: TextEmbeddingBank,
                   aggregation: Aggregation = Aggregation.SUM,
                   true_labels: Optional[Sequence[Optional[int]]] = None,
                   ) -> list[PredictionRecord]:
    """Classify every row of a normalized image matrix, in input order.

    Each record is produced by the exact single-item path (aggregate_scores,
    predict, best_description), so batch output is bit-identical to scoring
    rows one at a time.
    """
    if len(ids) != images.rows:
        raise LengthMismatch(f"{len(ids)} ids for {images.rows} rows")
    seen = set()
    for item_id in ids:
        if item_id in seen:
            raise DuplicateItemId(f"repeated item id {item_id!r}")
        seen.add(item_id)
    if true_labels is not None and len(true_labels) != images.rows:
        raise LengthMismatch(f"{len(true_labels)} labels for {images.rows} rows")
    if images.dim != bank.dim:
        raise DimensionMismatch(f"image dim {images.dim} != bank dim {bank.dim}")
    if not images.normalized:
        raise NotNormalized("image matrix must be normalized before classification")

    records = []
    for i in range(images.rows):
        v = images.row(i)
        scores = aggregate_scores(v, bank, aggregation)
        label, _, tie = predict(scores, bank.class_names)
        records.append(PredictionRecord(
            item_id=ids[i],
            true_label=None if true_labels is None else true_labels[i],
            predicted_label=label,
            tie=tie,
            scores=scores,
            best_description=best_description(v, bank),
        ))
    return records


def write_prediction_records(records: Sequence[PredictionRecord],
                             class_names: Sequence[str],
                             path: str | Path) -> None:
    """Write one JSON record per line, stable field order, deterministic bytes."""
    lines = []
    for r in records:
        bd = None
        if r.best_description is not None:
            bd = {
                "class_id": r.best_description.class_id,
                "description_index": r.best_description.description_index,
                "similarity": r.best_description.similarity,
                "description_text": r.best_description.text,
            }
        lines.append(json.dumps({
            "item_id": r.item_id,
            "true_label": r.true_label,
            "predicted_label": r.predicted_label,
            "predicted_class": class_names[r.predicted_label],
            "tie": r.tie,
            "aggregation": r.scores.aggregation.value,
            "scores": [float(x) for x in r.scores.class_scores],
            "best_description": bd,
        }))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_prediction_records(path: str | Path) -> list[PredictionRecord]:
    """Load records written by write_prediction_records."""
    records = []
    text = read_text(path)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            bd = doc["best_description"]
            best = None
            if bd is not None:
                best = BestDescription(
                    class_id=int(bd["class_id"]),
                    description_index=int(bd["description_index"]),
                    similarity=float(bd["similarity"]),
                    text=str(bd["description_text"]),
                )
            records.append(PredictionRecord(
                item_id=str(doc["item_id"]),
                true_label=None if doc["true_label"] is None else int(doc["true_label"]),
                predicted_label=int(doc["predicted_label"]),
                tie=bool(doc["tie"]),
                scores=ScoreVector(
                    np.asarray(doc["scores"], dtype=np.float64),
                    aggregation=Aggregation(doc["aggregation"]),
                ),
                best_description=best,
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}:{lineno}: {exc!r}") from exc
    return records
