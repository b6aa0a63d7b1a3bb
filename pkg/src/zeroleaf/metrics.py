"""Multiclass evaluation suite: confusion matrix, macro precision/recall/F1,
Matthews correlation, and one-vs-rest ROC/AUC with macro averaging.

Conventions fixed here rather than left to callers:
- any zero denominator yields 0 for the affected metric plus an explicit
  degeneracy flag (never NaN), so macro means stay defined on bad folds;
- tied scores advance the ROC sweep as a single threshold step, which makes
  trapezoidal AUC equal the Mann-Whitney statistic with half credit for ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateLabels,
    LabelOutOfRange,
    LengthMismatch,
    MalformedCurve,
)


class DegenerateFlag(NamedTuple):
    """Which class (None = dataset-level) hit which zero denominator."""

    class_id: Optional[int]
    reason: str


@dataclass(frozen=True)
class ConfusionMatrix:
    """C x C counts, rows = true class, columns = predicted class."""

    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"counts must be square and non-empty, got {arr.shape}")
        if np.any(arr < 0):
            raise ValueError("counts must be non-negative")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def tp(self, c: int) -> int:
        return int(self.counts[c, c])

    def fn(self, c: int) -> int:
        return int(self.row_sums()[c] - self.counts[c, c])

    def fp(self, c: int) -> int:
        return int(self.col_sums()[c] - self.counts[c, c])

    def tn(self, c: int) -> int:
        return self.total - self.tp(c) - self.fp(c) - self.fn(c)


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int], n_classes: int,
                     ) -> ConfusionMatrix:
    """Count (true, predicted) pairs into a C x C grid."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if len(y_true) < 1:
        raise LengthMismatch("need at least one item")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for i, (t, p) in enumerate(zip(y_true, y_pred)):
        if not (0 <= t < n_classes):
            raise LabelOutOfRange(f"item {i}: true label {t} outside [0, {n_classes})")
        if not (0 <= p < n_classes):
            raise LabelOutOfRange(f"item {i}: predicted label {p} outside [0, {n_classes})")
        counts[t, p] += 1
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class PrfResult:
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    p_macro: float
    r_macro: float
    f1_macro: float
    flags: tuple[DegenerateFlag, ...]


def macro_prf(m: ConfusionMatrix) -> PrfResult:
    """Per-class precision/recall/F1 and their unweighted means over all classes."""
    precision, recall, f1 = [], [], []
    flags = []
    for c in range(m.n_classes):
        tp, fp, fn = m.tp(c), m.fp(c), m.fn(c)
        if tp + fp == 0:
            p = 0.0
            flags.append(DegenerateFlag(c, "precision denominator zero"))
        else:
            p = tp / (tp + fp)
        if tp + fn == 0:
            r = 0.0
            flags.append(DegenerateFlag(c, "recall denominator zero"))
        else:
            r = tp / (tp + fn)
        if p + r == 0.0:
            f = 0.0
            flags.append(DegenerateFlag(c, "f1 denominator zero"))
        else:
            f = 2.0 * p * r / (p + r)
        precision.append(p)
        recall.append(r)
        f1.append(f)
    c = m.n_classes
    return PrfResult(
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        p_macro=sum(precision) / c,
        r_macro=sum(recall) / c,
        f1_macro=sum(f1) / c,
        flags=tuple(flags),
    )


def mcc_multiclass(m: ConfusionMatrix) -> tuple[float, tuple[DegenerateFlag, ...]]:
    """Multiclass correlation statistic computed directly from the matrix.

    MCC = (N*trace - sum_k row_k*col_k)
          / sqrt((N^2 - sum_k col_k^2) * (N^2 - sum_k row_k^2))

    Either denominator factor at zero (e.g. all predictions in one class)
    yields 0 with a flag. At C = 2 this equals the classic binary formula.
    """
    n = m.total
    rows = [int(x) for x in m.row_sums()]
    cols = [int(x) for x in m.col_sums()]
    trace = sum(m.tp(c) for c in range(m.n_classes))
    numerator = n * trace - sum(r * c for r, c in zip(rows, cols))
    f_cols = n * n - sum(c * c for c in cols)
    f_rows = n * n - sum(r * r for r in rows)
    if f_cols == 0 or f_rows == 0:
        return 0.0, (DegenerateFlag(None, "mcc denominator zero"),)
    return numerator / math.sqrt(f_cols * f_rows), ()


def mcc_binary(tp: int, fp: int, fn: int, tn: int) -> float:
    """Classic binary MCC; 0 when any marginal is empty."""
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def mcc_one_vs_rest_macro(m: ConfusionMatrix) -> tuple[float, tuple[DegenerateFlag, ...]]:
    """Auxiliary comparison metric: mean of per-class one-vs-rest binary MCC.

    Classes whose binary denominator is zero are flagged and excluded from
    the mean.
    """
    values = []
    flags = []
    for c in range(m.n_classes):
        tp, fp, fn, tn = m.tp(c), m.fp(c), m.fn(c), m.tn(c)
        if (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn) == 0:
            flags.append(DegenerateFlag(c, "one-vs-rest mcc denominator zero"))
            continue
        values.append(mcc_binary(tp, fp, fn, tn))
    if not values:
        flags.append(DegenerateFlag(None, "one-vs-rest mcc undefined for all classes"))
        return 0.0, tuple(flags)
    return sum(values) / len(values), tuple(flags)


def roc_curve(scores: Sequence[float], is_positive: Sequence[bool],
              ) -> list[tuple[float, float]]:
    """(FPR, TPR) points from a descending threshold sweep over unique scores.

    The curve starts at (0, 0) and ends at (1, 1); items sharing a score
    advance as one step, which draws the tie as a diagonal segment.
    """
    if len(scores) != len(is_positive):
        raise LengthMismatch(f"{len(scores)} scores vs {len(is_positive)} labels")
    n_pos = sum(1 for p in is_positive if p)
    n_neg = len(is_positive) - n_pos
    if n_pos == 0:
        raise DegenerateLabels("no positive items")
    if n_neg == 0:
        raise DegenerateLabels("no negative items")

    order = sorted(range(len(scores)), key=lambda i: -float(scores[i]))
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(order):
        threshold = float(scores[order[i]])
        while i < len(order) and float(scores[order[i]]) == threshold:
            if is_positive[order[i]]:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp / n_neg, tp / n_pos))
    return points


def auc(curve: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under an ROC curve produced by roc_curve."""
    if len(curve) < 2:
        raise MalformedCurve("curve needs at least two points")
    if tuple(curve[0]) != (0.0, 0.0):
        raise MalformedCurve(f"curve must start at (0,0), got {curve[0]}")
    if tuple(curve[-1]) != (1.0, 1.0):
        raise MalformedCurve(f"curve must end at (1,1), got {curve[-1]}")
    area = 0.0
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        if x1 < x0:
            raise MalformedCurve("FPR must be non-decreasing")
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


@dataclass(frozen=True)
class AucResult:
    per_class: tuple[Optional[float], ...]
    macro: float
    flags: tuple[DegenerateFlag, ...]


def one_vs_rest_auc(score_matrix: np.ndarray, y_true: Sequence[int]) -> AucResult:
    """Per-class AUC using column c as score and (y_true == c) as positive.

    Classes without both positives and negatives are flagged and excluded
    from the unweighted macro mean.
    """
    scores = np.asarray(score_matrix, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"score matrix must be 2-d, got shape {scores.shape}")
    if scores.shape[0] != len(y_true):
        raise LengthMismatch(f"{scores.shape[0]} score rows vs {len(y_true)} labels")
    n_classes = scores.shape[1]
    if n_classes < 2:
        raise ValueError("one-vs-rest needs at least two classes")
    per_class: list[Optional[float]] = []
    flags = []
    for c in range(n_classes):
        positives = [int(t) == c for t in y_true]
        try:
            per_class.append(auc(roc_curve(scores[:, c], positives)))
        except DegenerateLabels as exc:
            per_class.append(None)
            flags.append(DegenerateFlag(c, f"auc undefined: {exc}"))
    defined = [v for v in per_class if v is not None]
    if defined:
        macro = sum(defined) / len(defined)
    else:
        macro = 0.0
        flags.append(DegenerateFlag(None, "macro auc undefined for all classes"))
    return AucResult(per_class=tuple(per_class), macro=macro, flags=tuple(flags))


@dataclass(frozen=True)
class MetricsReport:
    """Everything the evaluation emits for one item set."""

    confusion: ConfusionMatrix
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    p_macro: float
    r_macro: float
    f1_macro: float
    mcc: float
    per_class_auc: tuple[Optional[float], ...]
    macro_auc: float
    degenerate_flags: tuple[DegenerateFlag, ...]
    n_items: int
    present_classes: tuple[int, ...]
    macro_over_present_only: bool = False
    mcc_ovr_macro: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "n_items": self.n_items,
            "confusion": [[int(x) for x in row] for row in self.confusion.counts],
            "per_class_precision": list(self.per_class_precision),
            "per_class_recall": list(self.per_class_recall),
            "per_class_f1": list(self.per_class_f1),
            "macro_precision": self.p_macro,
            "macro_recall": self.r_macro,
            "macro_f1": self.f1_macro,
            "mcc": self.mcc,
            "per_class_auc": list(self.per_class_auc),
            "macro_auc": self.macro_auc,
            "mcc_ovr_macro": self.mcc_ovr_macro,
            "present_classes": list(self.present_classes),
            "macro_over_present_only": self.macro_over_present_only,
            "degenerate_flags": [[f.class_id, f.reason] for f in self.degenerate_flags],
        }

    @staticmethod
    def from_dict(doc: dict) -> "MetricsReport":
        return MetricsReport(
            confusion=ConfusionMatrix(np.asarray(doc["confusion"], dtype=np.int64)),
            per_class_precision=tuple(doc["per_class_precision"]),
            per_class_recall=tuple(doc["per_class_recall"]),
            per_class_f1=tuple(doc["per_class_f1"]),
            p_macro=float(doc["macro_precision"]),
            r_macro=float(doc["macro_recall"]),
            f1_macro=float(doc["macro_f1"]),
            mcc=float(doc["mcc"]),
            per_class_auc=tuple(
                None if v is None else float(v) for v in doc["per_class_auc"]
            ),
            macro_auc=float(doc["macro_auc"]),
            degenerate_flags=tuple(
                DegenerateFlag(c, reason) for c, reason in doc["degenerate_flags"]
            ),
            n_items=int(doc["n_items"]),
            present_classes=tuple(doc["present_classes"]),
            macro_over_present_only=bool(doc["macro_over_present_only"]),
            mcc_ovr_macro=(
                None if doc["mcc_ovr_macro"] is None else float(doc["mcc_ovr_macro"])
            ),
        )


def compute_metrics_report(y_true: Sequence[int], y_pred: Sequence[int],
                           score_matrix: np.ndarray, n_classes: int,
                           macro_over_present_only: bool = False,
                           include_ovr_mcc: bool = False) -> MetricsReport:
    """Assemble the full report for one item set.

    With macro_over_present_only (used for per-source breakdowns), classes
    absent from y_true are flagged and excluded from the macro P/R/F1 means;
    per-class values are still reported for every class.
    """
    m = confusion_matrix(y_true, y_pred, n_classes)
    prf = macro_prf(m)
    mcc, mcc_flags = mcc_multiclass(m)
    aucs = one_vs_rest_auc(score_matrix, y_true)
    flags = list(prf.flags) + list(mcc_flags) + list(aucs.flags)

    present = tuple(sorted({int(t) for t in y_true}))
    p_macro, r_macro, f1_macro = prf.p_macro, prf.r_macro, prf.f1_macro
    if macro_over_present_only and len(present) < n_classes:
        for c in range(n_classes):
            if c not in present:
                flags.append(DegenerateFlag(c, "absent from truth; excluded from macro means"))
        p_macro = sum(prf.precision[c] for c in present) / len(present)
        r_macro = sum(prf.recall[c] for c in present) / len(present)
        f1_macro = sum(prf.f1[c] for c in present) / len(present)

    ovr = None
    if include_ovr_mcc:
        ovr, ovr_flags = mcc_one_vs_rest_macro(m)
        flags.extend(ovr_flags)

    return MetricsReport(
        confusion=m,
        per_class_precision=prf.precision,
        per_class_recall=prf.recall,
        per_class_f1=prf.f1,
        p_macro=p_macro,
        r_macro=r_macro,
        f1_macro=f1_macro,
        mcc=mcc,
        per_class_auc=aucs.per_class,
        macro_auc=aucs.macro,
        degenerate_flags=tuple(flags),
        n_items=len(y_true),
        present_classes=present,
        macro_over_present_only=macro_over_present_only,
        mcc_ovr_macro=ovr,
    )
