"""Dataset manifests with per-source provenance, stratified k-fold planning,
run orchestration for zero-shot and externally scored models, and report
assembly.

Two run modes exist. Zero-shot models classify the whole evaluation set in
a single pass (their bank is built offline once), so their results carry
exactly one fold. Externally scored models are evaluated under k-fold
partitioning of the *evaluation set*: this artifact does not retrain, so
per-fold metrics measure dispersion of the scores across item partitions,
and the cross-fold aggregate is the unweighted mean of per-fold values.
That reinterpretation is stated in every emitted report header.
"""

from __future__ import annotations

import csv
import io
import json
import random
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ColumnCountMismatch,
    DuplicateItemId,
    ExtraRows,
    FoldPlanMismatch,
    InvalidK,
    LabelOutOfRange,
    LengthMismatch,
    MissingRows,
    ModeMismatch,
    NonFiniteScore,
    ParseError,
    UnknownFormat,
    UnresolvableEmbeddingRef,
)
from .exchange import read_embedding_file, read_header
from .ioutil import atomic_write_text, read_text
from .metrics import MetricsReport, compute_metrics_report
from .promptbank import TextEmbeddingBank
from .vecspace import EmbeddingMatrix, l2_normalize_rows
from .zeroshot import (
    Aggregation,
    PredictionRecord,
    ScoreVector,
    classify_batch,
    predict,
)

MANIFEST_HEADER = "zeroleaf-manifest v1"
SCORES_HEADER = "zeroleaf-scores v1"
FOLDPLAN_FORMAT = "zeroleaf-foldplan"
RESULT_FORMAT = "zeroleaf-result"
FORMAT_VERSION = 1

MODE_ZERO_SHOT = "zero_shot_single"
MODE_EXTERNAL = "external_scores_kfold"

REPORT_FORMATS = ("json", "csv", "text")

# Scalar metrics averaged across folds for the cross-fold summary.
_FOLD_MEAN_METRICS = ("macro_precision", "macro_recall", "macro_f1", "mcc", "macro_auc")

_KFOLD_NOTE = (
    "k-fold mode partitions the evaluation set of externally scored items; "
    "per-fold metrics measure score dispersion across partitions, and the "
    "cross-fold aggregate is the unweighted mean of per-fold values."
)
_ZERO_SHOT_NOTE = (
    "zero-shot mode classifies every item in a single run; no cross-validation "
    "is performed, so exactly one fold of metrics is reported."
)


@dataclass(frozen=True)
class ManifestEntry:
    item_id: str
    source: str
    true_label: int
    row: int


@dataclass(frozen=True)
class DatasetManifest:
    """Labeled item inventory with source tags and embedding row locators."""

    entries: tuple[ManifestEntry, ...]
    class_names: tuple[str, ...]
    embeddings_path: Path

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def ids(self) -> list[str]:
        return [e.item_id for e in self.entries]

    @property
    def labels(self) -> list[int]:
        return [e.true_label for e in self.entries]

    @property
    def sources(self) -> list[str]:
        """Distinct source tags in first-appearance order."""
        seen: list[str] = []
        for e in self.entries:
            if e.source not in seen:
                seen.append(e.source)
        return seen

    def class_tally(self) -> list[int]:
        tally = [0] * self.n_classes
        for e in self.entries:
            tally[e.true_label] += 1
        return tally

    def source_tally(self) -> dict[str, list[int]]:
        tally = {s: [0] * self.n_classes for s in self.sources}
        for e in self.entries:
            tally[e.source][e.true_label] += 1
        return tally


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse and validate a manifest document.

    Layout: header line, "classes<TAB>A|B|C", "embeddings<TAB>relpath", then
    one "item_id<TAB>source<TAB>label<TAB>row" line per entry. '#' comments
    and blank lines are skipped. The embeddings path resolves relative to the
    manifest file; every row locator must fall inside that file.
    """
    base = Path(path).parent
    lines = read_text(path).splitlines()
    body = [
        (n + 1, ln.rstrip("\n")) for n, ln in enumerate(lines)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not body or body[0][1].strip() != MANIFEST_HEADER:
        raise ParseError(f"{path}: first line must be {MANIFEST_HEADER!r}")
    if len(body) < 3:
        raise ParseError(f"{path}: missing classes/embeddings lines")

    def keyed(idx: int, key: str) -> str:
        lineno, line = body[idx]
        parts = line.split("\t")
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"{path}:{lineno}: expected '{key}<TAB>...'")
        return parts[1]

    class_names = [c.strip() for c in keyed(1, "classes").split("|")]
    if not class_names or any(not c for c in class_names):
        raise ParseError(f"{path}: empty class name")
    if len(set(class_names)) != len(class_names):
        raise ParseError(f"{path}: repeated class name")
    embeddings_path = (base / keyed(2, "embeddings")).resolve()

    entries = []
    seen_ids = set()
    for lineno, line in body[3:]:
        parts = line.split("\t")
        if len(parts) != 4:
            raise ParseError(f"{path}:{lineno}: expected 4 tab-separated fields")
        item_id, source, label_s, row_s = (p.strip() for p in parts)
        if not item_id or not source:
            raise ParseError(f"{path}:{lineno}: empty item id or source")
        if item_id in seen_ids:
            raise DuplicateItemId(f"{path}:{lineno}: repeated item id {item_id!r}")
        seen_ids.add(item_id)
        try:
            label = int(label_s)
            row = int(row_s)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: label and row must be integers") from exc
        if not (0 <= label < len(class_names)):
            raise LabelOutOfRange(
                f"{path}:{lineno}: label {label} outside [0, {len(class_names)})"
            )
        if row < 0:
            raise ParseError(f"{path}:{lineno}: negative row locator")
        entries.append(ManifestEntry(item_id=item_id, source=source,
                                     true_label=label, row=row))
    if not entries:
        raise ParseError(f"{path}: no entries")

    if not embeddings_path.exists():
        raise UnresolvableEmbeddingRef(
            f"{path}: embeddings file not found: {embeddings_path}"
        )
    _, _, count, _ = read_header(embeddings_path)
    offenders = [e.item_id for e in entries if e.row >= count]
    if offenders:
        raise UnresolvableEmbeddingRef(
            f"{path}: rows out of range for {embeddings_path.name} "
            f"(count {count}): {', '.join(offenders)}"
        )
    return DatasetManifest(
        entries=tuple(entries),
        class_names=tuple(class_names),
        embeddings_path=embeddings_path,
    )


def load_manifest_embeddings(manifest: DatasetManifest) -> EmbeddingMatrix:
    """Gather each entry's embedding row, normalized, in manifest order.

    Normalization here is the online v/||v|| step; it is idempotent when the
    file already holds unit rows.
    """
    matrix, _ = read_embedding_file(manifest.embeddings_path)
    rows = np.stack([matrix.data[e.row] for e in manifest.entries])
    return l2_normalize_rows(EmbeddingMatrix(rows))


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint covering assignment of item ids to folds 0..k-1."""

    k: int
    seed: int
    assignments: dict[str, int] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))
        for item_id, fold in self.assignments.items():
            if not (0 <= fold < self.k):
                raise ParseError(f"fold {fold} for {item_id!r} outside [0, {self.k})")

    def fold_ids(self, fold: int) -> list[str]:
        return [i for i, f in self.assignments.items() if f == fold]

    def to_json(self) -> str:
        doc = {
            "format": FOLDPLAN_FORMAT,
            "version": FORMAT_VERSION,
            "k": self.k,
            "seed": self.seed,
            "assignments": self.assignments,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "FoldPlan":
        try:
            doc = json.loads(text)
            if doc.get("format") != FOLDPLAN_FORMAT:
                raise ParseError(f"not a fold plan: format {doc.get('format')!r}")
            return FoldPlan(
                k=int(doc["k"]),
                seed=int(doc["seed"]),
                assignments={str(k): int(v) for k, v in doc["assignments"].items()},
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ParseError(f"fold plan: {exc!r}") from exc


def stratified_kfold(manifest: DatasetManifest, k: int, seed: int) -> FoldPlan:
    """Per-class deterministic shuffle, then round-robin fold assignment.

    Deterministic for a fixed (manifest order, k, seed): each class's items
    are shuffled by a generator seeded from (seed, class_id), so per fold
    each class count is within 1 of n_c/k. Classes with fewer items than
    folds land in the first folds, with a warning.
    """
    n = len(manifest.entries)
    if k < 2 or k > n:
        raise InvalidK(f"k must be in [2, {n}], got {k}")
    assignments: dict[str, int] = {}
    for class_id in range(manifest.n_classes):
        ids = [e.item_id for e in manifest.entries if e.true_label == class_id]
        if not ids:
            continue
        if len(ids) < k:
            warnings.warn(
                f"class {class_id} has fewer items than folds ({len(ids)} < {k}); "
                f"spreading across the first {len(ids)} folds"
            )
        rng = random.Random(f"{seed}|{class_id}")
        rng.shuffle(ids)
        for i, item_id in enumerate(ids):
            assignments[item_id] = i % k
    return FoldPlan(k=k, seed=seed, assignments=assignments)


def ingest_external_scores(path: str | Path, manifest: DatasetManifest) -> np.ndarray:
    """Read an external score file and align its rows to manifest order.

    Layout: header line, "classes<TAB>A|B|C" matching the manifest, then one
    "item_id<TAB>s0<TAB>s1..." line per item. Rows may be logits or
    probabilities; they are used as-is for argmax and ROC.
    """
    lines = read_text(path).splitlines()
    body = [
        (n + 1, ln) for n, ln in enumerate(lines)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not body or body[0][1].strip() != SCORES_HEADER:
        raise ParseError(f"{path}: first line must be {SCORES_HEADER!r}")
    if len(body) < 2:
        raise ParseError(f"{path}: missing classes line")
    lineno, line = body[1]
    parts = line.split("\t")
    if len(parts) != 2 or parts[0] != "classes":
        raise ParseError(f"{path}:{lineno}: expected 'classes<TAB>...'")
    class_names = tuple(c.strip() for c in parts[1].split("|"))
    if len(class_names) != manifest.n_classes:
        raise ColumnCountMismatch(
            f"{path}: {len(class_names)} classes, manifest has {manifest.n_classes}"
        )
    if class_names != manifest.class_names:
        raise ParseError(
            f"{path}: class names {class_names} do not match manifest {manifest.class_names}"
        )

    by_id: dict[str, list[float]] = {}
    for lineno, line in body[2:]:
        parts = line.split("\t")
        item_id = parts[0].strip()
        if item_id in by_id:
            raise DuplicateItemId(f"{path}:{lineno}: repeated item id {item_id!r}")
        if len(parts) - 1 != manifest.n_classes:
            raise ColumnCountMismatch(
                f"{path}:{lineno}: {len(parts) - 1} scores for {manifest.n_classes} classes"
            )
        try:
            values = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric score") from exc
        if not all(np.isfinite(values)):
            raise NonFiniteScore(f"{path}:{lineno}: non-finite score for {item_id!r}")
        by_id[item_id] = values

    manifest_ids = set(manifest.ids)
    missing = [i for i in manifest.ids if i not in by_id]
    if missing:
        raise MissingRows(f"{path}: no scores for: {', '.join(missing)}")
    extra = sorted(set(by_id) - manifest_ids)
    if extra:
        raise ExtraRows(f"{path}: scores for unknown items: {', '.join(extra)}")
    return np.asarray([by_id[i] for i in manifest.ids], dtype=np.float64)


@dataclass(frozen=True)
class RunResult:
    """All evaluation outputs for one model run."""

    run_id: str
    mode: str
    model_name: str
    group_name: str
    class_names: tuple[str, ...]
    aggregation: Aggregation
    fold_ids: tuple[str, ...]
    fold_reports: tuple[MetricsReport, ...]
    cross_fold_mean: Optional[dict[str, float]]
    per_source: tuple[tuple[str, MetricsReport], ...]
    overall: MetricsReport
    records: tuple[PredictionRecord, ...]
    notes: tuple[str, ...]


def _records_from_scores(score_matrix: np.ndarray, ids: Sequence[str],
                         labels: Sequence[int], class_names: Sequence[str],
                         ) -> list[PredictionRecord]:
    records = []
    for i, item_id in enumerate(ids):
        sv = ScoreVector(score_matrix[i], aggregation=Aggregation.EXTERNAL)
        label, _, tie = predict(sv, class_names)
        records.append(PredictionRecord(
            item_id=item_id,
            true_label=labels[i],
            predicted_label=label,
            tie=tie,
            scores=sv,
            best_description=None,
        ))
    return records


def run_evaluation(manifest: DatasetManifest, *,
                   bank: Optional[TextEmbeddingBank] = None,
                   images: Optional[EmbeddingMatrix] = None,
                   scores: Optional[np.ndarray] = None,
                   fold_plan: Optional[FoldPlan] = None,
                   aggregation: Aggregation = Aggregation.SUM,
                   run_id: str = "run",
                   model_name: str = "",
                   group_name: str = "",
                   include_ovr_mcc: bool = False) -> RunResult:
    """Evaluate one model over a manifest.

    Zero-shot mode (bank + images, no fold plan) classifies every item once
    against the offline bank. External mode (scores + fold plan) evaluates an
    ingested score matrix per fold plus pooled. Both modes compute per-source
    breakdowns over all items; sources missing a class get that class
    excluded (and flagged) in their macro means.
    """
    zero_shot = bank is not None or images is not None
    external = scores is not None
    if zero_shot and external:
        raise ModeMismatch("provide either bank+images or scores, not both")
    if zero_shot:
        if bank is None or images is None:
            raise ModeMismatch("zero-shot mode needs both bank and images")
        if fold_plan is not None:
            raise ModeMismatch("zero-shot results are single-run; fold plan not allowed")
        if bank.class_names != manifest.class_names:
            raise ModeMismatch(
                f"bank classes {bank.class_names} do not match manifest "
                f"{manifest.class_names}"
            )
        mode = MODE_ZERO_SHOT
    elif external:
        if fold_plan is None:
            raise ModeMismatch("external-scores mode requires a fold plan")
        mode = MODE_EXTERNAL
    else:
        raise ModeMismatch("provide bank+images (zero-shot) or scores (external)")

    ids = manifest.ids
    labels = manifest.labels
    n_classes = manifest.n_classes

    if mode == MODE_ZERO_SHOT:
        if images.rows != len(ids):
            raise LengthMismatch(f"{images.rows} image rows for {len(ids)} manifest items")
        records = classify_batch(images, ids, bank, aggregation, true_labels=labels)
        score_matrix = np.stack([r.scores.class_scores for r in records])
        run_aggregation = aggregation
        notes = (_ZERO_SHOT_NOTE,)
    else:
        score_matrix = np.asarray(scores, dtype=np.float64)
        if score_matrix.shape != (len(ids), n_classes):
            raise LengthMismatch(
                f"score matrix shape {score_matrix.shape}, expected "
                f"({len(ids)}, {n_classes})"
            )
        records = _records_from_scores(score_matrix, ids, labels, manifest.class_names)
        run_aggregation = Aggregation.EXTERNAL
        notes = (_KFOLD_NOTE,)

    y_pred = [r.predicted_label for r in records]
    overall = compute_metrics_report(labels, y_pred, score_matrix, n_classes,
                                     include_ovr_mcc=include_ovr_mcc)

    if mode == MODE_ZERO_SHOT:
        fold_ids = ("all",)
        fold_reports = (overall,)
        cross_fold_mean = None
    else:
        if set(fold_plan.assignments) != set(ids):
            raise FoldPlanMismatch("fold plan does not cover exactly the manifest items")
        fold_ids = tuple(f"fold{f}" for f in range(fold_plan.k))
        reports = []
        index_of = {item_id: i for i, item_id in enumerate(ids)}
        for f in range(fold_plan.k):
            rows = sorted(index_of[i] for i in fold_plan.fold_ids(f))
            reports.append(compute_metrics_report(
                [labels[i] for i in rows],
                [y_pred[i] for i in rows],
                score_matrix[rows],
                n_classes,
                include_ovr_mcc=include_ovr_mcc,
            ))
        fold_reports = tuple(reports)
        cross_fold_mean = {}
        for key in _FOLD_MEAN_METRICS:
            values = [r.to_dict()[key] for r in fold_reports]
            cross_fold_mean[key] = sum(values) / len(values)

    per_source = []
    for source in manifest.sources:
        rows = [i for i, e in enumerate(manifest.entries) if e.source == source]
        per_source.append((source, compute_metrics_report(
            [labels[i] for i in rows],
            [y_pred[i] for i in rows],
            score_matrix[rows],
            n_classes,
            macro_over_present_only=True,
            include_ovr_mcc=include_ovr_mcc,
        )))

    return RunResult(
        run_id=run_id,
        mode=mode,
        model_name=model_name,
        group_name=group_name,
        class_names=manifest.class_names,
        aggregation=run_aggregation,
        fold_ids=fold_ids,
        fold_reports=fold_reports,
        cross_fold_mean=cross_fold_mean,
        per_source=tuple(per_source),
        overall=overall,
        records=tuple(records),
        notes=notes,
    )


def result_to_dict(result: RunResult) -> dict:
    """Machine-readable form of a RunResult, minus the prediction records."""
    return {
        "format": RESULT_FORMAT,
        "version": FORMAT_VERSION,
        "run_id": result.run_id,
        "mode": result.mode,
        "model": result.model_name,
        "group": result.group_name,
        "class_names": list(result.class_names),
        "aggregation": result.aggregation.value,
        "notes": list(result.notes),
        "fold_ids": list(result.fold_ids),
        "fold_reports": [r.to_dict() for r in result.fold_reports],
        "cross_fold_mean": result.cross_fold_mean,
        "per_source": [
            {"source": s, "report": r.to_dict()} for s, r in result.per_source
        ],
        "overall": result.overall.to_dict(),
    }


def result_from_dict(doc: dict, records: Sequence[PredictionRecord]) -> RunResult:
    try:
        if doc.get("format") != RESULT_FORMAT:
            raise ParseError(f"not a run result: format {doc.get('format')!r}")
        return RunResult(
            run_id=str(doc["run_id"]),
            mode=str(doc["mode"]),
            model_name=str(doc["model"]),
            group_name=str(doc["group"]),
            class_names=tuple(doc["class_names"]),
            aggregation=Aggregation(doc["aggregation"]),
            fold_ids=tuple(doc["fold_ids"]),
            fold_reports=tuple(MetricsReport.from_dict(d) for d in doc["fold_reports"]),
            cross_fold_mean=doc["cross_fold_mean"],
            per_source=tuple(
                (d["source"], MetricsReport.from_dict(d["report"]))
                for d in doc["per_source"]
            ),
            overall=MetricsReport.from_dict(doc["overall"]),
            records=tuple(records),
            notes=tuple(doc["notes"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"run result: {exc!r}") from exc


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def _fold_rows(result: RunResult) -> list[dict]:
    rows = []
    for fold_id, report in zip(result.fold_ids, result.fold_reports):
        d = report.to_dict()
        rows.append({
            "fold": fold_id,
            "n_items": d["n_items"],
            "macro_precision": d["macro_precision"],
            "macro_recall": d["macro_recall"],
            "macro_f1": d["macro_f1"],
            "mcc": d["mcc"],
            "macro_auc": d["macro_auc"],
        })
    return rows


def _render_summary_text(result: RunResult) -> str:
    out = io.StringIO()
    w = out.write
    w("zeroleaf evaluation report\n")
    w(f"run: {result.run_id}  mode: {result.mode}  aggregation: {result.aggregation.value}\n")
    for note in result.notes:
        w(f"note: {note}\n")
    w("\n")

    w("Group | Model | Macro Precision | Macro Recall | Macro F1-score\n")
    ov = result.overall
    w(f"{result.group_name} | {result.model_name} | {_pct(ov.p_macro)} | "
      f"{_pct(ov.r_macro)} | {_pct(ov.f1_macro)}\n\n")

    w("per-fold metrics\n")
    w("fold, n_items, macro_precision, macro_recall, macro_f1, mcc, macro_auc\n")
    for row in _fold_rows(result):
        w(f"{row['fold']}, {row['n_items']}, {row['macro_precision']:.6f}, "
          f"{row['macro_recall']:.6f}, {row['macro_f1']:.6f}, {row['mcc']:.6f}, "
          f"{row['macro_auc']:.6f}\n")
    if result.cross_fold_mean is not None:
        m = result.cross_fold_mean
        w(f"cross-fold mean: macro_precision {m['macro_precision']:.6f}, "
          f"macro_recall {m['macro_recall']:.6f}, macro_f1 {m['macro_f1']:.6f}, "
          f"mcc {m['mcc']:.6f}, macro_auc {m['macro_auc']:.6f}\n")
    w("\n")

    w(f"confusion matrix (rows = true, cols = predicted; classes: "
      f"{', '.join(result.class_names)})\n")
    for row in ov.confusion.counts:
        w("  " + " ".join(f"{int(x):6d}" for x in row) + "\n")
    w("\n")

    w("per-class AUC: " + ", ".join(
        f"{name}={'n/a' if v is None else f'{v:.4f}'}"
        for name, v in zip(result.class_names, ov.per_class_auc)
    ) + f"; macro AUC {ov.macro_auc:.4f}\n")
    w(f"MCC {ov.mcc:.4f}")
    if ov.mcc_ovr_macro is not None:
        w(f" (one-vs-rest macro MCC {ov.mcc_ovr_macro:.4f})")
    w("\n\n")

    w("per-source breakdown\n")
    w("source, n_items, macro_precision, macro_recall, macro_f1, mcc, macro_auc\n")
    for source, rep in result.per_source:
        d = rep.to_dict()
        w(f"{source}, {d['n_items']}, {d['macro_precision']:.6f}, "
          f"{d['macro_recall']:.6f}, {d['macro_f1']:.6f}, {d['mcc']:.6f}, "
          f"{d['macro_auc']:.6f}\n")
    w("\n")

    if ov.degenerate_flags:
        w("degeneracy flags (overall)\n")
        for flag in ov.degenerate_flags:
            scope = "dataset" if flag.class_id is None else f"class {flag.class_id}"
            w(f"  {scope}: {flag.reason}\n")
        w("\n")

    with_best = [r for r in result.records if r.best_description is not None]
    if with_best:
        w("interpretability: best-matching description per item\n")
        for r in with_best:
            bd = r.best_description
            w(f"  {r.item_id}: predicted {result.class_names[r.predicted_label]}; "
              f"best match (class {bd.class_id}, description {bd.description_index}, "
              f"similarity {bd.similarity:.4f}): {bd.text}\n")
    return out.getvalue()


def _render_folds_csv(result: RunResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["fold", "n_items", "macro_precision", "macro_recall",
                     "macro_f1", "mcc", "macro_auc"])
    for row in _fold_rows(result):
        writer.writerow([
            row["fold"], row["n_items"],
            f"{row['macro_precision']:.12g}", f"{row['macro_recall']:.12g}",
            f"{row['macro_f1']:.12g}", f"{row['mcc']:.12g}",
            f"{row['macro_auc']:.12g}",
        ])
    return out.getvalue()


def _render_report_json(result: RunResult) -> str:
    doc = result_to_dict(result)
    doc["summary_row"] = {
        "group": result.group_name,
        "model": result.model_name,
        "macro_precision_pct": _pct(result.overall.p_macro),
        "macro_recall_pct": _pct(result.overall.r_macro),
        "macro_f1_pct": _pct(result.overall.f1_macro),
    }
    doc["interpretability"] = [
        {
            "item_id": r.item_id,
            "predicted_label": r.predicted_label,
            "best_class_id": r.best_description.class_id,
            "best_description_index": r.best_description.description_index,
            "best_similarity": r.best_description.similarity,
            "best_description_text": r.best_description.text,
        }
        for r in result.records if r.best_description is not None
    ]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_report(result: RunResult, formats: set[str], out_dir: str | Path) -> dict[str, Path]:
    """Render a RunResult into the requested formats inside out_dir.

    json -> report.json (full machine-readable report with interpretability
    appendix), csv -> folds.csv (per-fold metric rows), text -> summary.txt
    (human-readable summary led by the Group/Model/P/R/F1 table row).
    """
    unknown = sorted(set(formats) - set(REPORT_FORMATS))
    if unknown:
        raise UnknownFormat(f"unsupported formats: {', '.join(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    if "json" in formats:
        path = out / "report.json"
        atomic_write_text(path, _render_report_json(result))
        written["json"] = path
    if "csv" in formats:
        path = out / "folds.csv"
        atomic_write_text(path, _render_folds_csv(result))
        written["csv"] = path
    if "text" in formats:
        path = out / "summary.txt"
        atomic_write_text(path, _render_summary_text(result))
        written["text"] = path
    return written
