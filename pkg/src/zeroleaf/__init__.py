"""zeroleaf: zero-shot prompt-ensemble classification over embedding files,
with the evaluation harness (confusion matrix, macro P/R/F1, MCC, one-vs-rest
ROC/AUC, stratified k-fold) to score any model that can produce embeddings or
per-item score matrices."""

from .vecspace import EmbeddingMatrix, EmbeddingVector, cosine_similarity, l2_normalize
from .promptbank import (
    ClassPromptSet,
    TextEmbeddingBank,
    build_text_bank,
    load_prompt_sets,
    validate_bank,
)
from .zeroshot import (
    Aggregation,
    PredictionRecord,
    ScoreVector,
    aggregate_scores,
    best_description,
    classify_batch,
    predict,
)
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    auc,
    compute_metrics_report,
    confusion_matrix,
    macro_prf,
    mcc_multiclass,
    one_vs_rest_auc,
    roc_curve,
)
from .harness import (
    DatasetManifest,
    FoldPlan,
    RunResult,
    emit_report,
    ingest_external_scores,
    load_manifest,
    run_evaluation,
    stratified_kfold,
)
from .exchange import Sidecar, read_embedding_file, write_embedding_file

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "ClassPromptSet",
    "ConfusionMatrix",
    "DatasetManifest",
    "EmbeddingMatrix",
    "EmbeddingVector",
    "FoldPlan",
    "MetricsReport",
    "PredictionRecord",
    "RunResult",
    "ScoreVector",
    "Sidecar",
    "TextEmbeddingBank",
    "aggregate_scores",
    "auc",
    "best_description",
    "build_text_bank",
    "classify_batch",
    "compute_metrics_report",
    "confusion_matrix",
    "cosine_similarity",
    "emit_report",
    "ingest_external_scores",
    "l2_normalize",
    "load_manifest",
    "load_prompt_sets",
    "macro_prf",
    "mcc_multiclass",
    "one_vs_rest_auc",
    "predict",
    "read_embedding_file",
    "roc_curve",
    "run_evaluation",
    "stratified_kfold",
    "validate_bank",
    "write_embedding_file",
]
