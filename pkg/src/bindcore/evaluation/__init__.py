"""Retrieval metrics, zero-shot classification and the modality ablation harness."""
from .ablation import CSV_FIELDS, STANDARD_GRID, ablation_row, ablation_run, config_label, matched_vs_mismatched, rows_to_csv
from .retrieval import (
    DEFAULT_KS,
    DIRECTIONS,
    EVAL_BATCH,
    MODES,
    RetrievalReport,
    SimilarityMatrix,
    directions_for,
    evaluate_retrieval,
    ground_truth_ranks,
    paired_embeddings,
    recall_at_k,
    retrieval_from_embeddings,
    similarity_matrix,
)
from .zeroshot import name_embeddings, softmax, zero_shot_accuracy, zero_shot_classify

__all__ = [
    "CSV_FIELDS",
    "DEFAULT_KS",
    "DIRECTIONS",
    "EVAL_BATCH",
    "MODES",
    "STANDARD_GRID",
    "RetrievalReport",
    "SimilarityMatrix",
    "ablation_row",
    "ablation_run",
    "config_label",
    "directions_for",
    "evaluate_retrieval",
    "ground_truth_ranks",
    "matched_vs_mismatched",
    "name_embeddings",
    "paired_embeddings",
    "recall_at_k",
    "retrieval_from_embeddings",
    "rows_to_csv",
    "similarity_matrix",
    "softmax",
    "zero_shot_accuracy",
    "zero_shot_classify",
]
