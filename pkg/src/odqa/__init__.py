"""End-to-end open-domain question answering pipeline.

Paragraph-level BM25 retrieval, distant-supervision data augmentation,
stage-wise fine-tuning plans, retriever/reader score fusion, and EM/F1/recall
evaluation.
"""

__version__ = "0.1.0"

from .analysis import AnalyzerKind, Token, normalize_answer, tokenize_cjk_bigrams, tokenize_english
from .errors import DataError, IndexFormatError, OdqaError, ReaderProtocolError
from .index import Index, IndexBuilder, IndexConfig, Paragraph, RetrievedPassage, build_index, segment_document
from .metrics import EvalReport, GoldAnswerSet, evaluate_run, exact_match, retrieval_recall, token_f1
from .readers import (
    AnswerCandidate,
    FusionConfig,
    MockReader,
    ProtocolReader,
    SpanPrediction,
    answer_question,
    fuse,
    score_paragraph,
    tune_mu,
)
from .supervision import (
    AugmentationConfig,
    QaExample,
    Stage,
    StageManifest,
    Strategy,
    TrainingExample,
    build_stage_plan,
    dataset_stats,
    find_answer_span,
    generate_dataset,
)

__all__ = [
    "__version__",
    "AnalyzerKind",
    "AnswerCandidate",
    "AugmentationConfig",
    "DataError",
    "EvalReport",
    "FusionConfig",
    "GoldAnswerSet",
    "Index",
    "IndexBuilder",
    "IndexConfig",
    "IndexFormatError",
    "MockReader",
    "OdqaError",
    "Paragraph",
    "ProtocolReader",
    "QaExample",
    "ReaderProtocolError",
    "RetrievedPassage",
    "SpanPrediction",
    "Stage",
    "StageManifest",
    "Strategy",
    "Token",
    "TrainingExample",
    "answer_question",
    "build_index",
    "build_stage_plan",
    "dataset_stats",
    "evaluate_run",
    "exact_match",
    "find_answer_span",
    "fuse",
    "generate_dataset",
    "normalize_answer",
    "retrieval_recall",
    "score_paragraph",
    "segment_document",
    "token_f1",
    "tokenize_cjk_bigrams",
    "tokenize_english",
    "tune_mu",
]
