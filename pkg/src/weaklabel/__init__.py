"""Text classification from class names alone, over pre-embedded corpora.

The pipeline expands each class name into a keyword-based class
representation, builds class-oriented document representations via rank-
fused attention over token vectors, aligns documents to classes with a
prior-initialized tied-covariance Gaussian mixture, selects the most
confident assignments, and trains a classifier on those pseudo labels.
"""

from .alignment import (
    AlignmentResult,
    GmmState,
    gmm_align,
    kmeans_align,
    prior_labels,
    reduce_dimensions,
)
from .classrep import (
    ClassModel,
    build_class_models,
    class_rep_matrix,
    class_representation,
    expand_class_keywords,
    zipf_weighted_mean,
)
from .corpus import (
    Document,
    EmbeddedCorpus,
    StaticRepTable,
    Vocabulary,
    compute_static_representations,
    load_embedded_corpus,
    normalize_word,
    write_embedded_corpus,
)
from .docrep import (
    AttentionConfig,
    DocumentReps,
    attention_scores,
    compute_document_reps,
    document_representation,
    fuse_ranks,
    scores_to_ranks,
)
from .errors import (
    DegenerateTrainingError,
    FormatError,
    MissingClassNameError,
    NumericError,
    ValidationError,
    WeakLabelError,
)
from .hierarchy import ClassTree, classify_end, classify_hier, parse_class_tree
from .pipeline import FlatResult, PipelineConfig, run_flat, run_pipeline
from .selection import (
    ClassifierModel,
    EvalReport,
    PseudoLabelSet,
    evaluate,
    select_confident,
    train_classifier,
)
from .synthetic import generate_hierarchical_corpus, generate_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "AttentionConfig",
    "ClassModel",
    "ClassTree",
    "ClassifierModel",
    "DegenerateTrainingError",
    "Document",
    "DocumentReps",
    "EmbeddedCorpus",
    "EvalReport",
    "FlatResult",
    "FormatError",
    "GmmState",
    "MissingClassNameError",
    "NumericError",
    "PipelineConfig",
    "PseudoLabelSet",
    "StaticRepTable",
    "ValidationError",
    "Vocabulary",
    "WeakLabelError",
    "attention_scores",
    "build_class_models",
    "class_rep_matrix",
    "class_representation",
    "classify_end",
    "classify_hier",
    "compute_document_reps",
    "compute_static_representations",
    "document_representation",
    "evaluate",
    "expand_class_keywords",
    "fuse_ranks",
    "generate_hierarchical_corpus",
    "generate_synthetic_corpus",
    "gmm_align",
    "kmeans_align",
    "load_embedded_corpus",
    "normalize_word",
    "parse_class_tree",
    "prior_labels",
    "reduce_dimensions",
    "run_flat",
    "run_pipeline",
    "scores_to_ranks",
    "select_confident",
    "train_classifier",
    "write_embedded_corpus",
    "zipf_weighted_mean",
]
