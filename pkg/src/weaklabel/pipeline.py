"""Stage orchestration: run the label pipeline in memory or against a directory.

Stages run in a fixed order: keyword expansion, document representations,
prior labels, clustering alignment, confident-subset selection, classifier
training.  ``run_flat`` keeps everything in memory (the hierarchical
classifier calls it per tree node); ``run_pipeline`` additionally writes
each stage's artifact before the next stage starts, so a failed run leaves
every completed artifact behind.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alignment import (
    DEFAULT_MAX_ITERS,
    DEFAULT_PCA_DIM,
    DEFAULT_TOL,
    AlignmentResult,
    gmm_align,
    kmeans_align,
    prior_labels,
    reduce_dimensions,
)
from .classrep import (
    DEFAULT_MAX_KEYWORDS,
    DEFAULT_MIN_COUNT,
    ClassModel,
    build_class_models,
    class_rep_matrix,
)
from .corpus import EmbeddedCorpus, compute_static_representations, load_embedded_corpus
from .docrep import ATTENTION_MODES, AttentionConfig, DocumentReps, compute_document_reps
from .errors import DegenerateTrainingError, ValidationError, WeakLabelError
from .selection import (
    DEFAULT_DELTA,
    ClassifierModel,
    EvalReport,
    PseudoLabelSet,
    evaluate,
    select_confident,
    train_classifier,
)

logger = logging.getLogger(__name__)

CLUSTER_METHODS = ("gmm", "kmeans", "none")

KEYWORDS_FILE = "keywords.txt"
CLASS_REPS_FILE = "class_reps.bin"
DOC_REPS_FILE = "doc_reps.bin"
PROJECTION_FILE = "projection_2d.csv"
PRIOR_LABELS_FILE = "labels_prior.txt"
ALIGN_LABELS_FILE = "labels_align.txt"
ALIGN_CSV_FILE = "align.csv"
PSEUDO_FILE = "pseudo_labels.csv"
FINAL_LABELS_FILE = "labels_final.txt"
PRIOR_REPORT_FILE = "report_prior.json"
ALIGN_REPORT_FILE = "report_align.json"
FINAL_REPORT_FILE = "report_final.json"
SWEEP_FILE = "delta_sweep.csv"

CSV_HEADER = "doc_index,class_id,confidence"
SWEEP_DELTAS = tuple(i / 10 for i in range(1, 10))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run needs; defaults match the published setup."""

    corpus: str = ""
    class_names: str | None = None  # newline-separated file; falls back to corpus metadata
    tree: str | None = None  # hierarchy edges, hier subcommand only
    out: str = "out"
    t_keywords: int = DEFAULT_MAX_KEYWORDS
    min_count: int = DEFAULT_MIN_COUNT
    attention: str = "mixture"
    pca_dim: int = DEFAULT_PCA_DIM
    cluster_method: str = "gmm"
    delta: float = DEFAULT_DELTA
    delta_sweep: bool = False  # also rerun select+train across SWEEP_DELTAS
    global_selection: bool = False
    seed: int = 0
    workers: int = 1
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL

    def validated(self) -> "PipelineConfig":
        if self.attention not in ATTENTION_MODES:
            raise ValidationError(f"unknown attention mode {self.attention!r}")
        if self.cluster_method not in CLUSTER_METHODS:
            raise ValidationError(f"unknown cluster method {self.cluster_method!r}")
        if not 0.0 < self.delta <= 1.0:
            raise ValidationError(f"delta must be in (0, 1], got {self.delta}")
        if self.t_keywords < 1:
            raise ValidationError("t-keywords must be at least 1")
        if self.min_count < 1:
            raise ValidationError("min-count must be at least 1")
        if self.pca_dim < 0:
            raise ValidationError("pca-dim must be non-negative (0 disables reduction)")
        if self.workers < 1:
            raise ValidationError("workers must be at least 1")
        return self


_CONFIG_FIELDS = {f: t for f, t in PipelineConfig.__annotations__.items()}


def parse_config_text(text: str) -> dict:
    """Parse flat key=value lines into PipelineConfig keyword arguments."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno} is not key=value: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _CONFIG_FIELDS:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce_config_value(key, value)
        except ValueError:
            raise ValidationError(f"config line {lineno}: bad value for {key}: {value!r}")
    return values


def _coerce_config_value(key: str, value: str):
    kind = _CONFIG_FIELDS[key]
    if key in ("class_names", "tree"):
        return value or None
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    if kind == "bool":
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(value)
    return value


@dataclass(frozen=True)
class FlatResult:
    """All intermediates of one flat pipeline run."""

    class_names: list[str]
    models: list[ClassModel]
    class_reps: np.ndarray  # (k, dim)
    doc_reps: DocumentReps
    prior: np.ndarray  # (n,)
    reduced: np.ndarray  # (n, P)
    alignment: AlignmentResult
    pseudo: PseudoLabelSet | None
    classifier: ClassifierModel | None
    final_labels: np.ndarray  # (n,)


def _reduce(doc_vectors: np.ndarray, class_reps: np.ndarray, pca_dim: int):
    """Project documents (and class reps, for the empty-class fallback)."""
    if pca_dim == 0:
        return doc_vectors, class_reps
    reduced, basis, mean = reduce_dimensions(doc_vectors, pca_dim)
    return reduced, (class_reps - mean) @ basis.T


def _prior_as_alignment(
    prior: np.ndarray, doc_vectors: np.ndarray, class_reps: np.ndarray
) -> AlignmentResult:
    """Stage bypass: prior labels dressed up as an alignment result.

    Confidence is the cosine to the assigned class rescaled to (0, 1] so the
    selection stage still has something to rank by.
    """
    n, k = len(prior), len(class_reps)
    posterior = np.zeros((n, k))
    posterior[np.arange(n), prior] = 1.0
    doc_norms = np.linalg.norm(doc_vectors, axis=1)
    class_norms = np.linalg.norm(class_reps, axis=1)
    cos = np.full(n, -1.0)
    ok = doc_norms > 0
    assigned = class_reps[prior]
    cos[ok] = np.sum(doc_vectors[ok] * assigned[ok], axis=1) / (
        doc_norms[ok] * class_norms[prior][ok]
    )
    return AlignmentResult(
        assignment=prior.copy(), posterior=posterior, confidence=(1.0 + cos) / 2.0
    )


def _align_stage(
    reduced: np.ndarray,
    prior: np.ndarray,
    k: int,
    class_reduced: np.ndarray,
    doc_vectors: np.ndarray,
    class_reps: np.ndarray,
    config: PipelineConfig,
) -> AlignmentResult:
    if config.cluster_method == "gmm":
        return gmm_align(
            reduced, prior, k,
            max_iters=config.max_iters, tol=config.tol, fallback_means=class_reduced,
        )
    if config.cluster_method == "kmeans":
        return kmeans_align(
            reduced, prior, k, max_iters=config.max_iters, fallback_means=class_reduced,
        )
    return _prior_as_alignment(prior, doc_vectors, class_reps)


def run_flat(
    corpus: EmbeddedCorpus,
    class_names: list[str],
    config: PipelineConfig,
    prior_only: bool = False,
    fallback_to_alignment: bool = False,
) -> FlatResult:
    """Run every stage in memory and return all intermediates.

    ``prior_only`` stops after the prior labels (used for partitions too
    small to cluster).  ``fallback_to_alignment`` downgrades a degenerate
    training set to the alignment labels instead of failing, which keeps a
    recursive run alive when one partition collapses onto a single class.
    """
    config = config.validated()
    table = compute_static_representations(corpus)
    models = build_class_models(
        class_names, corpus.vocab, table,
        max_keywords=config.t_keywords, min_count=config.min_count,
    )
    class_reps = class_rep_matrix(models)
    attention = AttentionConfig.from_mode(config.attention)
    doc_reps = compute_document_reps(
        corpus, table, class_reps, attention, workers=config.workers
    )
    prior = prior_labels(doc_reps.vectors, class_reps)
    if prior_only:
        alignment = _prior_as_alignment(prior, doc_reps.vectors, class_reps)
        return FlatResult(
            class_names=list(class_names), models=models, class_reps=class_reps,
            doc_reps=doc_reps, prior=prior, reduced=doc_reps.vectors,
            alignment=alignment, pseudo=None, classifier=None, final_labels=prior,
        )
    reduced, class_reduced = _reduce(doc_reps.vectors, class_reps, config.pca_dim)
    alignment = _align_stage(
        reduced, prior, len(class_names), class_reduced,
        doc_reps.vectors, class_reps, config,
    )
    pseudo = select_confident(alignment, config.delta, per_class=not config.global_selection)
    classifier = None
    try:
        classifier = train_classifier(
            doc_reps.vectors, pseudo, num_classes=len(class_names), seed=config.seed
        )
        final = classifier.predict(doc_reps.vectors)
    except DegenerateTrainingError:
        if not fallback_to_alignment:
            raise
        logger.warning("degenerate training set; falling back to alignment labels")
        final = alignment.assignment.copy()
    return FlatResult(
        class_names=list(class_names), models=models, class_reps=class_reps,
        doc_reps=doc_reps, prior=prior, reduced=reduced, alignment=alignment,
        pseudo=pseudo, classifier=classifier, final_labels=final,
    )


class StageError(WeakLabelError):
    """Wraps a failure with the name of the stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# Artifact readers and writers.  Matrices use the XCEF float encoding:
# u32 rows, u32 cols, then row-major IEEE-754 binary32, all little-endian.

def write_matrix(path: Path, matrix: np.ndarray) -> None:
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(np.array([rows, cols], dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def read_matrix(path: Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 8:
        raise ValidationError(f"{path}: truncated matrix header")
    rows, cols = np.frombuffer(blob, dtype="<u4", count=2)
    expected = 8 + 4 * int(rows) * int(cols)
    if len(blob) != expected:
        raise ValidationError(f"{path}: expected {expected} bytes, found {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=8)
    return data.reshape(int(rows), int(cols)).astype(np.float64)


def write_labels(path: Path, labels: np.ndarray) -> None:
    path.write_text("".join(f"{int(v)}\n" for v in labels), encoding="utf-8")


def read_labels(path: Path) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return np.array([int(line) for line in lines if line.strip()], dtype=np.int64)


def write_keywords(path: Path, models: list[ClassModel], vocab) -> None:
    lines = []
    for model in models:
        words = ",".join(vocab.words[w] for w in model.keywords)
        lines.append(f"{model.name}\t{words}\n")
    path.write_text("".join(lines), encoding="utf-8")


def write_assignment_csv(path: Path, indices, class_ids, confidences) -> None:
    rows = [CSV_HEADER]
    for i, c, conf in zip(indices, class_ids, confidences):
        rows.append(f"{int(i)},{int(c)},{float(conf)!r}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_assignment_csv(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValidationError(f"{path}: expected header {CSV_HEADER!r}")
    indices, class_ids, confs = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValidationError(f"{path} line {lineno}: expected 3 fields")
        indices.append(int(parts[0]))
        class_ids.append(int(parts[1]))
        confs.append(float(parts[2]))
    return (
        np.array(indices, dtype=np.int64),
        np.array(class_ids, dtype=np.int64),
        np.array(confs, dtype=np.float64),
    )


def write_report(path: Path, report: EvalReport) -> None:
    path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_projection(path: Path, doc_vectors: np.ndarray) -> None:
    """2-D view of the document representations for external plotting."""
    target = min(2, min(doc_vectors.shape))
    reduced, _, _ = reduce_dimensions(doc_vectors, target)
    if reduced.shape[1] < 2:
        reduced = np.hstack([reduced, np.zeros((len(reduced), 2 - reduced.shape[1]))])
    rows = ["doc_index,x,y"]
    for i, (x, y) in enumerate(reduced):
        rows.append(f"{i},{float(x)!r},{float(y)!r}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def resolve_class_names(corpus: EmbeddedCorpus, config: PipelineConfig) -> list[str]:
    if config.class_names:
        lines = Path(config.class_names).read_text(encoding="utf-8").splitlines()
        names = [line.strip() for line in lines if line.strip()]
    else:
        names = list(corpus.class_names or [])
    if len(names) < 2:
        raise ValidationError("need at least 2 class names (file or corpus metadata)")
    return names


def run_pipeline(config: PipelineConfig, stop_after: str | None = None) -> Path:
    """Run all stages against ``config.out``, writing artifacts stage by stage.

    ``stop_after="prior"`` ends the run once prior labels are written (the
    represent subcommand).  Raises StageError naming the first stage that
    fails; artifacts written before the failure stay on disk.
    """
    config = config.validated()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    def stage(name, fn):
        try:
            return fn()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc

    corpus = stage("load", lambda: load_embedded_corpus(config.corpus))
    class_names = stage("load", lambda: resolve_class_names(corpus, config))
    k = len(class_names)
    gold = corpus.gold_labels

    def _keywords():
        table = compute_static_representations(corpus)
        models = build_class_models(
            class_names, corpus.vocab, table,
            max_keywords=config.t_keywords, min_count=config.min_count,
        )
        write_keywords(out / KEYWORDS_FILE, models, corpus.vocab)
        class_reps = class_rep_matrix(models)
        write_matrix(out / CLASS_REPS_FILE, class_reps)
        return table, class_reps

    table, class_reps = stage("keywords", _keywords)

    def _doc_reps():
        attention = AttentionConfig.from_mode(config.attention)
        doc_reps = compute_document_reps(
            corpus, table, class_reps, attention, workers=config.workers
        )
        write_matrix(out / DOC_REPS_FILE, doc_reps.vectors)
        write_projection(out / PROJECTION_FILE, doc_reps.vectors)
        return doc_reps

    doc_reps = stage("doc-reps", _doc_reps)

    def _prior():
        prior = prior_labels(doc_reps.vectors, class_reps)
        write_labels(out / PRIOR_LABELS_FILE, prior)
        if gold is not None:
            write_report(out / PRIOR_REPORT_FILE, evaluate(prior, gold, k))
        return prior

    prior = stage("prior", _prior)
    if stop_after == "prior":
        return out

    def _align():
        reduced, class_reduced = _reduce(doc_reps.vectors, class_reps, config.pca_dim)
        alignment = _align_stage(
            reduced, prior, k, class_reduced, doc_reps.vectors, class_reps, config
        )
        write_labels(out / ALIGN_LABELS_FILE, alignment.assignment)
        write_assignment_csv(
            out / ALIGN_CSV_FILE,
            np.arange(len(alignment.assignment)), alignment.assignment,
            alignment.confidence,
        )
        if gold is not None:
            write_report(out / ALIGN_REPORT_FILE, evaluate(alignment.assignment, gold, k))
        return alignment

    alignment = stage("align", _align)

    def _select():
        pseudo = select_confident(
            alignment, config.delta, per_class=not config.global_selection
        )
        write_assignment_csv(
            out / PSEUDO_FILE, pseudo.doc_indices, pseudo.class_ids, pseudo.confidences
        )
        return pseudo

    pseudo = stage("select", _select)

    def _train():
        classifier = train_classifier(
            doc_reps.vectors, pseudo, num_classes=k, seed=config.seed
        )
        final = classifier.predict(doc_reps.vectors)
        write_labels(out / FINAL_LABELS_FILE, final)
        if gold is not None:
            write_report(out / FINAL_REPORT_FILE, evaluate(final, gold, k))
        return final

    stage("train", _train)
    if config.delta_sweep:
        stage("sweep", lambda: _sweep_deltas(out, doc_reps.vectors, alignment, gold, k, config))
    return out


def _sweep_deltas(out, features, alignment, gold, k, config) -> None:
    """Rerun selection and training across SWEEP_DELTAS as a diagnostic.

    Scores are blank when the corpus has no gold labels, or when a delta
    leaves too few classes to train on.
    """
    rows = ["delta,selected,micro_f1,macro_f1"]
    for delta in SWEEP_DELTAS:
        pseudo = select_confident(alignment, delta, per_class=not config.global_selection)
        micro = macro = ""
        try:
            classifier = train_classifier(features, pseudo, num_classes=k, seed=config.seed)
        except DegenerateTrainingError as exc:
            logger.warning("delta %.1f: %s", delta, exc)
        else:
            if gold is not None:
                report = evaluate(classifier.predict(features), gold, k)
                micro, macro = repr(report.micro_f1), repr(report.macro_f1)
        rows.append(f"{delta:.1f},{len(pseudo)},{micro},{macro}")
    (out / SWEEP_FILE).write_text("\n".join(rows) + "\n", encoding="utf-8")
