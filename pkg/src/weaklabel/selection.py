"""Confidence-based pseudo-label selection, classifier training, evaluation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from sklearn.linear_model import LogisticRegression

from .alignment import AlignmentResult
from .errors import DegenerateTrainingError

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.5


@dataclass(frozen=True)
class PseudoLabelSet:
    """Documents retained for training, sorted by document index."""

    doc_indices: np.ndarray  # (m,) int64, strictly increasing
    class_ids: np.ndarray  # (m,) int64
    confidences: np.ndarray  # (m,)
    delta: float
    per_class: bool

    def __len__(self) -> int:
        return len(self.doc_indices)


def select_confident(
    result: AlignmentResult, delta: float = DEFAULT_DELTA, per_class: bool = True
) -> PseudoLabelSet:
    """Keep the top ceil(delta * n_c) most confident documents of each class.

    Ties in confidence break toward the lower document index.  With
    ``per_class=False`` a single global pool of size ceil(delta * n) is kept
    instead; a class can then lose all of its documents.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    assignment = result.assignment
    confidence = result.confidence
    n = len(assignment)
    k = result.posterior.shape[1]

    kept: list[np.ndarray] = []
    if per_class:
        for c in range(k):
            members = np.flatnonzero(assignment == c)
            if len(members) == 0:
                logger.warning("class %d has no aligned documents to select from", c)
                continue
            order = members[np.lexsort((members, -confidence[members]))]
            kept.append(order[: math.ceil(delta * len(members))])
    else:
        order = np.lexsort((np.arange(n), -confidence))
        kept.append(order[: math.ceil(delta * n)])

    indices = np.sort(np.concatenate(kept)) if kept else np.empty(0, dtype=np.int64)
    return PseudoLabelSet(
        doc_indices=indices.astype(np.int64),
        class_ids=assignment[indices].astype(np.int64),
        confidences=confidence[indices],
        delta=delta,
        per_class=per_class,
    )


@dataclass(frozen=True)
class ClassifierModel:
    """Trained logistic-regression classifier over document representations."""

    model: LogisticRegression
    num_classes: int

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.model.predict(features).astype(np.int64)


def train_classifier(
    features: np.ndarray,
    pseudo: PseudoLabelSet,
    num_classes: int,
    seed: int = 0,
) -> ClassifierModel:
    """Fit a multinomial logistic regression on the pseudo-labeled subset.

    The optimizer is deterministic for a fixed seed and feature matrix.
    Raises DegenerateTrainingError when the pseudo labels cover fewer than
    two classes; classes missing from the training set only warn (the model
    can never predict them).
    """
    if len(pseudo) == 0:
        raise DegenerateTrainingError("pseudo-label set is empty")
    present = np.unique(pseudo.class_ids)
    if len(present) < 2:
        raise DegenerateTrainingError(
            f"pseudo labels cover only class {int(present[0])}; need at least 2 classes"
        )
    missing = sorted(set(range(num_classes)) - set(present.tolist()))
    if missing:
        logger.warning("classes %s have no pseudo labels and cannot be predicted", missing)
    model = LogisticRegression(max_iter=1000, random_state=seed)
    model.fit(features[pseudo.doc_indices], pseudo.class_ids)
    return ClassifierModel(model=model, num_classes=num_classes)


@dataclass(frozen=True)
class EvalReport:
    """Micro/macro F1 with per-class breakdown and confusion counts."""

    micro_f1: float
    macro_f1: float
    precision: np.ndarray  # (k,)
    recall: np.ndarray  # (k,)
    f1: np.ndarray  # (k,)
    confusion: np.ndarray  # (k, k), rows gold, columns predicted

    def to_dict(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "per_class": [
                {
                    "class_id": c,
                    "precision": float(self.precision[c]),
                    "recall": float(self.recall[c]),
                    "f1": float(self.f1[c]),
                }
                for c in range(len(self.f1))
            ],
            "confusion": self.confusion.tolist(),
        }


def evaluate(predicted: np.ndarray, gold: np.ndarray, num_classes: int | None = None) -> EvalReport:
    """Score single-label predictions against gold labels.

    Micro F1 equals accuracy here (every document gets exactly one label).
    Classes absent from both gold and predictions are excluded from the
    macro average, with a warning.
    """
    predicted = np.asarray(predicted, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if predicted.shape != gold.shape:
        raise ValueError(f"length mismatch: {predicted.shape} predictions vs {gold.shape} gold")
    if len(gold) == 0:
        raise ValueError("nothing to evaluate")
    k = num_classes if num_classes is not None else int(max(predicted.max(), gold.max())) + 1

    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (gold, predicted), 1)

    tp = np.diag(confusion).astype(np.float64)
    pred_totals = confusion.sum(axis=0).astype(np.float64)
    gold_totals = confusion.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(gold_totals > 0, tp / gold_totals, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)

    present = (pred_totals > 0) | (gold_totals > 0)
    if not present.all():
        logger.warning(
            "classes %s absent from gold and predictions; excluded from macro F1",
            np.flatnonzero(~present).tolist(),
        )
    micro = float(tp.sum() / len(gold))
    macro = float(f1[present].mean())
    return EvalReport(
        micro_f1=micro, macro_f1=macro,
        precision=precision, recall=recall, f1=f1, confusion=confusion,
    )
