"""Class-oriented document representations via attention rank fusion.

Tokens are scored against the class representations by a mixture of
attention mechanisms (significance = max class cosine, relation = cosine
to the class average), each over either contextualized or static token
vectors.  Per-mechanism rankings are fused by product of ranks, and the
document vector is the 1/rank-weighted average of contextualized vectors.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document, EmbeddedCorpus, StaticRepTable

MECHANISMS = ("significance", "relation")
REP_CHOICES = ("contextualized", "static")

ATTENTION_MODES = ("mixture", "sig-ctx", "sig-static", "rel-ctx", "rel-static", "none")

_MODE_TABLE = {
    "sig-ctx": (("significance", "contextualized"),),
    "sig-static": (("significance", "static"),),
    "rel-ctx": (("relation", "contextualized"),),
    "rel-static": (("relation", "static"),),
    "mixture": (
        ("significance", "contextualized"),
        ("significance", "static"),
        ("relation", "contextualized"),
        ("relation", "static"),
    ),
}


@dataclass(frozen=True)
class AttentionConfig:
    """Enabled (mechanism, rep-choice) pairs; must be non-empty."""

    mechanisms: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.mechanisms:
            raise ValueError("at least one attention mechanism must be enabled")
        for mech, rep in self.mechanisms:
            if mech not in MECHANISMS or rep not in REP_CHOICES:
                raise ValueError(f"unknown attention mechanism {(mech, rep)!r}")

    @classmethod
    def from_mode(cls, mode: str) -> "AttentionConfig | None":
        """Config for a CLI mode name; ``"none"`` means unweighted averaging."""
        if mode == "none":
            return None
        if mode not in _MODE_TABLE:
            raise ValueError(f"unknown attention mode {mode!r}, expected one of {ATTENTION_MODES}")
        return cls(mechanisms=_MODE_TABLE[mode])


@dataclass(frozen=True)
class DocumentReps:
    """Document vectors plus the per-document token weights that formed them."""

    vectors: np.ndarray  # (n, dim) float64
    token_weights: list[np.ndarray]  # each (m_i,), non-negative, sums to 1


def _cosine_rows(rows: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Cosine of each row against each target row; zero-norm rows score -1."""
    row_norms = np.linalg.norm(rows, axis=1)
    target_norms = np.linalg.norm(targets, axis=1)
    sims = np.full((len(rows), len(targets)), -1.0)
    ok = row_norms > 0.0
    tok = target_norms > 0.0
    if ok.any() and tok.any():
        block = rows[ok] @ targets[tok].T / np.outer(row_norms[ok], target_norms[tok])
        out = np.full((int(ok.sum()), len(targets)), -1.0)
        out[:, tok] = block
        sims[ok] = out
    return sims


def attention_scores(
    doc: Document,
    table: StaticRepTable,
    class_reps: np.ndarray,
    mechanism: str,
    rep_choice: str,
) -> np.ndarray:
    """Per-token attention score under one (mechanism, rep-choice) pair.

    Significance is the maximum cosine to any single class representation;
    relation is the cosine to the average of all class representations.
    Zero-norm token vectors score -1.
    """
    if rep_choice == "contextualized":
        tokens = doc.vectors.astype(np.float64)
    elif rep_choice == "static":
        tokens = table.vectors[doc.word_ids]
    else:
        raise ValueError(f"unknown rep choice {rep_choice!r}")

    if mechanism == "significance":
        return _cosine_rows(tokens, class_reps).max(axis=1)
    if mechanism == "relation":
        context = class_reps.mean(axis=0, keepdims=True)
        return _cosine_rows(tokens, context)[:, 0]
    raise ValueError(f"unknown mechanism {mechanism!r}")


def scores_to_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, descending by score, ties broken by ascending position."""
    positions = np.arange(len(scores))
    order = np.lexsort((positions, -np.asarray(scores, dtype=np.float64)))
    ranks = np.empty(len(scores), dtype=np.int64)
    ranks[order] = positions + 1
    return ranks


def fuse_ranks(rank_lists: Sequence[np.ndarray]) -> np.ndarray:
    """Fuse per-mechanism 1-based ranks into one 1-based ranking.

    Tokens are ordered by ascending product of their ranks (equivalent to
    the geometric mean), final ties broken by ascending token position.
    Products use arbitrary-precision integers, so long documents cannot
    overflow and tie comparisons stay exact.
    """
    if not rank_lists:
        raise ValueError("no rankings to fuse")
    m = len(rank_lists[0])
    for ranks in rank_lists[1:]:
        if len(ranks) != m:
            raise ValueError(f"rank list lengths differ: {len(ranks)} vs {m}")
    products = [
        functools.reduce(lambda a, b: a * b, (int(r[j]) for r in rank_lists), 1)
        for j in range(m)
    ]
    order = sorted(range(m), key=lambda j: (products[j], j))
    fused = np.empty(m, dtype=np.int64)
    for rank0, j in enumerate(order):
        fused[j] = rank0 + 1
    return fused


def document_representation(
    doc: Document,
    table: StaticRepTable,
    class_reps: np.ndarray,
    config: AttentionConfig | None,
) -> tuple[np.ndarray, np.ndarray]:
    """One document vector: 1/rank-weighted mean of contextualized vectors.

    ``config=None`` disables attention and averages tokens uniformly.
    Returns (vector, normalized token weights).
    """
    if len(doc) == 0:
        raise ValueError("document is empty")
    if config is None:
        weights = np.full(len(doc), 1.0 / len(doc))
    else:
        rank_lists = [
            scores_to_ranks(attention_scores(doc, table, class_reps, mech, rep))
            for mech, rep in config.mechanisms
        ]
        weights = 1.0 / fuse_ranks(rank_lists)
        weights /= weights.sum()
    # Weighted average always uses the contextualized vectors.
    vector = weights @ doc.vectors.astype(np.float64)
    return vector, weights


def _rep_chunk(
    docs: list[Document],
    table: StaticRepTable,
    class_reps: np.ndarray,
    config: AttentionConfig | None,
) -> list[tuple[np.ndarray, np.ndarray]]:
    return [document_representation(doc, table, class_reps, config) for doc in docs]


def compute_document_reps(
    corpus: EmbeddedCorpus,
    table: StaticRepTable,
    class_reps: np.ndarray,
    config: AttentionConfig | None,
    workers: int = 1,
) -> DocumentReps:
    """Document representations for a whole corpus.

    With ``workers > 1`` documents are processed in contiguous chunks by a
    process pool; results are reassembled in document order, so output is
    identical for any worker count.
    """
    if workers > 1 and corpus.num_docs > 1:
        chunks = np.array_split(np.arange(corpus.num_docs), min(workers, corpus.num_docs))
        jobs = [[corpus.docs[i] for i in chunk] for chunk in chunks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    functools.partial(
                        _rep_chunk, table=table, class_reps=class_reps, config=config
                    ),
                    jobs,
                )
            )
        results = [pair for part in parts for pair in part]
    else:
        results = _rep_chunk(corpus.docs, table, class_reps, config)
    vectors = np.stack([vec for vec, _ in results])
    weights = [w for _, w in results]
    return DocumentReps(vectors=vectors, token_weights=weights)
