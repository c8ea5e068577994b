"""Class representations from iterative keyword expansion.

Each class starts from its name anchor and greedily adopts the vocabulary
word most similar to the current class representation, recomputing the
representation as a Zipf-weighted mean (weight 1/i for the i-th keyword).
Expansion stops when adopting a word would change which words are nearest
to the recomputed representation, or at the keyword cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import StaticRepTable, Vocabulary, normalize_word
from .errors import MissingClassNameError

DEFAULT_MAX_KEYWORDS = 100
DEFAULT_MIN_COUNT = 5


def zipf_weighted_mean(vectors: np.ndarray) -> np.ndarray:
    """Weighted mean of rows with weights 1, 1/2, 1/3, ... (1-based ranks)."""
    if len(vectors) == 0:
        raise ValueError("empty vector list")
    weights = 1.0 / np.arange(1, len(vectors) + 1)
    return weights @ vectors / weights.sum()


def cosine_similarities(matrix: np.ndarray, rep: np.ndarray) -> np.ndarray:
    """Cosine of each row of ``matrix`` against ``rep``; zero-norm rows score -1."""
    rep_norm = np.linalg.norm(rep)
    if rep_norm == 0.0:
        raise ValueError("reference vector has zero norm")
    norms = np.linalg.norm(matrix, axis=1)
    sims = np.full(len(matrix), -1.0)
    ok = norms > 0.0
    sims[ok] = matrix[ok] @ rep / (norms[ok] * rep_norm)
    return sims


@dataclass(frozen=True)
class ClassModel:
    """Expanded keyword list and representation of one class."""

    class_id: int
    name: str
    name_tokens: tuple[int, ...]
    keywords: tuple[int, ...]
    representation: np.ndarray
    anchor: np.ndarray


def name_token_ids(name: str, vocab: Vocabulary) -> tuple[int, ...]:
    """Word ids of a (possibly multi-word) class name, missing tokens dropped."""
    ids = []
    for token in name.split():
        word_id = vocab.get(normalize_word(token))
        if word_id is not None:
            ids.append(word_id)
    return tuple(ids)


def class_anchor(name_tokens: Sequence[int], table: StaticRepTable, name: str = "") -> np.ndarray:
    """Anchor vector of a class: mean of its name tokens' static reps.

    Tokens absent from the table are ignored; raises MissingClassNameError
    when no token is available.
    """
    present = [t for t in name_tokens if t in table]
    if not present:
        raise MissingClassNameError(name or str(list(name_tokens)))
    return np.mean([table[t] for t in present], axis=0)


def class_representation(keywords: Sequence[int], table: StaticRepTable) -> np.ndarray:
    """Zipf-weighted mean of the keywords' static representations."""
    if len(keywords) == 0:
        raise ValueError("keyword list is empty")
    return zipf_weighted_mean(np.stack([table[k] for k in keywords]))


def rank_words_by_similarity(
    rep: np.ndarray, table: StaticRepTable, candidates: np.ndarray | None = None
) -> np.ndarray:
    """Word ids ordered by descending cosine to ``rep``, ties by ascending id."""
    if candidates is None:
        candidates = table.word_ids()
    sims = cosine_similarities(table.vectors[candidates], rep)
    # lexsort keys: last key is primary; ids ascending break similarity ties
    order = np.lexsort((candidates, -sims))
    return candidates[order]


def expand_class_keywords(
    class_id: int,
    name: str,
    name_tokens: Sequence[int],
    table: StaticRepTable,
    max_keywords: int = DEFAULT_MAX_KEYWORDS,
    min_count: int = DEFAULT_MIN_COUNT,
) -> ClassModel:
    """Grow a class keyword list until the cap or the consistency check stops it.

    The first keyword entry is the class-name anchor.  Each step adopts the
    most similar eligible word, then verifies that the top-|K| words ranked
    by the recomputed representation are exactly the current keywords; if
    not, the candidate is rejected and expansion ends.

    Candidate words must occur at least ``min_count`` times.  Multi-word
    class names contribute a composite anchor vector; the anchor entry is
    identified by the constituent token closest to it.
    """
    if max_keywords < 1:
        raise ValueError(f"max_keywords must be >= 1, got {max_keywords}")
    anchor = class_anchor(name_tokens, table, name)

    present = [t for t in name_tokens if t in table]
    if len(present) == 1:
        anchor_token = present[0]
    else:
        sims = cosine_similarities(table.vectors[present], anchor)
        anchor_token = present[int(np.argmax(sims))]

    keywords = [anchor_token]
    vectors = [anchor]
    pool = table.word_ids(min_count)

    while len(keywords) < max_keywords:
        rep = zipf_weighted_mean(np.asarray(vectors))
        candidates = pool[~np.isin(pool, keywords)]
        if len(candidates) == 0:
            break
        ranked = rank_words_by_similarity(rep, table, candidates)
        w = int(ranked[0])

        new_rep = zipf_weighted_mean(np.asarray(vectors + [table[w]]))
        if not _keywords_consistent(keywords + [w], anchor_token, anchor, pool, table, new_rep):
            break
        keywords.append(w)
        vectors.append(table[w])

    return ClassModel(
        class_id=class_id,
        name=name,
        name_tokens=tuple(name_tokens),
        keywords=tuple(keywords),
        representation=zipf_weighted_mean(np.asarray(vectors)),
        anchor=anchor,
    )


def _keywords_consistent(
    keywords: list[int],
    anchor_token: int,
    anchor: np.ndarray,
    pool: np.ndarray,
    table: StaticRepTable,
    rep: np.ndarray,
) -> bool:
    """True if the |K| nearest eligible words to ``rep`` are exactly ``keywords``.

    The anchor entry is ranked with its composite vector in place of the
    anchor token's own static rep (identical for single-word names).
    """
    universe = np.unique(np.concatenate([pool, np.asarray(keywords, dtype=np.int64)]))
    vectors = table.vectors[universe].copy()
    vectors[universe == anchor_token] = anchor
    sims = cosine_similarities(vectors, rep)
    order = np.lexsort((universe, -sims))
    top = universe[order[: len(keywords)]]
    return set(top.tolist()) == set(keywords)


def build_class_models(
    class_names: Sequence[str],
    vocab: Vocabulary,
    table: StaticRepTable,
    max_keywords: int = DEFAULT_MAX_KEYWORDS,
    min_count: int = DEFAULT_MIN_COUNT,
) -> list[ClassModel]:
    """Expand every class name against one shared static-rep table."""
    models = []
    for class_id, name in enumerate(class_names):
        tokens = name_token_ids(name, vocab)
        if not tokens:
            raise MissingClassNameError(name)
        models.append(
            expand_class_keywords(class_id, name, tokens, table, max_keywords, min_count)
        )
    return models


def class_rep_matrix(models: Sequence[ClassModel]) -> np.ndarray:
    """Stack class representations into a (k, dim) matrix."""
    return np.stack([m.representation for m in models])
