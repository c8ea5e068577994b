"""Deterministic synthetic embedded corpora for tests and benchmarks.

Each class owns an anchor direction in embedding space.  Class-name and
class-topical tokens embed near the owning anchor; shared noise tokens
embed near their own off-anchor base vectors.  Noise tokens additionally
carry a document-level component along one global skew direction, which
gives document representations an anisotropic (correlated) spread.
"""

from __future__ import annotations

import numpy as np

from .corpus import Document, EmbeddedCorpus, Vocabulary

_NAMES = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliett kilo lima "
    "mike november oscar papa quebec romeo sierra tango uniform victor whiskey "
    "xray yankee zulu"
).split()

_SLOT_NAMES = ("one", "two", "three", "four", "five", "six", "seven", "eight")

TOPIC_WORDS_PER_CLASS = 8
NOISE_WORDS = 20


def class_name_for(i: int) -> str:
    return _NAMES[i] if i < len(_NAMES) else f"class{i}"


def _orthonormal_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
    return q.T  # (count, dim), pairwise orthogonal unit rows


def generate_synthetic_corpus(
    k: int, n: int, dim: int, seed: int
) -> tuple[EmbeddedCorpus, np.ndarray, list[str]]:
    """Build a k-class corpus of n documents with dim-dimensional tokens.

    Returns (corpus, gold labels, class names); the corpus also carries
    both.  Deterministic: identical arguments give bit-identical output.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n < k:
        raise ValueError(f"n must be >= k, got n={n}, k={k}")
    if dim < k:
        raise ValueError(f"dim must be >= k, got dim={dim}, k={k}")

    rng = np.random.default_rng(seed)
    directions = _orthonormal_directions(dim, min(dim, k + 1), rng)
    anchors = directions[:k]
    skew = directions[k] if len(directions) > k else None

    class_names = [class_name_for(c) for c in range(k)]
    topic_words = [
        [f"{class_names[c]}{t}" for t in range(TOPIC_WORDS_PER_CLASS)] for c in range(k)
    ]
    noise_words = [f"noise{j}" for j in range(NOISE_WORDS)]
    vocab = Vocabulary.from_words(
        class_names + [w for ws in topic_words for w in ws] + noise_words
    )

    name_id = {c: vocab.index[class_names[c]] for c in range(k)}
    topic_ids = [[vocab.index[w] for w in ws] for ws in topic_words]
    noise_ids = np.array([vocab.index[w] for w in noise_words])

    # Fixed per-word offsets keep static reps of distinct words distinct.
    topic_offsets = rng.standard_normal((k, TOPIC_WORDS_PER_CLASS, dim)) * 0.15
    noise_base = rng.standard_normal((NOISE_WORDS, dim)) * 0.6

    gold = np.arange(n, dtype=np.int64) % k
    docs: list[Document] = []
    for i in range(n):
        c = int(gold[i])
        length = int(rng.integers(10, 26))
        doc_skew = float(rng.standard_normal()) if skew is not None else 0.0

        ids = np.empty(length, dtype=np.int64)
        vecs = np.empty((length, dim), dtype=np.float64)
        ids[0] = name_id[c]
        vecs[0] = anchors[c]
        for j in range(1, length):
            roll = rng.random()
            if roll < 0.10:
                ids[j] = name_id[c]
                vecs[j] = anchors[c]
            elif roll < 0.52:
                t = int(rng.integers(TOPIC_WORDS_PER_CLASS))
                ids[j] = topic_ids[c][t]
                vecs[j] = 0.9 * anchors[c] + topic_offsets[c, t]
            else:
                w = int(rng.integers(NOISE_WORDS))
                ids[j] = noise_ids[w]
                vecs[j] = noise_base[w]
                if skew is not None:
                    # Shared per-document drift: correlated noise the tied
                    # covariance can model but plain cosine cannot.
                    vecs[j] = vecs[j] + 1.2 * doc_skew * skew
        vecs += rng.standard_normal((length, dim)) * 0.35
        docs.append(Document(word_ids=ids, vectors=vecs.astype(np.float32)))

    corpus = EmbeddedCorpus(
        dim=dim, vocab=vocab, docs=docs, gold_labels=gold, class_names=list(class_names)
    )
    corpus.validate()
    return corpus, gold, list(class_names)


COARSE_TOPIC_WORDS = 6
SLOT_TOPIC_WORDS = 4

# Slot-token geometry: unit direction gamma*coarse + rho*refine, scaled so
# slot tokens outweigh the coarse name word in an unnormalized constituent
# mean.  Cross-branch drift is drawn only on the refine planes of *other*
# coarse classes, so it muddies global fine distinctions while staying
# invisible both to coarse anchors and to a single branch's own refine axes.
SLOT_SCALE = 2.0
SLOT_COARSE_MIX = 0.30
CROSS_BRANCH_DRIFT = 1.8


def generate_hierarchical_corpus(
    coarse: int, fine_per_coarse: int, n: int, dim: int, seed: int
) -> tuple[EmbeddedCorpus, np.ndarray, list[str], list[str], list[tuple[str, str]]]:
    """Two-level corpus: ``coarse`` top classes, each split into fine classes.

    Fine class names are two words, "<coarse name> <slot>", where the slot
    word ("one", "two", ...) is shared across coarse branches.  A slot
    token's vector depends on which branch it occurs in: it mixes the
    branch's coarse anchor with a branch-specific refinement axis.  Documents
    also carry a random drift on the refinement planes of the *other*
    branches, so slot words look smeared corpus-wide but crisp inside one
    branch.  Flat classification over all fine classes therefore degrades,
    while a coarse-first split stays clean: exactly the regime a two-stage
    classifier is meant to win.

    Returns (corpus, gold fine labels, coarse names, fine names, tree edges);
    gold labels index fine classes in ``coarse * fine_per_coarse + fine`` order.
    """
    k_fine = coarse * fine_per_coarse
    if coarse < 2 or fine_per_coarse < 2:
        raise ValueError("need at least 2 coarse classes and 2 fine classes each")
    if fine_per_coarse > len(_SLOT_NAMES):
        raise ValueError(f"fine_per_coarse must be <= {len(_SLOT_NAMES)}")
    if dim < coarse + k_fine + 1:
        raise ValueError(f"dim must be >= {coarse + k_fine + 1} for this hierarchy")
    if n < k_fine:
        raise ValueError(f"n must be >= {k_fine}")

    rng = np.random.default_rng(seed)
    dirs = _orthonormal_directions(dim, coarse + k_fine + 1, rng)
    coarse_anchors = dirs[:coarse]
    # refine_axes[cc, f] is the refinement direction of fine class f inside
    # coarse class cc; all rows are mutually orthogonal.
    refine_axes = dirs[coarse : coarse + k_fine].reshape(coarse, fine_per_coarse, dim)
    skew = dirs[coarse + k_fine]

    coarse_names = [class_name_for(cc) for cc in range(coarse)]
    slot_names = list(_SLOT_NAMES[:fine_per_coarse])
    fine_names = [
        f"{coarse_names[cc]} {slot_names[f]}"
        for cc in range(coarse)
        for f in range(fine_per_coarse)
    ]
    coarse_topics = [
        [f"{coarse_names[cc]}{t}" for t in range(COARSE_TOPIC_WORDS)] for cc in range(coarse)
    ]
    slot_topics = [
        [f"{slot_names[f]}{t}" for t in range(SLOT_TOPIC_WORDS)] for f in range(fine_per_coarse)
    ]
    noise_words = [f"noise{j}" for j in range(NOISE_WORDS)]
    vocab = Vocabulary.from_words(
        coarse_names
        + slot_names
        + [w for ws in coarse_topics for w in ws]
        + [w for ws in slot_topics for w in ws]
        + noise_words
    )
    coarse_name_id = [vocab.index[name] for name in coarse_names]
    slot_name_id = [vocab.index[name] for name in slot_names]
    coarse_topic_ids = [[vocab.index[w] for w in ws] for ws in coarse_topics]
    slot_topic_ids = [[vocab.index[w] for w in ws] for ws in slot_topics]
    noise_ids = np.array([vocab.index[w] for w in noise_words])

    coarse_topic_offsets = rng.standard_normal((coarse, COARSE_TOPIC_WORDS, dim)) * 0.12
    slot_topic_offsets = rng.standard_normal((fine_per_coarse, SLOT_TOPIC_WORDS, dim)) * 0.12
    noise_base = rng.standard_normal((NOISE_WORDS, dim)) * 0.6
    slot_refine_mix = float(np.sqrt(1.0 - SLOT_COARSE_MIX**2))

    gold = np.arange(n, dtype=np.int64) % k_fine
    docs: list[Document] = []
    for i in range(n):
        g = int(gold[i])
        cc, f = g // fine_per_coarse, g % fine_per_coarse
        length = int(rng.integers(12, 28))
        doc_skew = float(rng.standard_normal())

        drift = np.zeros(dim)
        for other in range(coarse):
            if other != cc:
                drift += (
                    rng.standard_normal(fine_per_coarse) * CROSS_BRANCH_DRIFT
                ) @ refine_axes[other]
        slot_vec = (
            SLOT_SCALE * (SLOT_COARSE_MIX * coarse_anchors[cc] + slot_refine_mix * refine_axes[cc, f])
            + drift
        )

        ids = np.empty(length, dtype=np.int64)
        vecs = np.empty((length, dim), dtype=np.float64)
        ids[0] = coarse_name_id[cc]
        vecs[0] = coarse_anchors[cc]
        ids[1] = slot_name_id[f]
        vecs[1] = slot_vec
        for j in range(2, length):
            roll = rng.random()
            if roll < 0.10:
                ids[j] = coarse_name_id[cc]
                vecs[j] = coarse_anchors[cc]
            elif roll < 0.26:
                t = int(rng.integers(COARSE_TOPIC_WORDS))
                ids[j] = coarse_topic_ids[cc][t]
                vecs[j] = 0.9 * coarse_anchors[cc] + coarse_topic_offsets[cc, t]
            elif roll < 0.37:
                ids[j] = slot_name_id[f]
                vecs[j] = slot_vec
            elif roll < 0.55:
                t = int(rng.integers(SLOT_TOPIC_WORDS))
                ids[j] = slot_topic_ids[f][t]
                vecs[j] = 0.9 * slot_vec + slot_topic_offsets[f, t]
            else:
                w = int(rng.integers(NOISE_WORDS))
                ids[j] = noise_ids[w]
                vecs[j] = noise_base[w] + 0.7 * doc_skew * skew
        vecs += rng.standard_normal((length, dim)) * 0.10
        docs.append(Document(word_ids=ids, vectors=vecs.astype(np.float32)))

    corpus = EmbeddedCorpus(
        dim=dim, vocab=vocab, docs=docs, gold_labels=gold, class_names=list(fine_names)
    )
    corpus.validate()
    edges = [("ROOT", name) for name in coarse_names]
    for cc in range(coarse):
        for f in range(fine_per_coarse):
            edges.append((coarse_names[cc], fine_names[cc * fine_per_coarse + f]))
    return corpus, gold, coarse_names, fine_names, edges
