"""Shared builders for hand-made corpora and alignment fixtures."""

import numpy as np

from weaklabel import Document, EmbeddedCorpus, StaticRepTable, Vocabulary


def make_table(vectors, counts=None) -> StaticRepTable:
    """StaticRepTable from a row-per-word array; every word present by default."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if counts is None:
        counts = np.ones(len(vectors), dtype=np.int64)
    return StaticRepTable(vectors=vectors, counts=np.asarray(counts, dtype=np.int64))


def make_corpus(doc_specs, words, dim, gold=None, class_names=None) -> EmbeddedCorpus:
    """Corpus from [(word_ids, vectors), ...] with an explicit vocabulary."""
    docs = [
        Document(
            word_ids=np.asarray(ids, dtype=np.int64),
            vectors=np.asarray(vecs, dtype=np.float32).reshape(len(ids), dim),
        )
        for ids, vecs in doc_specs
    ]
    gold_arr = None if gold is None else np.asarray(gold, dtype=np.int64)
    corpus = EmbeddedCorpus(
        dim=dim,
        vocab=Vocabulary.from_words(list(words)),
        docs=docs,
        gold_labels=gold_arr,
        class_names=class_names,
    )
    corpus.validate()
    return corpus


def anisotropic_blobs(n_per=300, sep=4.0, sigma_long=10.0, sigma_short=1.0, seed=42):
    """Two correlated blobs whose elongation crosses the midpoint plane.

    Nearest-centroid labeling splits them by a vertical plane and mislabels
    points pushed across it by the long axis; a tied-covariance model can
    recover the true boundary.  Returns (data, gold, nearest-centroid prior).
    """
    rng = np.random.default_rng(seed)
    theta = np.deg2rad(45.0)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    shape = rot @ np.diag([sigma_long, sigma_short])
    means = np.array([[0.0, 0.0], [sep, 0.0]])
    data = np.vstack(
        [means[c] + rng.standard_normal((n_per, 2)) @ shape.T for c in range(2)]
    )
    gold = np.repeat(np.arange(2), n_per)
    prior = np.argmin(((data[:, None, :] - means[None]) ** 2).sum(-1), axis=1)
    return data, gold, prior.astype(np.int64)
