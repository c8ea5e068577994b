"""Keyword expansion, Zipf-weighted class representations, similarity ranking."""

import numpy as np
import pytest

from conftest import make_table
from weaklabel import (
    MissingClassNameError,
    build_class_models,
    class_representation,
    compute_static_representations,
    expand_class_keywords,
    generate_synthetic_corpus,
    zipf_weighted_mean,
)
from weaklabel.classrep import class_anchor, name_token_ids, rank_words_by_similarity
from weaklabel.corpus import Vocabulary


def zipf_oracle(vectors):
    """Plain-loop weighted sum: weight 1/i for the i-th vector, normalized."""
    total = np.zeros(len(vectors[0]))
    denom = 0.0
    for i, v in enumerate(vectors, start=1):
        total += np.asarray(v, dtype=np.float64) / i
        denom += 1.0 / i
    return total / denom


def cosine(u, v):
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


def test_single_keyword_is_identity():
    table = make_table([[3.0, -1.0, 2.0]])
    np.testing.assert_array_equal(class_representation([0], table), [3.0, -1.0, 2.0])


def test_two_keyword_closed_form():
    u, v = np.array([1.0, 0.0]), np.array([0.0, 3.0])
    table = make_table([u, v])
    np.testing.assert_allclose(class_representation([0, 1], table), (2 * u + v) / 3)


def test_three_keyword_weights():
    vs = np.eye(3)
    table = make_table(vs)
    rep = class_representation([0, 1, 2], table)
    np.testing.assert_allclose(rep, [6 / 11, 3 / 11, 2 / 11])
    np.testing.assert_allclose(rep, zipf_oracle(vs))


def test_zipf_matches_oracle_on_random_lists():
    rng = np.random.default_rng(17)
    for _ in range(50):
        m = int(rng.integers(1, 40))
        vectors = rng.standard_normal((m, 8))
        got = zipf_weighted_mean(vectors)
        want = zipf_oracle(vectors)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_empty_keyword_list_rejected():
    with pytest.raises(ValueError):
        class_representation([], make_table([[1.0]]))
    with pytest.raises(ValueError):
        zipf_weighted_mean(np.empty((0, 3)))


def test_anchor_single_and_multi_word():
    table = make_table([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(class_anchor([0], table), [1.0, 0.0])
    np.testing.assert_allclose(class_anchor([0, 1], table), [0.5, 0.5])


def test_anchor_ignores_absent_constituents():
    table = make_table([[1.0, 0.0], [0.0, 1.0]], counts=[1, 0])
    np.testing.assert_array_equal(class_anchor([0, 1], table), [1.0, 0.0])


def test_anchor_missing_entirely():
    table = make_table([[1.0, 0.0]], counts=[0])
    with pytest.raises(MissingClassNameError):
        class_anchor([0], table, name="ghost")


def test_name_token_ids_drops_unknown_words():
    vocab = Vocabulary.from_words(["ice", "hockey"])
    assert name_token_ids("Ice Hockey", vocab) == (0, 1)
    assert name_token_ids("ice skating", vocab) == (0,)
    assert name_token_ids("skating", vocab) == ()


def test_ranking_orthogonal_and_ties():
    table = make_table([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(
        rank_words_by_similarity(np.array([1.0, 0.0]), table), [0, 1]
    )
    # exact tie: both words equally similar, lower id first
    tied = rank_words_by_similarity(np.array([1.0, 1.0]), table)
    np.testing.assert_array_equal(tied, [0, 1])


def test_ranking_matches_sort_oracle():
    rng = np.random.default_rng(23)
    vectors = rng.standard_normal((100, 6))
    table = make_table(vectors)
    rep = rng.standard_normal(6)
    got = rank_words_by_similarity(rep, table)
    want = sorted(range(100), key=lambda w: (-cosine(vectors[w], rep), w))
    np.testing.assert_array_equal(got, np.array(want))


def test_zero_reference_rejected():
    with pytest.raises(ValueError):
        rank_words_by_similarity(np.zeros(2), make_table([[1.0, 0.0]]))


def near_orthogonal_table():
    base = np.eye(3)
    jitter = np.array([[0.0, 0.02, -0.01], [0.01, 0.0, 0.02], [-0.02, 0.01, 0.0]])
    return make_table(base + jitter, counts=[9, 9, 9])


def test_expansion_stops_before_cap_on_orthogonal_words():
    table = near_orthogonal_table()
    model = expand_class_keywords(0, "w0", [0], table, max_keywords=100, min_count=1)
    assert model.keywords[0] == 0
    assert len(model.keywords) <= 3


def test_expansion_cap_one_keeps_only_the_name():
    table = near_orthogonal_table()
    model = expand_class_keywords(0, "w0", [0], table, max_keywords=1, min_count=1)
    assert model.keywords == (0,)
    np.testing.assert_array_equal(model.representation, model.anchor)


def test_expansion_min_count_gates_candidates():
    # word 1 sits right next to word 0 but occurs too rarely to be adopted
    vectors = [[1.0, 0.0], [0.999, 0.01], [0.0, 1.0]]
    table = make_table(vectors, counts=[10, 4, 10])
    rare_out = expand_class_keywords(0, "w0", [0], table, max_keywords=5, min_count=5)
    assert 1 not in rare_out.keywords
    rare_in = expand_class_keywords(0, "w0", [0], table, max_keywords=5, min_count=1)
    assert 1 in rare_in.keywords


def test_keywords_are_shared_between_classes():
    # both class names point at the same nearby word; both may adopt it
    vectors = [[1.0, 0.05], [0.05, 1.0], [0.6, 0.6]]
    table = make_table(vectors, counts=[9, 9, 9])
    a = expand_class_keywords(0, "w0", [0], table, max_keywords=3, min_count=1)
    b = expand_class_keywords(1, "w1", [1], table, max_keywords=3, min_count=1)
    assert 2 in a.keywords and 2 in b.keywords


def test_expansion_scale_invariance():
    corpus, _, names = generate_synthetic_corpus(3, 90, 16, 2)
    table = compute_static_representations(corpus)
    scaled = make_table(table.vectors * 3.7, counts=table.counts)
    for class_id, name in enumerate(names):
        tokens = name_token_ids(name, corpus.vocab)
        a = expand_class_keywords(class_id, name, tokens, table)
        b = expand_class_keywords(class_id, name, tokens, scaled)
        assert a.keywords == b.keywords
        np.testing.assert_allclose(b.representation, a.representation * 3.7, rtol=1e-9)


def test_prefix_stability_at_every_accepted_step():
    """After each commit, the |K| nearest pool words equal the prefix set."""
    corpus, _, names = generate_synthetic_corpus(4, 400, 32, 7)
    table = compute_static_representations(corpus)
    models = build_class_models(names, corpus.vocab, table)
    pool = table.word_ids(5)
    for model in models:
        keywords = list(model.keywords)
        assert 1 <= len(keywords) <= 100
        universe = sorted(set(pool.tolist()) | set(keywords))
        for i in range(2, len(keywords) + 1):
            prefix = keywords[:i]
            rep = zipf_oracle([table[w] for w in prefix])
            ranked = sorted(universe, key=lambda w: (-cosine(table[w], rep), w))
            assert set(ranked[:i]) == set(prefix)


def test_topical_words_adopted_first_and_dominate_rejects():
    """Expansion takes a class's whole topical cluster before anything else,
    and every topical keyword outranks every rejected non-noise word by
    anchor cosine.  At least one class must stop before the pool runs out."""
    corpus, _, names = generate_synthetic_corpus(4, 400, 32, 7)
    table = compute_static_representations(corpus)
    models = build_class_models(names, corpus.vocab, table)
    pool = table.word_ids(5)
    stopped_early = 0
    for model in models:
        own = {w for w in pool if corpus.vocab.words[w].startswith(model.name)}
        prefix = set(model.keywords[: len(own)])
        assert prefix == own  # adoption order starts with the class's own words

        kept = set(model.keywords)
        rejected = [
            w
            for w in pool
            if w not in kept and not corpus.vocab.words[w].startswith("noise")
        ]
        if rejected:
            stopped_early += 1
            topical_min = min(cosine(table[w], model.anchor) for w in own)
            rejected_max = max(cosine(table[w], model.anchor) for w in rejected)
            assert topical_min > rejected_max
    assert stopped_early >= 1  # the consistency check fires before the cap


def test_build_class_models_rejects_unknown_name():
    corpus, _, names = generate_synthetic_corpus(3, 30, 16, 0)
    table = compute_static_representations(corpus)
    with pytest.raises(MissingClassNameError):
        build_class_models(["nosuchword"], corpus.vocab, table)
