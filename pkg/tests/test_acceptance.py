"""Acceptance gate: one test per shipping criterion.

Each test pins the tolerances and time budget it must meet; run with -v to
get one pass/fail line per criterion.  Oracles here are deliberately dumb
reimplementations (plain loops, brute-force sorts) so they cannot share a
bug with the library code they check.
"""

import filecmp
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import anisotropic_blobs, make_table
from weaklabel import (
    PipelineConfig,
    classify_end,
    classify_hier,
    expand_class_keywords,
    fuse_ranks,
    generate_synthetic_corpus,
    gmm_align,
    kmeans_align,
    parse_class_tree,
    reduce_dimensions,
    run_flat,
    run_pipeline,
    scores_to_ranks,
    zipf_weighted_mean,
)
from weaklabel import pipeline as pl


def test_criterion_1_synthetic_end_to_end():
    start = time.monotonic()
    corpus, gold, names = generate_synthetic_corpus(k=4, n=400, dim=32, seed=7)
    result = run_flat(corpus, names, PipelineConfig())
    elapsed = time.monotonic() - start

    prior_acc = float(np.mean(result.prior == gold))
    align_acc = float(np.mean(result.alignment.assignment == gold))
    assert prior_acc >= 0.90, f"prior accuracy {prior_acc:.3f}"
    assert align_acc >= prior_acc, f"alignment {align_acc:.3f} fell below prior {prior_acc:.3f}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_criterion_2_zipf_weighted_mean_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(2)
    for _ in range(1000):
        m, dim = int(rng.integers(1, 60)), int(rng.integers(1, 16))
        vectors = rng.standard_normal((m, dim))
        total = np.zeros(dim)
        weight = 0.0
        for i, v in enumerate(vectors):
            total += v / (i + 1)
            weight += 1.0 / (i + 1)
        np.testing.assert_allclose(
            zipf_weighted_mean(vectors), total / weight, rtol=1e-6, atol=1e-12
        )
    assert time.monotonic() - start < 1.0


def _cosine(u, v):
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


def _prefixes_stable(keywords, pool, table):
    """Top-i words by the recomputed rep must be exactly the first i keywords."""
    universe = sorted(set(pool.tolist()) | set(keywords))
    vectors = [table[w] for w in keywords]
    for i in range(2, len(keywords) + 1):
        rep = zipf_weighted_mean(np.asarray(vectors[:i]))
        ranked = sorted(universe, key=lambda w: (-_cosine(table[w], rep), w))
        if set(ranked[:i]) != set(keywords[:i]):
            return False
    return True


def test_criterion_3_keyword_expansion_fuzz():
    start = time.monotonic()
    rng = np.random.default_rng(3)
    stops_before_cap = 0
    for trial in range(10_000):
        m = int(rng.integers(3, 15))
        dim = int(rng.integers(2, 9))
        cap = int(rng.integers(1, 9))
        min_count = int(rng.integers(1, 4))
        table = make_table(rng.standard_normal((m, dim)), counts=rng.integers(1, 10, m))
        model = expand_class_keywords(0, "w0", (0,), table, cap, min_count)
        assert 1 <= len(model.keywords) <= cap, f"trial {trial}"
        if len(model.keywords) < cap:
            stops_before_cap += 1
        assert _prefixes_stable(list(model.keywords), table.word_ids(min_count), table), (
            f"trial {trial}: unstable prefix in {model.keywords}"
        )
    assert stops_before_cap > 0
    assert time.monotonic() - start < 30.0


def test_criterion_4_rank_fusion_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(4)
    for trial in range(1000):
        m = int(rng.integers(1, 51))
        rank_lists = [scores_to_ranks(rng.standard_normal(m)) for _ in range(4)]
        got = fuse_ranks(rank_lists)
        products = [
            int(rank_lists[0][j]) * int(rank_lists[1][j])
            * int(rank_lists[2][j]) * int(rank_lists[3][j])
            for j in range(m)
        ]
        order = sorted(range(m), key=lambda j: (products[j], j))
        want = [0] * m
        for rank0, j in enumerate(order):
            want[j] = rank0 + 1
        np.testing.assert_array_equal(got, want, err_msg=f"trial {trial}")
    assert time.monotonic() - start < 5.0


def test_criterion_5_gmm_iteration_properties():
    start = time.monotonic()
    rng = np.random.default_rng(5)
    for trial in range(500):
        k = int(rng.integers(2, 5))
        n, p = int(rng.integers(k + 5, 50)), int(rng.integers(2, 5))
        data = rng.standard_normal((n, p))
        data[: n // 2, 0] += 3.0
        prior = rng.integers(0, k, n)
        prior[:k] = np.arange(k)
        result = gmm_align(data, prior, k, max_iters=10, keep_history=True)
        diffs = np.diff(result.ll_history)
        assert diffs.min() >= -1e-8, f"trial {trial}: log-likelihood decreased {diffs.min()}"
        assert np.max(np.abs(result.posterior.sum(axis=1) - 1.0)) <= 1e-6, f"trial {trial}"
        for cov in result.covariance_history:
            assert np.max(np.abs(cov - cov.T)) <= 1e-12, f"trial {trial}: asymmetric"
            assert np.linalg.eigvalsh(cov).min() > 0.0, f"trial {trial}: not PSD"
    assert time.monotonic() - start < 60.0


def test_criterion_6_pca_captured_variance_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(6)
    for trial in range(100):
        n = int(rng.integers(10, 80))
        d = int(rng.integers(2, 13))
        target = int(rng.integers(1, min(n, d) + 1))
        data = rng.standard_normal((n, d)) * rng.uniform(0.1, 4.0, d)
        reduced, _, _ = reduce_dimensions(data, target)
        captured = reduced.var(axis=0, ddof=1).sum()
        eigvals = np.sort(np.linalg.eigvalsh(np.cov(data.T, ddof=1)))[::-1]
        want = eigvals[:target].sum()
        assert abs(captured - want) <= 1e-6 * abs(want), (
            f"trial {trial}: captured {captured} vs eigenvalue sum {want}"
        )
    assert time.monotonic() - start < 10.0


def test_criterion_7_gmm_beats_kmeans_on_correlated_blobs():
    start = time.monotonic()
    data, gold, prior = anisotropic_blobs()
    gmm_acc = float(np.mean(gmm_align(data, prior, 2).assignment == gold))
    km_acc = float(np.mean(kmeans_align(data, prior, 2).assignment == gold))
    assert gmm_acc > km_acc, f"gmm {gmm_acc:.3f} vs kmeans {km_acc:.3f}"
    # deterministic fixture: rerun reproduces the same accuracies
    assert float(np.mean(gmm_align(data, prior, 2).assignment == gold)) == gmm_acc
    assert time.monotonic() - start < 5.0


def test_criterion_8_stage_bypass_identities():
    corpus, _, names = generate_synthetic_corpus(k=3, n=90, dim=16, seed=2)
    config = PipelineConfig(pca_dim=8, cluster_method="none")
    result = run_flat(corpus, names, config)
    np.testing.assert_array_equal(result.alignment.assignment, result.prior)

    tree = parse_class_tree("\n".join(f"ROOT\t{n}" for n in names))
    config = PipelineConfig(pca_dim=8)
    np.testing.assert_array_equal(
        classify_hier(corpus, tree, config), classify_end(corpus, tree, config)
    )


def test_criterion_9_byte_identical_artifacts_across_runs_and_workers(tmp_path):
    from weaklabel.corpus import write_embedded_corpus

    corpus, _, _ = generate_synthetic_corpus(k=3, n=90, dim=16, seed=2)
    corpus_dir = write_embedded_corpus(corpus, tmp_path / "corpus")

    def run(tag, workers):
        config = PipelineConfig(
            corpus=str(corpus_dir), out=str(tmp_path / tag), pca_dim=8,
            seed=11, workers=workers,
        )
        return run_pipeline(config)

    outs = [run("w1_a", 1), run("w1_b", 1), run("w2_a", 2), run("w2_b", 2)]
    names = [p.name for p in outs[0].iterdir()]
    assert len(names) == 12
    for other in outs[1:]:
        for name in names:
            assert filecmp.cmp(outs[0] / name, other / name, shallow=False), (
                f"{other.name}/{name} differs"
            )


FULL_SCALE_REASON = (
    "full-scale benchmark needs the published news corpora embedded into XCEF "
    "(tens of GB of model inference); run manually when those artifacts exist"
)


@pytest.mark.skip(reason=FULL_SCALE_REASON)
def test_secondary_full_scale_benchmarks():
    pytest.fail("unreached")
