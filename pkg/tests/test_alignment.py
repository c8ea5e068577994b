"""Prior assignment, PCA reduction, and the clustering alignments."""

import logging

import numpy as np
import pytest

from conftest import anisotropic_blobs
from weaklabel import gmm_align, kmeans_align, prior_labels, reduce_dimensions


def spherical_blobs(seed=0, n_per=60, sep=8.0, sigma=0.5):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [sep, 0.0]])
    data = np.concatenate(
        [c + sigma * rng.standard_normal((n_per, 2)) for c in centers]
    )
    gold = np.repeat([0, 1], n_per)
    noisy = gold.copy()
    flip = rng.random(len(gold)) < 0.10
    noisy[flip] = 1 - noisy[flip]
    return data, gold, noisy


def test_prior_labels_nearest_by_cosine():
    reps = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    docs = np.array([[3.0, 0.1], [0.1, 5.0], [-0.2, -0.01]])
    np.testing.assert_array_equal(prior_labels(docs, reps), [0, 1, 2])


def test_prior_labels_tie_prefers_lower_class_id():
    reps = np.array([[1.0, 0.0], [0.0, 1.0]])
    docs = np.array([[1.0, 1.0]])
    np.testing.assert_array_equal(prior_labels(docs, reps), [0])


def test_prior_labels_zero_norm_goes_to_class_zero(caplog):
    reps = np.array([[0.0, 1.0], [1.0, 0.0]])
    docs = np.array([[0.0, 0.0], [1.0, 0.0]])
    with caplog.at_level(logging.WARNING):
        labels = prior_labels(docs, reps)
    np.testing.assert_array_equal(labels, [0, 1])
    assert "zero-norm" in caplog.text


def test_prior_labels_invariant_to_rep_scale():
    rng = np.random.default_rng(3)
    docs = rng.standard_normal((40, 6))
    reps = rng.standard_normal((4, 6))
    base = prior_labels(docs, reps)
    scaled = reps.copy()
    scaled[2] *= 2.0
    np.testing.assert_array_equal(prior_labels(docs, scaled), base)
    np.testing.assert_array_equal(prior_labels(docs * 2.0, reps), base)


def test_prior_labels_needs_two_classes():
    with pytest.raises(ValueError):
        prior_labels(np.ones((3, 2)), np.ones((1, 2)))


def test_reduce_recovers_low_rank_subspace():
    rng = np.random.default_rng(11)
    data = rng.standard_normal((50, 3)) @ rng.standard_normal((3, 12))
    reduced, basis, mean = reduce_dimensions(data, 3)
    assert reduced.shape == (50, 3)
    recon = reduced @ basis + mean
    assert np.max(np.abs(recon - data)) <= 1e-6


def test_full_dimension_projection_is_an_isometry():
    rng = np.random.default_rng(13)
    data = rng.standard_normal((30, 5))
    reduced, basis, _ = reduce_dimensions(data, 5)
    np.testing.assert_allclose(basis @ basis.T, np.eye(5), atol=1e-10)
    d_orig = np.linalg.norm(data[:, None] - data[None, :], axis=2)
    d_red = np.linalg.norm(reduced[:, None] - reduced[None, :], axis=2)
    np.testing.assert_allclose(d_red, d_orig, atol=1e-6)


def test_reduced_column_variances_match_eigenvalue_oracle():
    rng = np.random.default_rng(17)
    data = rng.standard_normal((200, 8)) * np.linspace(3.0, 0.2, 8)
    reduced, _, _ = reduce_dimensions(data, 5)
    eigvals = np.sort(np.linalg.eigvalsh(np.cov(data.T, ddof=1)))[::-1]
    col_var = reduced.var(axis=0, ddof=1)
    np.testing.assert_allclose(col_var, eigvals[:5], rtol=1e-6)
    assert np.all(np.diff(col_var) <= 1e-9)


def test_basis_sign_convention():
    rng = np.random.default_rng(19)
    data = rng.standard_normal((40, 6))
    _, basis, _ = reduce_dimensions(data, 4)
    for row in basis:
        assert row[np.argmax(np.abs(row))] > 0


def test_target_dim_clamped_with_warning(caplog):
    rng = np.random.default_rng(23)
    data = rng.standard_normal((10, 4))
    with caplog.at_level(logging.WARNING):
        reduced, _, _ = reduce_dimensions(data, 9)
    assert reduced.shape == (10, 4)
    assert "clamped" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING):
        reduced, _, _ = reduce_dimensions(data, 0)
    assert reduced.shape == (10, 4)
    assert "clamped" in caplog.text


def test_gmm_cleans_up_noisy_prior_on_spherical_blobs():
    data, gold, noisy = spherical_blobs()
    result = gmm_align(data, noisy, 2)
    assert np.mean(result.assignment == gold) == 1.0
    assert result.confidence.mean() > 0.99
    np.testing.assert_allclose(result.state.mixing_weights.sum(), 1.0, atol=1e-12)


def test_kmeans_agrees_on_spherical_blobs():
    data, gold, noisy = spherical_blobs()
    result = kmeans_align(data, noisy, 2)
    np.testing.assert_array_equal(result.assignment, gmm_align(data, noisy, 2).assignment)
    assert np.all(result.posterior.sum(axis=1) == 1.0)
    assert np.all((result.confidence > 0.0) & (result.confidence <= 1.0))


def test_single_cluster_posteriors_are_exactly_one():
    rng = np.random.default_rng(29)
    data = rng.standard_normal((25, 3))
    result = gmm_align(data, np.zeros(25, dtype=np.int64), 1)
    assert np.array_equal(result.posterior, np.ones((25, 1)))
    assert np.array_equal(result.confidence, np.ones(25))


def test_shared_covariance_separates_overlapping_stretched_blobs():
    data, gold, prior = anisotropic_blobs()
    prior_acc = np.mean(prior == gold)
    gmm_acc = np.mean(gmm_align(data, prior, 2).assignment == gold)
    km_acc = np.mean(kmeans_align(data, prior, 2).assignment == gold)
    assert gmm_acc > prior_acc
    assert gmm_acc > km_acc


def test_kmeans_zero_iterations_assigns_to_prior_means():
    data, _, prior = anisotropic_blobs()
    result = kmeans_align(data, prior, 2, max_iters=0)
    means = np.stack([data[prior == c].mean(axis=0) for c in range(2)])
    dists = np.linalg.norm(data[:, None, :] - means[None, :, :], axis=2)
    np.testing.assert_array_equal(result.assignment, np.argmin(dists, axis=1))


def test_kmeans_reseeds_empty_cluster(caplog):
    data = np.array([[0.0], [1.0], [10.0], [11.0]])
    prior = np.array([0, 2, 1, 2])
    with caplog.at_level(logging.WARNING):
        result = kmeans_align(data, prior, 3)
    assert "empty cluster" in caplog.text
    assert set(result.assignment) == {0, 1, 2}


def test_empty_prior_class_uses_fallback_mean(caplog):
    data, _, _ = spherical_blobs()
    prior = np.repeat([0, 1], 60)
    fallback = np.array([[0.0, 0.0], [8.0, 0.0], [4.0, 50.0]])
    with pytest.raises(ValueError):
        gmm_align(data, prior, 3)
    with caplog.at_level(logging.WARNING):
        result = gmm_align(data, prior, 3, fallback_means=fallback)
    assert "fallback mean" in caplog.text
    assert result.posterior.shape == (120, 3)
    np.testing.assert_allclose(result.state.mixing_weights.sum(), 1.0, atol=1e-12)


def test_em_invariants_across_random_initializations():
    rng = np.random.default_rng(101)
    for trial in range(20):
        k = int(rng.integers(2, 5))
        n, p = int(rng.integers(30, 90)), int(rng.integers(2, 6))
        data = rng.standard_normal((n, p))
        data[: n // 2] += 2.0
        prior = rng.integers(0, k, n)
        prior[:k] = np.arange(k)  # every class inhabited
        result = gmm_align(data, prior, k, max_iters=40, keep_history=True)
        diffs = np.diff(result.ll_history)
        assert diffs.min() >= -1e-8, f"trial {trial}: log-likelihood decreased"
        np.testing.assert_allclose(result.posterior.sum(axis=1), 1.0, atol=1e-6)
        for cov in result.covariance_history:
            np.testing.assert_allclose(cov, cov.T, atol=1e-12)
            assert np.linalg.eigvalsh(cov).min() > 0.0
        np.testing.assert_allclose(result.state.mixing_weights.sum(), 1.0, atol=1e-12)


def test_em_stops_before_iteration_cap_on_easy_data():
    data, _, noisy = spherical_blobs()
    result = gmm_align(data, noisy, 2, max_iters=100)
    assert len(result.ll_history) < 100
