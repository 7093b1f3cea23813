import numpy as np
import pytest
from numpy.testing import assert_allclose

import codebook
from codebook import Assignment, Codebook, _update_centroids, assign, assign_many, kmeans
from errors import DimensionMismatchError, ParameterError


def _blobs(rng, count=20, spread=0.01, separation=2.0, dim=128):
    first = rng.normal(size=dim)
    direction = rng.normal(size=dim)
    second = first + separation * direction / np.linalg.norm(direction)
    blob_a = first + rng.uniform(-spread, spread, size=(count, dim)) / np.sqrt(dim)
    blob_b = second + rng.uniform(-spread, spread, size=(count, dim)) / np.sqrt(dim)
    return np.vstack([blob_a, blob_b]), blob_a.mean(axis=0), blob_b.mean(axis=0)


def _manual_codebook(centroids):
    centroids = np.asarray(centroids, dtype=np.float64)
    return Codebook(k=len(centroids), dim=centroids.shape[1], centroids=centroids, seed=0, inertia=0.0)


# ========== kmeans ==========

def test_k_equal_to_point_count_is_exact(rng):
    points = rng.normal(size=(12, 128))
    cb = kmeans(points, 12, seed=4)
    assert cb.inertia == pytest.approx(0.0, abs=1e-18)
    assert {row.tobytes() for row in cb.centroids} == {row.tobytes() for row in points}


def test_two_blobs_recover_means(rng):
    points, mean_a, mean_b = _blobs(rng)
    cb = kmeans(points, 2, seed=0)
    first, second = sorted(cb.centroids, key=lambda c: np.linalg.norm(c - mean_a))
    assert np.linalg.norm(first - mean_a) < 0.02
    assert np.linalg.norm(second - mean_b) < 0.02


def test_same_seed_same_codebook(rng):
    points = rng.normal(size=(300, 128))
    first = kmeans(points, 10, seed=7)
    second = kmeans(points.copy(), 10, seed=7)
    assert first == second
    assert first.centroids.tobytes() == second.centroids.tobytes()


def test_different_seed_changes_centroids(rng):
    points = rng.normal(size=(300, 16))
    assert not np.array_equal(kmeans(points, 10, seed=1).centroids, kmeans(points, 10, seed=2).centroids)


def test_inertia_never_increases(rng):
    points = rng.normal(size=(400, 32))
    history = kmeans(points, 12, seed=0).inertia_history
    assert len(history) >= 2
    for before, after in zip(history, history[1:]):
        assert after <= before * (1 + 1e-9)


def test_every_centroid_is_mean_of_its_members(rng):
    points = rng.normal(size=(200, 8))
    cb = kmeans(points, 5, seed=3, tol=0.0)
    labels, _ = assign_many(points, cb)
    for cluster in range(cb.k):
        members = points[labels == cluster]
        assert len(members) > 0
        assert_allclose(cb.centroids[cluster], members.mean(axis=0), atol=1e-9)


def test_max_iters_bounds_work(rng):
    cb = kmeans(rng.normal(size=(200, 8)), 6, seed=0, max_iters=1)
    assert cb.iterations == 1
    assert len(cb.inertia_history) == 2


@pytest.mark.parametrize("kwargs", [{"k": 0}, {"k": 4, "max_iters": 0}, {"k": 4, "tol": -1.0}])
def test_kmeans_rejects_bad_parameters(rng, kwargs):
    with pytest.raises(ParameterError):
        kmeans(rng.normal(size=(20, 4)), **kwargs)


def test_kmeans_rejects_empty_input():
    with pytest.raises(ParameterError):
        kmeans(np.zeros((0, 128)), 2)


def test_kmeans_rejects_k_above_distinct_points():
    points = np.vstack([np.zeros((5, 4)), np.ones((5, 4))])
    with pytest.raises(ParameterError, match="distinct"):
        kmeans(points, 3)


def test_empty_cluster_moves_to_farthest_point():
    points = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0]])
    centroids = np.array([[0.0, 0.0], [100.0, 100.0]])
    labels = np.array([0, 0, 0])
    sq_distances = np.array([0.0, 0.01, 25.0])
    updated = _update_centroids(points, labels, sq_distances, centroids)
    assert_allclose(updated[0], [5.1 / 3, 0.0])
    assert_allclose(updated[1], [5.0, 0.0])


# ========== assign ==========

def test_assign_exact_centroid(rng):
    cb = _manual_codebook(rng.normal(size=(10, 128)))
    assert assign(cb.centroids[7], cb) == Assignment(7, 0.0)


def test_assign_tie_goes_to_lowest_index():
    centroids = np.full((6, 3), 10.0) + np.arange(6)[:, None]
    centroids[2] = [1.0, 0.0, 0.0]
    centroids[5] = [-1.0, 0.0, 0.0]
    result = assign(np.zeros(3), _manual_codebook(centroids))
    assert result == Assignment(2, 1.0)


def test_assign_matches_brute_force(rng):
    cb = _manual_codebook(rng.normal(size=(400, 128)))
    for _ in range(20):
        d = rng.normal(size=128)
        distances = [np.sqrt(((d - c) ** 2).sum()) for c in cb.centroids]
        expected = int(np.argmin(distances))
        result = assign(d, cb)
        assert result.cluster == expected
        assert result.distance == pytest.approx(distances[expected])


def test_assign_many_is_chunk_independent(rng, monkeypatch):
    cb = _manual_codebook(rng.normal(size=(30, 16)))
    points = rng.normal(size=(50, 16))
    labels, distances = assign_many(points, cb)
    monkeypatch.setattr(codebook, "ASSIGN_CHUNK", 7)
    chunked_labels, chunked_distances = assign_many(points, cb)
    assert np.array_equal(labels, chunked_labels)
    assert_allclose(distances, chunked_distances)


def test_assign_dimension_mismatch(rng):
    cb = _manual_codebook(rng.normal(size=(4, 128)))
    with pytest.raises(DimensionMismatchError):
        assign(np.zeros(64), cb)


def test_codebook_validates_shape():
    with pytest.raises(DimensionMismatchError):
        Codebook(k=3, dim=4, centroids=np.zeros((2, 4)), seed=0, inertia=0.0)


def test_assign_agrees_with_exhaustive_search_on_many_queries(rng):
    cb = _manual_codebook(rng.normal(size=(64, 16)))
    queries = rng.normal(size=(1000, 16))
    labels, _ = assign_many(queries, cb)
    exhaustive = np.argmin(((queries[:, None, :] - cb.centroids[None, :, :]) ** 2).sum(axis=2), axis=1)
    assert np.array_equal(labels, exhaustive)


@pytest.mark.parametrize("seed", range(20))
def test_inertia_monotone_for_seeded_runs(seed):
    points = np.random.default_rng(seed).normal(size=(150, 8))
    history = kmeans(points, 7, seed=seed).inertia_history
    assert all(after <= before * (1 + 1e-9) for before, after in zip(history, history[1:]))
