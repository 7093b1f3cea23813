"""
K-means codebook over descriptors and Euclidean nearest-centroid assignment.

Initialization is k-means++ drawn from a seeded numpy Generator, so a
codebook is a pure function of (descriptors, k, seed, max_iters, tol).
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from config import ASSIGN_CHUNK, KMEANS_MAX_ITERS, KMEANS_TOL, SEED
from errors import DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Codebook:
    k: int
    dim: int
    centroids: np.ndarray
    seed: int
    inertia: float
    iterations: int = field(default=0, compare=False)
    inertia_history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.shape != (self.k, self.dim):
            raise DimensionMismatchError(
                f"codebook declares {self.k}x{self.dim} but centroids are {self.centroids.shape}"
            )
        if not np.all(np.isfinite(self.centroids)):
            raise ParameterError("codebook centroids must be finite")

    def __eq__(self, other):
        return (isinstance(other, Codebook)
                and (self.k, self.dim, self.seed) == (other.k, other.dim, other.seed)
                and np.array_equal(self.centroids, other.centroids))


class Assignment(NamedTuple):
    cluster: int
    distance: float


def _as_matrix(descriptors, dim=None):
    matrix = np.asarray(descriptors, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"descriptors must form a 2-D array, got shape {matrix.shape}")
    if dim is not None and matrix.shape[0] and matrix.shape[1] != dim:
        raise DimensionMismatchError(f"descriptor dimension {matrix.shape[1]} != codebook dimension {dim}")
    return matrix


def nearest_centroids(points, centroids, metric="euclidean"):
    """
    Brute-force nearest centroid for every row of `points`, in fixed-size
    blocks. Returns (labels, distances); ties go to the lowest index.
    """
    labels = np.empty(len(points), dtype=np.int64)
    distances = np.empty(len(points), dtype=np.float64)
    for start in range(0, len(points), ASSIGN_CHUNK):
        block = cdist(points[start:start + ASSIGN_CHUNK], centroids, metric)
        block_labels = np.argmin(block, axis=1)
        labels[start:start + ASSIGN_CHUNK] = block_labels
        distances[start:start + ASSIGN_CHUNK] = block[np.arange(len(block)), block_labels]
    return labels, distances


# ========== Training ==========

def _kmeans_plusplus(points, k, rng):
    n = len(points)
    chosen = [int(rng.integers(n))]
    closest = cdist(points, points[chosen[0]][None, :], "sqeuclidean").ravel()
    for _ in range(1, k):
        probabilities = closest / closest.sum()
        index = int(rng.choice(n, p=probabilities))
        chosen.append(index)
        closest = np.minimum(closest, cdist(points, points[index][None, :], "sqeuclidean").ravel())
    return points[chosen].copy()


def _update_centroids(points, labels, sq_distances, centroids):
    """Cluster means; empty clusters move to the points farthest from their centroid"""
    k = len(centroids)
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    counts = np.bincount(labels, minlength=k)
    starts = np.searchsorted(sorted_labels, np.arange(k))

    updated = centroids.copy()
    occupied = np.flatnonzero(counts)
    sums = np.add.reduceat(points[order], starts[occupied], axis=0)
    updated[occupied] = sums / counts[occupied, None]

    empty = np.flatnonzero(counts == 0)
    if len(empty):
        taken = set()
        candidates = iter(np.argsort(-sq_distances, kind="stable"))
        for cluster in empty:
            for index in candidates:
                key = points[index].tobytes()
                if key not in taken:
                    taken.add(key)
                    updated[cluster] = points[index]
                    break
        logger.debug("re-seeded %d empty clusters", len(empty))
    return updated


def kmeans(descriptors, k, seed=SEED, max_iters=KMEANS_MAX_ITERS, tol=KMEANS_TOL):
    """Lloyd's algorithm with k-means++ seeding; stops when no centroid moves by tol or more"""
    points = _as_matrix(descriptors)
    if len(points) == 0:
        raise ParameterError("cannot cluster an empty descriptor set")
    if k < 1:
        raise ParameterError(f"k must be positive, got {k}")
    if max_iters < 1:
        raise ParameterError(f"max_iters must be positive, got {max_iters}")
    if tol < 0:
        raise ParameterError(f"tol must be >= 0, got {tol}")
    distinct = len(np.unique(points, axis=0))
    if k > distinct:
        raise ParameterError(f"k={k} exceeds the number of distinct descriptors ({distinct})")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plusplus(points, k, rng)
    history = []
    iterations = 0
    for iterations in range(1, max_iters + 1):
        labels, distances = nearest_centroids(points, centroids, "sqeuclidean")
        history.append(float(distances.sum()))
        updated = _update_centroids(points, labels, distances, centroids)
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift < tol:
            break

    _, distances = nearest_centroids(points, centroids, "sqeuclidean")
    inertia = float(distances.sum())
    history.append(inertia)
    logger.debug("kmeans k=%d: %d iterations, inertia %.6f", k, iterations, inertia)
    return Codebook(k=k, dim=points.shape[1], centroids=centroids, seed=seed, inertia=inertia,
                    iterations=iterations, inertia_history=tuple(history))


# ========== Assignment ==========

def assign(d, cb):
    """Nearest centroid to one descriptor; lowest index wins exact ties"""
    vector = _as_matrix(d, cb.dim)
    if vector.shape[0] != 1:
        raise DimensionMismatchError(f"assign takes a single descriptor, got {vector.shape[0]}")
    labels, distances = nearest_centroids(vector, cb.centroids)
    return Assignment(int(labels[0]), float(distances[0]))


def assign_many(descriptors, cb):
    return nearest_centroids(_as_matrix(descriptors, cb.dim), cb.centroids)
