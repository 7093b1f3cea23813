"""
Matching media and classifiers.

Inter-class: every codebook cluster gets a per-class weight (the share of a
class's training images it matches) and a query is scored by summing the
weights of the clusters it matches.

Intra-class: every image becomes a K-bit signature of which clusters it
matches, and a query takes the label of the nearest training signature.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import cdist

from config import ASSIGN_CHUNK
from errors import (DatasetError, DimensionMismatchError, NoFeaturesError,
                    ParameterError, UnmatchedQueryError)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class WeightTable:
    k: int
    classes: tuple
    weights: np.ndarray  # k x C, weights[j][c] = m / n

    def __post_init__(self):
        self.classes = tuple(self.classes)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.k, len(self.classes)):
            raise DimensionMismatchError(
                f"weight table declares {self.k}x{len(self.classes)} but holds {self.weights.shape}"
            )
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ParameterError("weights must be finite and non-negative")

    def __eq__(self, other):
        return (isinstance(other, WeightTable) and self.k == other.k and self.classes == other.classes
                and np.array_equal(self.weights, other.weights))


@dataclass(eq=False)
class Signature:
    bits: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool).ravel()

    def __len__(self):
        return len(self.bits)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.label == other.label and np.array_equal(self.bits, other.bits)

    def to_text(self):
        return "".join("1" if bit else "0" for bit in self.bits)

    @classmethod
    def from_text(cls, text, label=None):
        if set(text) - {"0", "1"}:
            raise ValueError(f"signature must contain only 0/1, got {text[:20]!r}...")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) == ord("1"), label)


@dataclass
class ClassScore:
    classes: tuple
    scores: tuple
    predicted: str
    matched_clusters: int

    @property
    def best_score(self):
        return self.scores[self.classes.index(self.predicted)]


class IntraMatch(NamedTuple):
    label: str
    distance: float

    @property
    def hamming(self):
        return int(round(self.distance * self.distance))


# ========== Cluster Matching ==========

def _check_tau(tau):
    if math.isnan(tau) or tau < 0:
        raise ParameterError(f"match threshold tau must be >= 0, got {tau}")


def _descriptor_matrix(descriptors, dim):
    matrix = np.asarray(descriptors, dtype=np.float64)
    if matrix.size == 0:
        return matrix.reshape(0, dim)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.shape[1] != dim:
        raise DimensionMismatchError(f"descriptor dimension {matrix.shape[1]} != centroid dimension {dim}")
    return matrix


def nearest_descriptor_distances(centroids, descriptors):
    """For each centroid, the distance to its closest descriptor (inf when there are none)"""
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    descriptors = _descriptor_matrix(descriptors, centroids.shape[1])
    closest = np.full(len(centroids), np.inf)
    for start in range(0, len(descriptors), ASSIGN_CHUNK):
        block = cdist(centroids, descriptors[start:start + ASSIGN_CHUNK])
        closest = np.minimum(closest, block.min(axis=1))
    return closest


def cluster_match_vector(centroids, descriptors, tau):
    """Which clusters match an image: some descriptor within tau of the centroid"""
    _check_tau(tau)
    return nearest_descriptor_distances(centroids, descriptors) <= tau


def cluster_matches_image(centroid, image_descriptors, tau):
    return bool(cluster_match_vector(np.asarray(centroid, dtype=np.float64).reshape(1, -1),
                                     image_descriptors, tau)[0])


# ========== Inter-class: Weightage ==========

def assign_weights(cb, training, tau):
    """
    training maps class label -> list of per-image descriptor arrays.
    weights[j][c] = (images of class c matched by cluster j) / (images of class c).
    """
    classes = tuple(training)
    if not classes:
        raise DatasetError("weight assignment needs at least one class")
    weights = np.zeros((cb.k, len(classes)))
    for column, label in enumerate(classes):
        images = training[label]
        if len(images) == 0:
            raise DatasetError(f"class {label!r} has no training images")
        matched = np.zeros(cb.k, dtype=np.int64)
        for descriptors in images:
            matched += cluster_match_vector(cb.centroids, descriptors, tau)
        weights[:, column] = matched / len(images)
        logger.debug("class %s: %d images, %d clusters matched at least once",
                     label, len(images), int(np.count_nonzero(matched)))
    return WeightTable(k=cb.k, classes=classes, weights=weights)


def classify_inter(query, cb, wt, tau):
    """Sum the class weights of every cluster the query matches; argmax wins, ties to class order"""
    if wt.k != cb.k:
        raise DimensionMismatchError(f"weight table has {wt.k} clusters, codebook has {cb.k}")
    descriptors = _descriptor_matrix(query, cb.dim)
    if len(descriptors) == 0:
        raise NoFeaturesError("query image produced no descriptors")

    matches = cluster_match_vector(cb.centroids, descriptors, tau)
    matched = int(matches.sum())
    if matched == 0:
        raise UnmatchedQueryError(f"none of the {cb.k} clusters matched the query (tau={tau})")

    scores = wt.weights[matches].sum(axis=0)
    best = int(np.argmax(scores))
    return ClassScore(classes=wt.classes, scores=tuple(float(s) for s in scores),
                      predicted=wt.classes[best], matched_clusters=matched)


# ========== Intra-class: Signatures ==========

def build_signature(image_descriptors, cb, tau, label=None):
    return Signature(cluster_match_vector(cb.centroids, image_descriptors, tau), label)


def signature_distance(a, b):
    if len(a) != len(b):
        raise DimensionMismatchError(f"signature lengths differ: {len(a)} vs {len(b)}")
    return math.sqrt(int(np.count_nonzero(a.bits != b.bits)))


def classify_intra(query_sig, training_sigs):
    """Label of the nearest training signature; earliest index wins ties"""
    if len(training_sigs) == 0:
        raise DatasetError("no training signatures to match against")
    length = len(query_sig)
    for sig in training_sigs:
        if len(sig) != length:
            raise DimensionMismatchError(f"signature lengths differ: {len(sig)} vs {length}")

    stacked = np.stack([sig.bits for sig in training_sigs])
    hamming = np.count_nonzero(stacked != query_sig.bits[None, :], axis=1)
    best = int(np.argmin(hamming))
    return IntraMatch(training_sigs[best].label, math.sqrt(int(hamming[best])))
