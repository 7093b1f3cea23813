"""
Training and matching schemes for both classifiers.

Training runs once, offline: extract descriptors from every training image,
cluster them, then build the matching medium (weighted clusters for inter,
image signatures for intra). Matching classifies one query image against it.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from tqdm import tqdm

from classify import assign_weights, build_signature, classify_inter, classify_intra
from codebook import assign_many, kmeans
from config import Params
from errors import NoFeaturesError, ParameterError, TrainingError
from features import extract_keypoints, format_descriptor_dump
from imgio import load_image_and_mask, write_pgm
from model_io import TrainedModel

logger = logging.getLogger(__name__)


class Verdict(NamedTuple):
    label: str
    value: float          # inter: winning score, intra: signature distance
    detail: int           # inter: matched clusters, intra: Hamming distance
    scores: Optional[Tuple[float, ...]] = None


@dataclass
class TrainingSummary:
    mode: str
    images: Dict[str, int] = field(default_factory=dict)
    descriptors: Dict[str, int] = field(default_factory=dict)
    empty_images: int = 0
    inertia: float = 0.0
    iterations: int = 0
    tau: float = 0.0
    tau_source: str = "auto"


@dataclass
class DebugDumps:
    """Optional per-image debug output directories"""
    edges_dir: Optional[Path] = None
    descriptors_dir: Optional[Path] = None

    def write(self, image_path, keypoints, descriptors, edges):
        stem = Path(image_path).stem
        if self.edges_dir is not None and edges is not None:
            self.edges_dir.mkdir(parents=True, exist_ok=True)
            write_pgm(self.edges_dir / f"{stem}.edges.pgm", edges.to_pgm_pixels())
        if self.descriptors_dir is not None:
            self.descriptors_dir.mkdir(parents=True, exist_ok=True)
            (self.descriptors_dir / f"{stem}.desc.txt").write_text(
                format_descriptor_dump(keypoints, descriptors), encoding="utf-8")


def describe_image(image, mask, mode, params, image_path=None, dumps=None):
    keypoints, descriptors, edges = extract_keypoints(image, mask, mode, params)
    if dumps is not None and image_path is not None:
        dumps.write(image_path, keypoints, descriptors, edges)
    return descriptors


# ========== Training Scheme ==========

def auto_tau(descriptors, cb):
    """Median nearest-centroid distance of the training descriptors (smallest positive one if that is 0)"""
    _, distances = assign_many(descriptors, cb)
    tau = float(np.median(distances))
    if tau > 0:
        return tau
    positive = distances[distances > 0]
    if len(positive) == 0:
        raise TrainingError("every training descriptor sits on a centroid; pass --tau explicitly")
    return float(positive.min())


def train_model(train_set, mode, params=None, tau=None, progress=True, dumps=None):
    """Returns (TrainedModel, TrainingSummary)"""
    params = params or Params()
    if tau is not None and not tau > 0:
        raise ParameterError(f"--tau must be > 0, got {tau}")
    summary = TrainingSummary(mode=mode)

    per_class = {label: [] for label in train_set.classes}
    labelled = list(train_set.labelled_items())
    for label, item in tqdm(labelled, desc="Extracting features", unit="img", disable=not progress):
        image, mask = load_image_and_mask(item.image, item.mask)
        descriptors = describe_image(image, mask, mode, params, item.image, dumps)
        if len(descriptors) == 0:
            summary.empty_images += 1
            logger.warning("training image %s produced no descriptors", item.image)
        per_class[label].append(descriptors)

    for label in train_set.classes:
        summary.images[label] = len(per_class[label])
        summary.descriptors[label] = int(sum(len(d) for d in per_class[label]))

    stacks = [d for images in per_class.values() for d in images if len(d)]
    if not stacks:
        raise TrainingError("training images produced no descriptors at all")
    all_descriptors = np.concatenate(stacks)

    cb = kmeans(all_descriptors, params.k, seed=params.seed, max_iters=params.max_iters, tol=params.tol)
    summary.inertia = cb.inertia
    summary.iterations = cb.iterations

    if tau is None:
        tau = auto_tau(all_descriptors, cb)
        summary.tau_source = "auto"
    else:
        summary.tau_source = "flag"
    summary.tau = float(tau)

    if mode == "inter":
        model = TrainedModel(mode=mode, codebook=cb, tau=float(tau), classes=train_set.classes, params=params,
                             weight_table=assign_weights(cb, per_class, tau), tau_source=summary.tau_source)
    else:
        signatures = [build_signature(descriptors, cb, tau, label)
                      for label in train_set.classes for descriptors in per_class[label]]
        model = TrainedModel(mode=mode, codebook=cb, tau=float(tau), classes=train_set.classes, params=params,
                             signatures=signatures, tau_source=summary.tau_source)
    return model, summary


# ========== Matching Scheme ==========

def classify_descriptors(model, descriptors):
    if model.mode == "inter":
        result = classify_inter(descriptors, model.codebook, model.weight_table, model.tau)
        return Verdict(result.predicted, result.best_score, result.matched_clusters, result.scores)

    if len(descriptors) == 0:
        raise NoFeaturesError("query image produced no descriptors")
    match = classify_intra(build_signature(descriptors, model.codebook, model.tau), model.signatures)
    return Verdict(match.label, match.distance, match.hamming)


def classify_image(model, image, mask, image_path=None, dumps=None):
    descriptors = describe_image(image, mask, model.mode, model.params, image_path, dumps)
    return classify_descriptors(model, descriptors)


def classify_path(model, image_path, dumps=None):
    image, mask = load_image_and_mask(image_path)
    return classify_image(model, image, mask, image_path, dumps)
