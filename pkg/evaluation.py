"""
Dataset handling, train/eval split and confusion-matrix reporting.

Dataset layout: one sub-directory per class under a root, each holding
PGM/PPM images with optional `<stem>.mask.pgm` masks next to them.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional

import numpy as np
from tqdm import tqdm

from config import IMAGE_SUFFIXES, PROTOCOLS
from errors import DatasetError, DimensionMismatchError, ImageFormatError, VehicleClassifierError, failure_reason
from imgio import is_mask_file, load_image_and_mask, mask_path_for
from pipeline import classify_image

logger = logging.getLogger(__name__)


class DatasetItem(NamedTuple):
    image: Path
    mask: Optional[Path]


@dataclass
class Dataset:
    classes: tuple
    items: Dict[str, List[DatasetItem]]

    def __post_init__(self):
        self.classes = tuple(self.classes)
        if len(set(self.classes)) != len(self.classes):
            raise DatasetError(f"class labels must be unique: {self.classes}")

    def __len__(self):
        return sum(len(self.items[label]) for label in self.classes)

    def counts(self):
        return [len(self.items[label]) for label in self.classes]

    def labelled_items(self):
        """(label, item) pairs in class order, then file order"""
        for label in self.classes:
            for item in self.items[label]:
                yield label, item


class Split(NamedTuple):
    train: Dataset
    eval: Dataset
    protocol: str


# ========== Loading ==========

def _is_image(path):
    return path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES and not is_mask_file(path)


def _check_readable(item):
    try:
        load_image_and_mask(item.image, item.mask)
    except (ImageFormatError, DimensionMismatchError) as e:
        raise DatasetError(f"unreadable file in dataset: {e}") from e


def load_dataset(root):
    """Every image and its mask are read once; an unreadable file is a DatasetError naming it"""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")

    class_dirs = sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name)
    if not class_dirs:
        raise DatasetError(f"dataset root {root} has no class sub-directories")

    items = {}
    for class_dir in class_dirs:
        images = sorted((p for p in class_dir.iterdir() if _is_image(p)), key=lambda p: p.name)
        if not images:
            raise DatasetError(f"class {class_dir.name!r} has no PGM/PPM images in {class_dir}")
        entries = []
        for image in images:
            mask = mask_path_for(image)
            item = DatasetItem(image, mask if mask.is_file() else None)
            _check_readable(item)
            entries.append(item)
        items[class_dir.name] = entries

    dataset = Dataset(classes=tuple(items), items=items)
    logger.debug("loaded dataset %s: %s", root, dict(zip(dataset.classes, dataset.counts())))
    return dataset


# ========== Split ==========

def split(ds, n_train, seed, protocol="whole"):
    """
    Seeded sample of n_train images per class for training. `whole` evaluates
    on every image (training images included), `holdout` only on the rest.
    """
    if protocol not in PROTOCOLS:
        raise DatasetError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if n_train < 1:
        raise DatasetError(f"need at least one training image per class, got {n_train}")
    smallest = min(ds.counts())
    if n_train > smallest:
        raise DatasetError(f"--train-per-class {n_train} exceeds the smallest class size ({smallest})")

    rng = np.random.default_rng(seed)
    train_items, eval_items = {}, {}
    for label in ds.classes:
        items = ds.items[label]
        chosen = set(int(i) for i in rng.choice(len(items), size=n_train, replace=False))
        train_items[label] = [item for i, item in enumerate(items) if i in chosen]
        if protocol == "whole":
            eval_items[label] = list(items)
        else:
            eval_items[label] = [item for i, item in enumerate(items) if i not in chosen]

    eval_set = Dataset(ds.classes, eval_items)
    if len(eval_set) == 0:
        raise DatasetError("holdout protocol left no images to evaluate; lower --train-per-class")
    return Split(Dataset(ds.classes, train_items), eval_set, protocol)


# ========== Confusion Matrix ==========

@dataclass
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray            # rows = true class, columns = predicted class
    failed: np.ndarray            # per true class: items that got no class
    protocol: str = "whole"
    failure_reasons: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def empty(cls, classes, protocol="whole"):
        size = len(classes)
        return cls(tuple(classes), np.zeros((size, size), dtype=np.int64), np.zeros(size, dtype=np.int64), protocol)

    @property
    def total(self):
        return int(self.counts.sum() + self.failed.sum())

    @property
    def rates(self):
        """Row-normalized percentages over classified items; empty rows stay 0"""
        rows = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts * 100.0, rows, out=np.zeros(self.counts.shape), where=rows > 0)

    def accuracy(self, label):
        row = self.classes.index(label)
        classified = int(self.counts[row].sum())
        return 100.0 * self.counts[row, row] / classified if classified else 0.0

    @property
    def overall_accuracy(self):
        classified = int(self.counts.sum())
        return 100.0 * np.trace(self.counts) / classified if classified else 0.0

    def __eq__(self, other):
        return (isinstance(other, ConfusionMatrix) and self.classes == other.classes
                and self.protocol == other.protocol and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.failed, other.failed))


def evaluate(model, eval_set, progress=True):
    """Classify every eval item; per-item failures are tallied, never raised"""
    unknown = set(model.classes) - set(eval_set.classes)
    if unknown:
        raise DatasetError(f"model classes {sorted(unknown)} are not in the evaluation dataset")

    matrix = ConfusionMatrix.empty(eval_set.classes)
    labelled = list(eval_set.labelled_items())
    for label, item in tqdm(labelled, desc="Evaluating", unit="img", disable=not progress):
        row = eval_set.classes.index(label)
        try:
            image, mask = load_image_and_mask(item.image, item.mask)
            verdict = classify_image(model, image, mask)
        except VehicleClassifierError as e:
            matrix.failed[row] += 1
            reason = failure_reason(e)
            matrix.failure_reasons[reason] = matrix.failure_reasons.get(reason, 0) + 1
            logger.debug("%s: %s", item.image, e)
            continue
        matrix.counts[row, eval_set.classes.index(verdict.label)] += 1
    return matrix


# ========== Reports ==========

def format_report(matrix, title="CONFUSION MATRIX", seed=None):
    width = max(9, max(len(label) for label in matrix.classes) + 2)
    first = max(width, len("true \\ pred") + 1)
    lines = [f"#protocol={matrix.protocol}"]
    if seed is not None:
        lines.append(f"#seed={seed}")
    lines.append(f"📊 {title} (rows = true class, columns = predicted, % of classified items)")
    lines.append("=" * 60)
    header = "true \\ pred".ljust(first) + "".join(label.rjust(width) for label in matrix.classes)
    lines.append(header + "failed".rjust(width) + "n".rjust(width))
    rates = matrix.rates
    for row, label in enumerate(matrix.classes):
        cells = "".join(f"{rates[row, col]:.2f}%".rjust(width) for col in range(len(matrix.classes)))
        total = int(matrix.counts[row].sum() + matrix.failed[row])
        lines.append(label.ljust(first) + cells + str(int(matrix.failed[row])).rjust(width) + str(total).rjust(width))
    lines.append("-" * 60)
    for label in matrix.classes:
        lines.append(f"🎯 {label} accuracy: {matrix.accuracy(label):.2f}%")
    lines.append(f"🎯 Overall accuracy: {matrix.overall_accuracy:.2f}%")
    lines.append(f"❌ Failed items: {int(matrix.failed.sum())} of {matrix.total}")
    for reason, count in sorted(matrix.failure_reasons.items()):
        lines.append(f"   • {reason}: {count}")
    return "\n".join(lines) + "\n"


def write_csv(matrix, path):
    """`#protocol=` line, then true_class,pred_class,count rows (FAILED as a pseudo-class)"""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as csvfile:
        csvfile.write(f"#protocol={matrix.protocol}\n")
        writer = csv.DictWriter(csvfile, fieldnames=["true_class", "pred_class", "count"], lineterminator="\n")
        writer.writeheader()
        for row, true_label in enumerate(matrix.classes):
            for col, pred_label in enumerate(matrix.classes):
                writer.writerow({"true_class": true_label, "pred_class": pred_label,
                                 "count": int(matrix.counts[row, col])})
            writer.writerow({"true_class": true_label, "pred_class": "FAILED", "count": int(matrix.failed[row])})
    return path
