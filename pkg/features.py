"""
Keypoint anchoring and the fixed-pose SIFT descriptor.

Keypoints are not detected in scale space: inter-class extraction anchors
one keypoint on every Canny edge pixel, intra-class extraction anchors them
densely on the segmented vehicle region. Every descriptor uses the same
16x16 window and no orientation normalization.
"""
import logging
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from config import (BORDER_MARGIN, CELL_SIZE, DESCRIPTOR_CLAMP, DESCRIPTOR_DIM,
                    DESCRIPTOR_WEIGHT_SIGMA, ORIENTATION_BINS, PATCH_SIZE, Params)
from edge import canny_from_gradients, gaussian_blur, sobel_gradients
from errors import DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)

MODES = ("inter", "intra")
_CELLS_PER_SIDE = PATCH_SIZE // CELL_SIZE


class Keypoint(NamedTuple):
    x: int
    y: int


def _inside_margin(width, height):
    """Boolean raster of pixels whose 16x16 window fits inside the image"""
    inside = np.zeros((height, width), dtype=bool)
    if width > 2 * BORDER_MARGIN and height > 2 * BORDER_MARGIN:
        inside[BORDER_MARGIN:height - BORDER_MARGIN, BORDER_MARGIN:width - BORDER_MARGIN] = True
    return inside


def _to_keypoints(selected):
    ys, xs = np.nonzero(selected)  # row-major
    return [Keypoint(int(x), int(y)) for y, x in zip(ys, xs)]


# ========== Anchors ==========

def edge_anchors(edges, mask, image_dims=None):
    """Every edge pixel on the foreground that clears the border margin"""
    if image_dims is not None:
        width, height = image_dims
    else:
        height, width = mask.pixels.shape
    if edges.pixels.shape != (height, width) or mask.pixels.shape != (height, width):
        raise DimensionMismatchError(
            f"edge map {edges.pixels.shape[::-1]} and mask {mask.pixels.shape[::-1]} "
            f"must both be {width}x{height}"
        )
    return _to_keypoints(edges.pixels & mask.pixels & _inside_margin(width, height))


def dense_anchors(mask, stride):
    """Foreground pixels on a stride grid; stride 1 uses every vehicle pixel"""
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    height, width = mask.pixels.shape
    grid = np.zeros((height, width), dtype=bool)
    grid[::stride, ::stride] = True
    return _to_keypoints(mask.pixels & grid & _inside_margin(width, height))


# ========== Descriptor ==========

def _spatial_weights():
    offsets = np.arange(-BORDER_MARGIN, PATCH_SIZE - BORDER_MARGIN, dtype=np.float64)
    dy, dx = np.meshgrid(offsets, offsets, indexing="ij")
    return np.exp(-(dx * dx + dy * dy) / (2.0 * DESCRIPTOR_WEIGHT_SIGMA ** 2))


def _cell_index():
    rows = np.arange(PATCH_SIZE) // CELL_SIZE
    return (rows[:, None] * _CELLS_PER_SIDE + rows[None, :]) * ORIENTATION_BINS


_WINDOW_WEIGHTS = _spatial_weights()
_WINDOW_CELLS = _cell_index()


def _check_window(gradients, kp):
    x, y = kp
    if not (BORDER_MARGIN <= x < gradients.width - BORDER_MARGIN
            and BORDER_MARGIN <= y < gradients.height - BORDER_MARGIN):
        raise ParameterError(
            f"keypoint ({x}, {y}) is closer than {BORDER_MARGIN}px to the border "
            f"of a {gradients.width}x{gradients.height} image"
        )


def describe_many(gradients, keypoints):
    """
    Descriptors for many keypoints at once.

    Returns (kept, descriptors): the indices of keypoints that produced a
    descriptor and the (n, 128) array. Windows with no gradient are dropped.
    """
    count = len(keypoints)
    if count == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, DESCRIPTOR_DIM))
    for kp in keypoints:
        _check_window(gradients, kp)

    xs = np.fromiter((kp[0] for kp in keypoints), dtype=np.int64, count=count) - BORDER_MARGIN
    ys = np.fromiter((kp[1] for kp in keypoints), dtype=np.int64, count=count) - BORDER_MARGIN

    # orientation bin position in [0, 8); votes split between the two nearest bins
    position = (gradients.orientation % (2 * np.pi)) * (ORIENTATION_BINS / (2 * np.pi))
    lower = np.floor(position)
    fraction = position - lower
    lower_bin = lower.astype(np.int64) % ORIENTATION_BINS
    upper_bin = (lower_bin + 1) % ORIENTATION_BINS

    def windows(values):
        return sliding_window_view(values, (PATCH_SIZE, PATCH_SIZE))[ys, xs].reshape(count, -1)

    votes = windows(gradients.magnitude) * _WINDOW_WEIGHTS.reshape(1, -1)
    window_fraction = windows(fraction)
    base = (np.arange(count, dtype=np.int64) * DESCRIPTOR_DIM)[:, None] + _WINDOW_CELLS.reshape(1, -1)

    index = np.concatenate([(base + windows(lower_bin)).ravel(), (base + windows(upper_bin)).ravel()])
    weight = np.concatenate([(votes * (1.0 - window_fraction)).ravel(), (votes * window_fraction).ravel()])
    histograms = np.bincount(index, weights=weight, minlength=count * DESCRIPTOR_DIM)
    histograms = histograms.reshape(count, DESCRIPTOR_DIM)

    norms = np.linalg.norm(histograms, axis=1)
    kept = np.flatnonzero(norms > 0)
    descriptors = histograms[kept] / norms[kept, None]
    descriptors = np.minimum(descriptors, DESCRIPTOR_CLAMP)
    descriptors /= np.linalg.norm(descriptors, axis=1, keepdims=True)
    return kept, descriptors


def describe(gradients, kp):
    """128-D descriptor at `kp`, or None when the window has no gradient"""
    kept, descriptors = describe_many(gradients, [kp])
    return descriptors[0] if len(kept) else None


# ========== Extraction ==========

def extract_keypoints(image, mask, mode, params=None):
    """Run anchoring + description; returns (keypoints, (n, 128) descriptors, edge map or None)"""
    params = params or Params()
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if mask.pixels.shape != image.pixels.shape:
        raise DimensionMismatchError(f"mask {mask!r} does not match image {image!r}")
    if image.width <= 2 * BORDER_MARGIN or image.height <= 2 * BORDER_MARGIN:
        logger.debug("%r is too small for a %dpx window", image, PATCH_SIZE)
        return [], np.zeros((0, DESCRIPTOR_DIM)), None

    gradients = sobel_gradients(gaussian_blur(image, params.sigma))
    edges = None
    if mode == "inter":
        edges = canny_from_gradients(gradients, params.canny_low, params.canny_high)
        anchors = edge_anchors(edges, mask, (image.width, image.height))
    else:
        anchors = dense_anchors(mask, params.stride)

    kept, descriptors = describe_many(gradients, anchors)
    keypoints = [anchors[i] for i in kept]
    logger.debug("%s extraction: %d anchors, %d descriptors", mode, len(anchors), len(keypoints))
    return keypoints, descriptors, edges


def extract(image, mask, mode, params=None):
    """Descriptors of one image in anchor (row-major) order"""
    _, descriptors, _ = extract_keypoints(image, mask, mode, params)
    return descriptors


def format_descriptor_dump(keypoints, descriptors):
    """`x y v0 ... v127` per line, floats in shortest round-trip form"""
    lines = []
    for kp, row in zip(keypoints, descriptors):
        lines.append(" ".join([str(kp.x), str(kp.y)] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + ("\n" if lines else "")
