"""
Canny edge detection: Gaussian blur, Sobel gradients, non-maximum
suppression and hysteresis. Edge pixels anchor the inter-class keypoints.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from config import CANNY_HIGH_RATIO, CANNY_LOW_RATIO, SIGMA
from errors import ParameterError
from imgio import GrayImage

logger = logging.getLogger(__name__)

SOBEL_X = np.array([[-1, 0, 1],
                    [-2, 0, 2],
                    [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T

# (dx, dy) step along the quantized gradient direction; image y grows downwards
_DIRECTION_STEPS = {
    0: (1, 0),     # 0 degrees
    1: (1, 1),     # 45
    2: (0, 1),     # 90
    3: (-1, 1),    # 135
}
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    orientation: np.ndarray  # radians, atan2(gy, gx)

    @property
    def width(self):
        return self.magnitude.shape[1]

    @property
    def height(self):
        return self.magnitude.shape[0]


@dataclass(frozen=True, eq=False)
class EdgeMap:
    pixels: np.ndarray  # bool, True = edge

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def count(self):
        return int(self.pixels.sum())

    def __eq__(self, other):
        return isinstance(other, EdgeMap) and np.array_equal(self.pixels, other.pixels)

    def to_pgm_pixels(self):
        """255 for edge, 0 elsewhere; for debug dumps"""
        return np.where(self.pixels, 255, 0).astype(np.uint8)


def _as_float_raster(image):
    if isinstance(image, GrayImage):
        return image.pixels.astype(np.float64)
    raster = np.asarray(image, dtype=np.float64)
    if raster.ndim != 2:
        raise ParameterError(f"expected a 2-D raster, got shape {raster.shape}")
    return raster


def gaussian_kernel(sigma):
    """Normalized 1-D Gaussian of radius ceil(3 sigma)"""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(image, sigma):
    """Separable Gaussian smoothing with clamp-to-edge borders; returns float64"""
    kernel = gaussian_kernel(sigma)
    raster = _as_float_raster(image)
    smoothed = ndimage.correlate1d(raster, kernel, axis=1, mode="nearest")
    return ndimage.correlate1d(smoothed, kernel, axis=0, mode="nearest")


def sobel_gradients(image):
    raster = _as_float_raster(image)
    if raster.shape[0] < 3 or raster.shape[1] < 3:
        raise ParameterError(f"Sobel needs at least 3x3 pixels, got {raster.shape[1]}x{raster.shape[0]}")
    gx = ndimage.correlate(raster, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(raster, SOBEL_Y, mode="nearest")
    magnitude = np.sqrt(gx * gx + gy * gy)
    orientation = np.arctan2(gy, gx)
    return GradientField(gx=gx, gy=gy, magnitude=magnitude, orientation=orientation)


def quantize_directions(orientation):
    """Map gradient angles to bins 0..3 (0, 45, 90, 135 degrees)"""
    degrees = np.degrees(orientation) % 180.0
    return (np.floor((degrees + 22.5) / 45.0).astype(np.int64)) % 4


def _shifted(values, dx, dy):
    """values[y + dy, x + dx] with clamp-to-edge; frame pixels are discarded later anyway"""
    height, width = values.shape
    ys = np.clip(np.arange(height) + dy, 0, height - 1)
    xs = np.clip(np.arange(width) + dx, 0, width - 1)
    return values[np.ix_(ys, xs)]


def non_max_suppression(gradients):
    """
    Keep pixels whose magnitude is a local maximum along the quantized
    gradient direction. A pixel must be >= the neighbour ahead and strictly
    greater than the neighbour behind, so a plateau two pixels wide (as at
    an ideal step) yields a single-pixel line.
    """
    magnitude = gradients.magnitude
    bins = quantize_directions(gradients.orientation)
    keep = np.zeros(magnitude.shape, dtype=bool)
    for bin_index, (dx, dy) in _DIRECTION_STEPS.items():
        ahead = _shifted(magnitude, dx, dy)
        behind = _shifted(magnitude, -dx, -dy)
        local_max = (magnitude >= ahead) & (magnitude > behind)
        keep |= (bins == bin_index) & local_max
    keep &= magnitude > 0
    keep[0, :] = keep[-1, :] = False
    keep[:, 0] = keep[:, -1] = False
    return keep


def hysteresis(candidates, magnitude, low, high):
    """Keep weak pixels (>= low) only when 8-connected to a strong pixel (>= high)"""
    weak = candidates & (magnitude >= low)
    strong = weak & (magnitude >= high)
    if not strong.any():
        return np.zeros(magnitude.shape, dtype=bool)
    labels, _ = ndimage.label(weak, structure=_EIGHT_CONNECTED)
    seeded = np.unique(labels[strong])
    return np.isin(labels, seeded[seeded > 0])


def resolve_thresholds(gradients, low=None, high=None):
    """Fill missing thresholds relative to the image's strongest gradient"""
    max_magnitude = float(gradients.magnitude.max())
    low = CANNY_LOW_RATIO * max_magnitude if low is None else float(low)
    high = CANNY_HIGH_RATIO * max_magnitude if high is None else float(high)
    return low, high


def canny_from_gradients(gradients, low=None, high=None):
    """Canny stages after smoothing and differentiation"""
    if float(gradients.magnitude.max()) == 0.0 and (low is None or high is None):
        # flat image: relative thresholds collapse to zero
        return EdgeMap(np.zeros(gradients.magnitude.shape, dtype=bool))
    low, high = resolve_thresholds(gradients, low, high)
    if not 0 < low < high:
        raise ParameterError(f"Canny thresholds must satisfy 0 < low < high, got low={low}, high={high}")
    candidates = non_max_suppression(gradients)
    edges = hysteresis(candidates, gradients.magnitude, low, high)
    logger.debug("canny: %d candidates, %d edges (low=%.3f high=%.3f)",
                 int(candidates.sum()), int(edges.sum()), low, high)
    return EdgeMap(edges)


def canny(image, sigma=SIGMA, low=None, high=None):
    """
    Canny edge map of a GrayImage. `low`/`high` are absolute magnitudes;
    when omitted they default to 0.1 and 0.3 of the strongest gradient.
    """
    if low is not None and high is not None and not 0 < low < high:
        raise ParameterError(f"Canny thresholds must satisfy 0 < low < high, got low={low}, high={high}")
    raster = _as_float_raster(image)
    if raster.shape[0] < 3 or raster.shape[1] < 3:
        raise ParameterError(f"image too small for edge detection: {raster.shape[1]}x{raster.shape[0]}")
    return canny_from_gradients(sobel_gradients(gaussian_blur(raster, sigma)), low, high)
