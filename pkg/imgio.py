"""
Grayscale image and mask input/output for netpbm files (PGM P2/P5, PPM P3/P6).

Colour input is reduced to gray with the BT.601 weights; masks mark the
segmented vehicle region (non-zero = vehicle).
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from config import MASK_SUFFIX
from errors import DimensionMismatchError, ImageFormatError

logger = logging.getLogger(__name__)

_MAGIC_CHANNELS = {b"P2": 1, b"P5": 1, b"P3": 3, b"P6": 3}
_ASCII_MAGICS = (b"P2", b"P3")
_WHITESPACE = b" \t\r\n\v\f"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single-channel raster, stored as a read-only (height, width) uint8 array"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionMismatchError(f"image must be a non-empty 2-D raster, got shape {pixels.shape}")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def data(self):
        """Row-major intensity list"""
        return self.pixels.ravel().tolist()

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class Mask:
    """Foreground mask; True marks vehicle pixels"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.ascontiguousarray(self.pixels, dtype=bool)
        if pixels.ndim != 2:
            raise DimensionMismatchError(f"mask must be 2-D, got shape {pixels.shape}")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def data(self):
        return self.pixels.ravel().tolist()

    def __eq__(self, other):
        return isinstance(other, Mask) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"Mask({self.width}x{self.height}, {int(self.pixels.sum())} foreground)"


# ========== Grayscale Conversion ==========

def rgb_to_gray(r, g, b):
    """BT.601 luma with round-half-up; integer arithmetic keeps it exact"""
    return min(255, max(0, (299 * int(r) + 587 * int(g) + 114 * int(b) + 500) // 1000))


def _rgb_array_to_gray(rgb):
    rgb = rgb.astype(np.int64)
    gray = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return np.clip(gray, 0, 255).astype(np.uint8)


# ========== PNM Parsing ==========

class _HeaderReader:
    """Cursor over a PNM byte string that skips whitespace and # comments"""

    def __init__(self, path, data):
        self.path = path
        self.data = data
        self.pos = 0

    def error(self, reason, offset=None):
        return ImageFormatError(self.path, self.pos if offset is None else offset, reason)

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            byte = data[self.pos:self.pos + 1]
            if byte == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif byte in _WHITESPACE:
                self.pos += 1
            else:
                break

    def token(self, what):
        self.skip_space()
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos:self.pos + 1] not in _WHITESPACE \
                and data[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise self.error(f"unexpected end of file while reading {what}", start)
        return data[start:self.pos], start

    def integer(self, what):
        raw, start = self.token(what)
        if not raw.isdigit():
            raise self.error(f"{what} is not a non-negative integer: {raw[:16]!r}", start)
        return int(raw)


def _read_pnm(path):
    """Return (magic, maxval, samples) with samples shaped (h, w) or (h, w, 3)"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ImageFormatError(path, 0, f"cannot read file: {e}") from e

    reader = _HeaderReader(path, data)
    magic = data[:2]
    if magic not in _MAGIC_CHANNELS:
        raise reader.error(f"unsupported magic number {magic!r}", 0)
    reader.pos = 2
    channels = _MAGIC_CHANNELS[magic]

    width = reader.integer("width")
    height = reader.integer("height")
    if width < 1 or height < 1:
        raise reader.error(f"invalid dimensions {width}x{height}")
    maxval_offset = reader.pos
    maxval = reader.integer("maxval")
    if maxval < 1 or maxval > 255:
        raise reader.error(f"maxval {maxval} not in 1..255", maxval_offset)

    count = width * height * channels
    if magic in _ASCII_MAGICS:
        values = []
        while len(values) < count:
            values.append(reader.integer("sample"))
        samples = np.asarray(values, dtype=np.int64)
    else:
        # exactly one whitespace byte separates the header from the raster
        if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in _WHITESPACE:
            raise reader.error("missing whitespace after maxval")
        start = reader.pos + 1
        payload = data[start:start + count]
        if len(payload) < count:
            raise reader.error(f"truncated raster: expected {count} bytes, found {len(payload)}", start + len(payload))
        samples = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)

    if samples.max(initial=0) > maxval:
        raise reader.error(f"sample value exceeds maxval {maxval}")

    shape = (height, width) if channels == 1 else (height, width, 3)
    return magic, maxval, samples.reshape(shape)


def load_pnm(path):
    """Load a PGM or PPM file as a GrayImage; colour files are converted per pixel"""
    magic, _, samples = _read_pnm(path)
    if samples.ndim == 3:
        pixels = _rgb_array_to_gray(samples)
    else:
        pixels = samples.astype(np.uint8)
    logger.debug("loaded %s (%s, %dx%d)", path, magic.decode(), pixels.shape[1], pixels.shape[0])
    return GrayImage(pixels)


def write_pgm(path, image):
    """Write a GrayImage (or a 2-D uint8-compatible array) as binary P5"""
    pixels = image.pixels if isinstance(image, GrayImage) else np.asarray(image)
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    height, width = pixels.shape
    path = Path(path)
    path.write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes())
    return path


# ========== Masks ==========

def load_mask(path, image):
    """Load a PGM mask paired with `image`: any non-zero pixel is foreground"""
    magic, _, samples = _read_pnm(path)
    if samples.ndim != 2:
        raise ImageFormatError(path, 0, f"mask must be a PGM, found {magic.decode()}")
    if samples.shape != image.pixels.shape:
        raise DimensionMismatchError(
            f"mask {path} is {samples.shape[1]}x{samples.shape[0]}, "
            f"image is {image.width}x{image.height}"
        )
    return Mask(samples > 0)


def full_mask(image):
    return Mask(np.ones(image.pixels.shape, dtype=bool))


def mask_path_for(image_path):
    """`X.pgm` / `X.ppm` -> `X.mask.pgm`"""
    image_path = Path(image_path)
    return image_path.with_name(image_path.stem + MASK_SUFFIX)


def is_mask_file(path):
    return Path(path).name.endswith(MASK_SUFFIX)


def load_image_and_mask(image_path, mask_path=None):
    """Load an image with its paired mask, falling back to a full mask"""
    image = load_pnm(image_path)
    if mask_path is None:
        candidate = mask_path_for(image_path)
        mask_path = candidate if candidate.exists() else None
    if mask_path is None:
        return image, full_mask(image)
    return image, load_mask(mask_path, image)
