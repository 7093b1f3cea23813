"""
Configuration defaults for the Vehicle Classification System
"""
from dataclasses import dataclass, asdict, replace
from typing import Optional

# ========== IMAGE INPUT ==========
MASK_SUFFIX = ".mask.pgm"
IMAGE_SUFFIXES = (".pgm", ".ppm")

# ========== EDGE DETECTION ==========
SIGMA = 1.4
CANNY_LOW_RATIO = 0.1   # of the strongest gradient in the image
CANNY_HIGH_RATIO = 0.3

# ========== DESCRIPTOR ==========
PATCH_SIZE = 16
BORDER_MARGIN = PATCH_SIZE // 2
CELL_SIZE = 4
ORIENTATION_BINS = 8
DESCRIPTOR_DIM = (PATCH_SIZE // CELL_SIZE) ** 2 * ORIENTATION_BINS  # 128
DESCRIPTOR_WEIGHT_SIGMA = 8.0
DESCRIPTOR_CLAMP = 0.2
INTRA_STRIDE = 2

# ========== CLUSTERING ==========
K = 400
KMEANS_MAX_ITERS = 100
KMEANS_TOL = 1e-4
ASSIGN_CHUNK = 8192  # rows per cdist block

# ========== EVALUATION ==========
TRAIN_PER_CLASS = 50
SEED = 0
PROTOCOLS = ("whole", "holdout")

# ========== MODEL FILE ==========
MODEL_MAGIC = "ESVC"
MODEL_FORMAT_VERSION = 1
MODES = ("inter", "intra")

# ========== EXIT CODES ==========
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


@dataclass(frozen=True)
class Params:
    """Settings a model was trained with; written to the model header."""
    sigma: float = SIGMA
    canny_low: Optional[float] = None   # None -> CANNY_LOW_RATIO * max magnitude
    canny_high: Optional[float] = None  # None -> CANNY_HIGH_RATIO * max magnitude
    stride: int = INTRA_STRIDE
    k: int = K
    seed: int = SEED
    max_iters: int = KMEANS_MAX_ITERS
    tol: float = KMEANS_TOL

    def with_overrides(self, **overrides):
        """Copy with every non-None override applied"""
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def to_header(self):
        parts = []
        for key, value in asdict(self).items():
            if value is None:
                text = "auto"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            parts.append(f"{key}={text}")
        return " ".join(parts)

    @classmethod
    def from_header(cls, text):
        fields = {}
        for token in text.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise ValueError(f"malformed params token {token!r}")
            fields[key] = value

        defaults = cls()
        parsed = {}
        for key, raw in fields.items():
            if not hasattr(defaults, key):
                raise ValueError(f"unknown params key {key!r}")
            if raw == "auto":
                parsed[key] = None
            elif key in ("stride", "k", "seed", "max_iters"):
                parsed[key] = int(raw)
            else:
                parsed[key] = float(raw)
        return cls(**parsed)
