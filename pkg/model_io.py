"""
Trained model container and its line-oriented UTF-8 file format.

    ESVC 1
    mode inter|intra
    k <int>
    dim <int>
    tau <float>
    classes <label>,<label>,...
    params <key=value ...>
    checksum <crc32 hex of payload>
    <blank line>
    <payload: k centroid lines, then a `weights` or `signatures` section>

Floats are written with repr(), which round-trips exactly. Codebook inertia
is a training statistic and is not stored; a loaded codebook reports nan.
Unknown header keys are ignored.
"""
import logging
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from classify import Signature, WeightTable
from codebook import Codebook
from config import MODEL_FORMAT_VERSION, MODEL_MAGIC, MODES, Params
from errors import ChecksumError, ModelFormatError, UnsupportedVersionError

logger = logging.getLogger(__name__)

_HEADER_KEYS = ("mode", "k", "dim", "tau", "classes", "params", "checksum")


@dataclass(eq=False)
class TrainedModel:
    mode: str
    codebook: Codebook
    tau: float
    classes: tuple
    params: Params
    weight_table: Optional[WeightTable] = None
    signatures: Optional[List[Signature]] = None
    format_version: int = MODEL_FORMAT_VERSION
    tau_source: str = field(default="auto", compare=False)

    def __post_init__(self):
        self.classes = tuple(self.classes)
        if self.mode not in MODES:
            raise ModelFormatError(f"unknown model mode {self.mode!r}")
        if not self.tau > 0:
            raise ModelFormatError(f"tau must be > 0, got {self.tau}")
        if self.mode == "inter" and (self.weight_table is None or self.signatures is not None):
            raise ModelFormatError("an inter model carries a weight table and no signatures")
        if self.mode == "intra" and (self.signatures is None or self.weight_table is not None):
            raise ModelFormatError("an intra model carries signatures and no weight table")
        for label in self.classes:
            if not label or "," in label or any(ch.isspace() for ch in label):
                raise ModelFormatError(f"class label {label!r} cannot be stored (empty, comma or whitespace)")

    def __eq__(self, other):
        if not isinstance(other, TrainedModel):
            return NotImplemented
        same_signatures = (
            self.signatures is None and other.signatures is None
        ) or (
            self.signatures is not None and other.signatures is not None
            and len(self.signatures) == len(other.signatures)
            and all(a == b for a, b in zip(self.signatures, other.signatures))
        )
        return (self.mode == other.mode and self.codebook == other.codebook and self.tau == other.tau
                and self.classes == other.classes and self.params == other.params
                and self.weight_table == other.weight_table and same_signatures
                and self.format_version == other.format_version)


def _floats(values):
    return " ".join(repr(float(v)) for v in values)


# ========== Writing ==========

def _payload(model):
    lines = [_floats(row) for row in model.codebook.centroids]
    if model.mode == "inter":
        lines.append("weights")
        lines.extend(_floats(row) for row in model.weight_table.weights)
    else:
        lines.append("signatures")
        lines.extend(f"{sig.label} {sig.to_text()}" for sig in model.signatures)
    return "".join(line + "\n" for line in lines).encode("utf-8")


def dumps_model(model):
    payload = _payload(model)
    header = [
        f"{MODEL_MAGIC} {model.format_version}",
        f"mode {model.mode}",
        f"k {model.codebook.k}",
        f"dim {model.codebook.dim}",
        f"tau {model.tau!r}",
        f"classes {','.join(model.classes)}",
        f"params {model.params.to_header()}",
        f"checksum {zlib.crc32(payload):08x}",
        "",
    ]
    return "\n".join(header).encode("utf-8") + b"\n" + payload


def save_model(model, path):
    path = Path(path)
    path.write_bytes(dumps_model(model))
    logger.debug("wrote %s model to %s", model.mode, path)
    return path


# ========== Reading ==========

def _parse_floats(line, expected, what):
    try:
        values = [float(token) for token in line.split()]
    except ValueError as e:
        raise ModelFormatError(f"bad number in {what}: {e}") from e
    if len(values) != expected:
        raise ModelFormatError(f"{what} has {len(values)} values, expected {expected}")
    return values


def loads_model(data, source="<model>"):
    separator = data.find(b"\n\n")
    if separator < 0:
        raise ModelFormatError(f"{source}: truncated file (header never ends)")
    try:
        header_lines = data[:separator].decode("utf-8").split("\n")
    except UnicodeDecodeError as e:
        raise ModelFormatError(f"{source}: header is not UTF-8") from e
    payload = data[separator + 2:]

    magic, _, version_text = header_lines[0].partition(" ")
    if magic != MODEL_MAGIC or not version_text.isdigit():
        raise ModelFormatError(f"{source}: not a model file (first line {header_lines[0][:40]!r})")
    version = int(version_text)
    if version > MODEL_FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{source}: format version {version} is newer than supported version {MODEL_FORMAT_VERSION}"
        )

    header = {}
    for line in header_lines[1:]:
        key, _, value = line.partition(" ")
        header[key] = value
    missing = [key for key in _HEADER_KEYS if key not in header]
    if missing:
        raise ModelFormatError(f"{source}: truncated header, missing {', '.join(missing)}")

    if f"{zlib.crc32(payload):08x}" != header["checksum"].strip().lower():
        raise ChecksumError(f"{source}: payload checksum mismatch (corrupt or truncated file)")

    try:
        mode = header["mode"]
        k = int(header["k"])
        dim = int(header["dim"])
        tau = float(header["tau"])
        classes = tuple(header["classes"].split(",")) if header["classes"] else ()
        params = Params.from_header(header["params"])
    except ValueError as e:
        raise ModelFormatError(f"{source}: bad header value: {e}") from e

    lines = payload.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < k + 1:
        raise ModelFormatError(f"{source}: truncated payload ({len(lines)} lines for {k} centroids)")
    centroids = np.array([_parse_floats(lines[i], dim, f"centroid {i}") for i in range(k)])
    codebook = Codebook(k=k, dim=dim, centroids=centroids.reshape(k, dim), seed=params.seed, inertia=math.nan)

    section, body = lines[k], lines[k + 1:]
    weight_table = signatures = None
    if mode == "inter":
        if section != "weights" or len(body) != k:
            raise ModelFormatError(f"{source}: expected a weights section with {k} rows")
        weights = np.array([_parse_floats(row, len(classes), f"weights row {i}") for i, row in enumerate(body)])
        weight_table = WeightTable(k=k, classes=classes, weights=weights.reshape(k, len(classes)))
    elif mode == "intra":
        if section != "signatures":
            raise ModelFormatError(f"{source}: expected a signatures section")
        signatures = []
        for row in body:
            label, _, bits = row.partition(" ")
            if len(bits) != k:
                raise ModelFormatError(f"{source}: signature for {label!r} has {len(bits)} bits, expected {k}")
            try:
                signatures.append(Signature.from_text(bits, label))
            except ValueError as e:
                raise ModelFormatError(f"{source}: {e}") from e
    else:
        raise ModelFormatError(f"{source}: unknown mode {mode!r}")

    return TrainedModel(mode=mode, codebook=codebook, tau=tau, classes=classes, params=params,
                        weight_table=weight_table, signatures=signatures, format_version=version)


def load_model(path):
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ModelFormatError(f"cannot read model {path}: {e}") from e
    return loads_model(data, str(path))
