"""
Exception hierarchy shared by every module of the Vehicle Classification System
"""


class VehicleClassifierError(Exception):
    """Base class for every error the toolkit raises on purpose"""


class ParameterError(VehicleClassifierError, ValueError):
    """A numeric setting is outside its allowed range"""


class DimensionMismatchError(VehicleClassifierError, ValueError):
    """Two rasters or vectors that must agree in shape do not"""


class ImageFormatError(VehicleClassifierError, ValueError):
    """A PNM file could not be read; carries the path and byte offset"""

    def __init__(self, path, offset, reason):
        self.path = str(path)
        self.offset = offset
        self.reason = reason
        super().__init__(f"{self.path} (byte {offset}): {reason}")


class DatasetError(VehicleClassifierError):
    """Dataset layout or train/eval split problem"""


class ClassificationError(VehicleClassifierError):
    """A query image could not be given a class"""


class NoFeaturesError(ClassificationError):
    """The query produced zero descriptors"""

    reason = "no-features"


class UnmatchedQueryError(ClassificationError):
    """The query has descriptors but no codebook cluster matched any of them"""

    reason = "no-match"


class TrainingError(VehicleClassifierError):
    """Training could not produce a usable model"""


class ModelFormatError(VehicleClassifierError):
    """Model file is malformed or truncated"""


class ChecksumError(ModelFormatError):
    """Model payload does not match the recorded CRC32"""


class UnsupportedVersionError(ModelFormatError):
    """Model file was written by a newer format version"""


def failure_reason(error):
    """Short tag for a per-image failure, as printed in FAILED lines and reports"""
    if isinstance(error, ClassificationError):
        return error.reason
    if isinstance(error, (ImageFormatError, DimensionMismatchError)):
        return "unreadable"
    if isinstance(error, ParameterError):
        return "bad-parameters"
    return "error"
