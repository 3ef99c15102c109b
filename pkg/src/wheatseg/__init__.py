"""Wheat-head segmentation from a single annotated frame.

Synthesizes training data by cut-and-paste compositing, pushes it toward
field realism with a mask-preserving translation model, trains a U-Net,
and supports human curation of pseudo-labels for fine-tuning.

Subpackages that need torch import it lazily; importing `wheatseg`
itself stays cheap.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (
    BoundsError,
    ChecksumError,
    ConfigError,
    DataError,
    DecodeError,
    EmptyAnnotationError,
    NotFoundError,
    ShapeError,
    TrainingError,
    WheatsegError,
)
from .imaging import BinaryMask, ImageBuffer, MaskedSample
from .manifest import DatasetManifest, ManifestEntry, load_manifest, write_manifest
from .metrics import MetricReport, SampleScore, dice, iou

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "BoundsError",
    "ChecksumError",
    "ConfigError",
    "DataError",
    "DecodeError",
    "EmptyAnnotationError",
    "NotFoundError",
    "ShapeError",
    "TrainingError",
    "WheatsegError",
    "BinaryMask",
    "ImageBuffer",
    "MaskedSample",
    "DatasetManifest",
    "ManifestEntry",
    "load_manifest",
    "write_manifest",
    "MetricReport",
    "SampleScore",
    "dice",
    "iou",
    "__version__",
]
