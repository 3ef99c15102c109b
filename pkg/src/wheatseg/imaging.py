"""Image and mask primitives plus file/video ingestion.

Intensities live in [0, 1] as float32 while in memory and as 8-bit PNG/JPEG
at rest. Masks are single-channel uint8 in {0, 1}; the house mask file
format is a single-channel PNG with 0 = background, 255 = foreground.
All functions here are pure over immutable buffers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import _kernels
from .errors import BoundsError, DecodeError, ShapeError

MASK_THRESHOLD = 0.5


@dataclass
class ImageBuffer:
    """Float32 pixel buffer of shape (height, width, channels), values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 3:
            raise ShapeError(f"image buffer must be HxWxC, got shape {self.data.shape}")
        if self.channels not in (1, 3, 4):
            raise ShapeError(f"channels must be 1, 3, or 4, got {self.channels}")
        lo, hi = float(self.data.min(initial=0.0)), float(self.data.max(initial=0.0))
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"intensities must lie in [0,1], got range [{lo}, {hi}]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_uint8(cls, arr: np.ndarray) -> "ImageBuffer":
        return cls(arr.astype(np.float32) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.data * 255.0).astype(np.uint8)


@dataclass
class BinaryMask:
    """Uint8 mask of shape (height, width) with values in {0, 1}."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if self.data.ndim != 2:
            raise ShapeError(f"mask must be HxW, got shape {self.data.shape}")
        if self.data.max(initial=0) > 1:
            raise ValueError("mask values must be strictly 0 or 1")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def area(self) -> int:
        return int(np.count_nonzero(self.data))


@dataclass
class MaskedSample:
    """A 3-channel image paired with a binary mask of identical extent."""

    image: ImageBuffer
    mask: BinaryMask
    source_id: str = field(default="")

    def __post_init__(self):
        if self.image.channels != 3:
            raise ShapeError(f"sample image must have 3 channels, got {self.image.channels}")
        if (self.image.height, self.image.width) != (self.mask.height, self.mask.width):
            raise ShapeError(
                f"image {self.image.height}x{self.image.width} and mask "
                f"{self.mask.height}x{self.mask.width} dimensions differ"
            )


def load_image(path) -> ImageBuffer:
    """Read a PNG or JPEG file as a 3-channel buffer with intensities in [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image file not found: {path}")
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise DecodeError(f"cannot decode image file {path}") from exc
    return ImageBuffer.from_uint8(arr)


def save_image(buf: ImageBuffer, path) -> None:
    """Write a buffer as an 8-bit image; PNG round-trips losslessly."""
    arr = buf.to_uint8()
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(path)


def load_mask(path, threshold: float = MASK_THRESHOLD) -> BinaryMask:
    """Read a single-channel image; pixel = 1 iff its intensity >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0,1), got {threshold}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"mask file not found: {path}")
    try:
        with Image.open(path) as img:
            if len(img.getbands()) != 1:
                raise ShapeError(
                    f"mask file {path} has {len(img.getbands())} channels, expected 1"
                )
            arr = np.asarray(img)
    except UnidentifiedImageError as exc:
        raise DecodeError(f"cannot decode mask file {path}") from exc
    if arr.dtype == np.uint8:
        scaled = arr.astype(np.float32) / 255.0
    elif arr.dtype == np.bool_:
        scaled = arr.astype(np.float32)
    else:
        info = np.iinfo(arr.dtype) if np.issubdtype(arr.dtype, np.integer) else None
        scaled = arr.astype(np.float32) / (info.max if info else 1.0)
    return BinaryMask((scaled >= threshold).astype(np.uint8))


def save_mask(mask: BinaryMask, path) -> None:
    """Write a mask as single-channel PNG, 0 = background, 255 = foreground."""
    Image.fromarray(mask.data * np.uint8(255), mode="L").save(path)


def extract_frames(video_path, stride: int = 1) -> Iterator[ImageBuffer]:
    """Yield frames at indices 0, stride, 2*stride, ... in order."""
    import cv2  # deferred: costs ~1s and only this op needs it

    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    video_path = Path(video_path)
    if not video_path.exists():
        raise FileNotFoundError(f"video file not found: {video_path}")
    cap = cv2.VideoCapture(str(video_path))
    try:
        if not cap.isOpened():
            raise DecodeError(f"cannot open video container: {video_path}")
        index = 0
        got_any = False
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            got_any = True
            if index % stride == 0:
                rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
                yield ImageBuffer.from_uint8(rgb)
            index += 1
        if not got_any:
            raise DecodeError(f"no decodable frames in {video_path}")
    finally:
        cap.release()


def overlay(
    base: ImageBuffer, patch: ImageBuffer, patch_alpha: BinaryMask, top_left: tuple[int, int]
) -> ImageBuffer:
    """Composite patch over base where patch_alpha == 1; base is untouched.

    Hard edges by design: the emitted support is exactly the alpha support.
    """
    top, left = top_left
    if (patch.height, patch.width) != (patch_alpha.height, patch_alpha.width):
        raise ShapeError("patch and alpha dimensions differ")
    if patch.channels != base.channels:
        raise ShapeError(f"patch has {patch.channels} channels, base has {base.channels}")
    if top < 0 or left < 0 or top + patch.height > base.height or left + patch.width > base.width:
        raise BoundsError(
            f"patch {patch.height}x{patch.width} at ({top},{left}) exceeds "
            f"base {base.height}x{base.width}"
        )
    out = base.data.copy()
    _kernels.paste(out, None, patch.data, patch_alpha.data, top, left)
    return ImageBuffer(out)
