"""Cut-and-paste dataset synthesis.

One manually annotated frame supplies foreground cutouts (one per
8-connected mask component); each output sample pastes a random number of
randomly transformed cutouts onto a random crop of a background frame.
Later pastes occlude earlier ones in both image and mask, so the emitted
mask is exactly the visible paste support.

Every sample is generated from its own random substream derived from
(seed, sample_index): serial and parallel runs produce identical bytes.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import _kernels
from .errors import DataError, EmptyAnnotationError
from .imaging import BinaryMask, ImageBuffer, MaskedSample, load_image, save_image, save_mask
from .manifest import DatasetManifest, ManifestEntry, write_manifest

log = logging.getLogger(__name__)


@dataclass
class Cutout:
    """A foreground patch, its alpha support, and where it came from."""

    patch: ImageBuffer
    alpha: BinaryMask
    source_bbox: tuple[int, int, int, int]  # top, left, height, width

    def __post_init__(self):
        if self.alpha.area() < 1:
            raise EmptyAnnotationError("cutout alpha has no positive pixels")
        top, left, h, w = self.source_bbox
        if (self.patch.height, self.patch.width) != (h, w) or (
            self.alpha.height,
            self.alpha.width,
        ) != (h, w):
            raise DataError("cutout patch/alpha size does not match source_bbox")


@dataclass
class CutoutLibrary:
    cutouts: list[Cutout]
    origin_frame_id: str = ""

    def __len__(self) -> int:
        return len(self.cutouts)


@dataclass
class SynthesisParams:
    """Placement knobs; every default is config-overridable."""

    heads_min: int = 20
    heads_max: int = 60
    scale_min: float = 0.7
    scale_max: float = 1.3
    rotation_deg: float = 180.0
    allow_flip: bool = True
    output_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.heads_min < 0 or self.heads_max < self.heads_min:
            raise ValueError(f"invalid heads range [{self.heads_min}, {self.heads_max}]")
        if self.scale_min <= 0 or self.scale_max < self.scale_min:
            raise ValueError(f"invalid scale range [{self.scale_min}, {self.scale_max}]")
        if self.output_size < 1:
            raise ValueError(f"output_size must be positive, got {self.output_size}")


@dataclass
class Placement:
    """One planned paste: which cutout, how transformed, where."""

    cutout_index: int
    scale: float
    angle_deg: float
    flip: bool
    top: int
    left: int


@dataclass
class SamplePlan:
    """Full recipe for one synthetic sample; replaying it is deterministic."""

    crop_top: int
    crop_left: int
    output_size: int
    placements: list[Placement] = field(default_factory=list)
    skipped: int = 0  # cutouts too large for the canvas after scaling


def extract_cutouts(annotated: MaskedSample) -> CutoutLibrary:
    """One cutout per 8-connected component of the annotation mask."""
    if annotated.mask.area() == 0:
        raise EmptyAnnotationError(f"annotated frame {annotated.source_id!r} has an empty mask")
    labels, count = _kernels.label_components(annotated.mask.data)
    cutouts = []
    for lab in range(1, count + 1):
        ys, xs = np.nonzero(labels == lab)
        top, left = int(ys.min()), int(xs.min())
        h = int(ys.max()) - top + 1
        w = int(xs.max()) - left + 1
        component = (labels[top : top + h, left : left + w] == lab).astype(np.uint8)
        patch = annotated.image.data[top : top + h, left : left + w].copy()
        cutouts.append(
            Cutout(
                patch=ImageBuffer(patch),
                alpha=BinaryMask(component),
                source_bbox=(top, left, h, w),
            )
        )
    return CutoutLibrary(cutouts=cutouts, origin_frame_id=annotated.source_id)


def plan_sample(
    background_shape: tuple[int, int],
    library: CutoutLibrary,
    params: SynthesisParams,
    rng: np.random.Generator,
) -> SamplePlan:
    """Draw the crop, head count, and per-paste transforms/positions.

    Draw order is part of the determinism contract; do not reorder.
    """
    bg_h, bg_w = background_shape
    size = params.output_size
    if bg_h < size or bg_w < size:
        raise ValueError(f"background {bg_h}x{bg_w} smaller than output size {size}")
    crop_top = int(rng.integers(0, bg_h - size + 1))
    crop_left = int(rng.integers(0, bg_w - size + 1))
    k = int(rng.integers(params.heads_min, params.heads_max + 1))
    if k > 0 and len(library) == 0:
        raise DataError("cutout library is empty but heads were requested")
    plan = SamplePlan(crop_top=crop_top, crop_left=crop_left, output_size=size)
    for _ in range(k):
        idx = int(rng.integers(0, len(library)))
        scale = float(rng.uniform(params.scale_min, params.scale_max))
        angle = float(rng.uniform(-params.rotation_deg, params.rotation_deg))
        flip = bool(rng.integers(0, 2)) if params.allow_flip else False
        cut = library.cutouts[idx]
        out_h, out_w = _kernels.warp_output_shape(cut.alpha.height, cut.alpha.width, scale, angle)
        if out_h > size or out_w > size:
            plan.skipped += 1
            continue
        top = int(rng.integers(0, size - out_h + 1))
        left = int(rng.integers(0, size - out_w + 1))
        plan.placements.append(
            Placement(cutout_index=idx, scale=scale, angle_deg=angle, flip=flip, top=top, left=left)
        )
    return plan


def render_plan(
    background: ImageBuffer, library: CutoutLibrary, plan: SamplePlan, source_id: str
) -> MaskedSample:
    """Composite a plan onto the background crop. Background is not mutated."""
    size = plan.output_size
    img = background.data[
        plan.crop_top : plan.crop_top + size, plan.crop_left : plan.crop_left + size
    ].copy()
    mask = np.zeros((size, size), dtype=np.uint8)
    for pl in plan.placements:
        cut = library.cutouts[pl.cutout_index]
        coeffs = _kernels.warp_coeffs(
            cut.alpha.height, cut.alpha.width, pl.scale, pl.angle_deg, pl.flip
        )
        patch, alpha = _kernels.warp_patch(cut.patch.data, cut.alpha.data, coeffs)
        _kernels.paste(img, mask, patch, alpha, pl.top, pl.left)
    return MaskedSample(image=ImageBuffer(img), mask=BinaryMask(mask), source_id=source_id)


def synthesize_sample(
    background: ImageBuffer,
    library: CutoutLibrary,
    params: SynthesisParams,
    rng: np.random.Generator,
    source_id: str = "synth",
) -> MaskedSample:
    plan = plan_sample((background.height, background.width), library, params, rng)
    if plan.skipped:
        log.warning("%s: skipped %d oversized cutouts", source_id, plan.skipped)
    return render_plan(background, library, plan, source_id)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent substream for sample `index`; identical serial or parallel."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


Background = Union[ImageBuffer, Path, str]


def _resolve_background(bg: Background) -> ImageBuffer:
    if isinstance(bg, ImageBuffer):
        return bg
    return load_image(bg)


def synthesize_dataset(
    backgrounds: Sequence[Background],
    library: CutoutLibrary,
    params: SynthesisParams,
    count: int,
    out_dir,
    workers: int = 1,
) -> DatasetManifest:
    """Write `count` image/mask PNG pairs plus a manifest under out_dir.

    Backgrounds cycle in order; entries may be ImageBuffers or image paths
    (paths are loaded lazily so paper-scale runs don't hold every frame).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if len(backgrounds) == 0:
        raise DataError("need at least one background frame")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)

    def make(i: int) -> ManifestEntry:
        sid = f"{i:06d}"
        sample = synthesize_sample(
            _resolve_background(backgrounds[i % len(backgrounds)]),
            library,
            params,
            sample_rng(params.seed, i),
            source_id=sid,
        )
        save_image(sample.image, out_dir / "images" / f"{sid}.png")
        save_mask(sample.mask, out_dir / "masks" / f"{sid}.png")
        return ManifestEntry(
            id=sid, image=f"images/{sid}.png", mask=f"masks/{sid}.png", source_id=sid
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(make, range(count)))
    else:
        entries = [make(i) for i in range(count)]
    manifest = DatasetManifest(entries=entries, split="train", root=out_dir)
    write_manifest(manifest, out_dir / "manifest.jsonl")
    return manifest
