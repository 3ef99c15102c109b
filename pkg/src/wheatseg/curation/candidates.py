"""Candidate generation: run the segmentation model over unlabeled frames.

Frames are sampled without replacement from the sorted frame list, so a
(seed, directory) pair always selects the same subset. Each candidate
stores the frame copy, the predicted mask, a probability map for display,
and quick-look statistics reviewers can sort by.
"""

from __future__ import annotations

import logging
import shutil
import time
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import DataError
from ..imaging import load_image, save_mask
from ..segmentation.unet import UNet, predict
from .store import Candidate, CurationStore

log = logging.getLogger(__name__)

FRAME_PATTERNS = ("*.png", "*.jpg", "*.jpeg")


def _list_frames(frames_dir: Path) -> list[Path]:
    frames: list[Path] = []
    for pattern in FRAME_PATTERNS:
        frames.extend(frames_dir.glob(pattern))
    return sorted(frames)


def _save_probmap(probs: np.ndarray, path: Path):
    Image.fromarray(np.rint(probs * 255.0).astype(np.uint8), mode="L").save(path)


def generate_candidates(
    model: UNet,
    frames_dir,
    store: CurationStore,
    sample_count: int,
    seed: int = 0,
    threshold: float = 0.5,
    model_tag: str = "",
) -> list[Candidate]:
    """Predict on `sample_count` randomly chosen frames; register candidates."""
    frames_dir = Path(frames_dir)
    frames = _list_frames(frames_dir)
    if not frames:
        raise DataError(f"no frames found under {frames_dir}")
    if sample_count < 1:
        raise DataError(f"sample_count must be >= 1, got {sample_count}")
    if sample_count > len(frames):
        raise DataError(
            f"requested {sample_count} candidates but only {len(frames)} frames available"
        )
    rng = np.random.default_rng(seed)
    chosen = [frames[int(i)] for i in rng.choice(len(frames), size=sample_count, replace=False)]
    for sub in ("assets/images", "assets/masks", "assets/probmaps"):
        (store.root / sub).mkdir(parents=True, exist_ok=True)
    created = []
    for frame in sorted(chosen):
        cid = frame.stem
        image = load_image(frame)
        mask, probs = predict(model, image, threshold)
        shutil.copyfile(frame, store.root / "assets" / "images" / f"{cid}.png")
        save_mask(mask, store.root / "assets" / "masks" / f"{cid}.png")
        _save_probmap(probs, store.root / "assets" / "probmaps" / f"{cid}.png")
        fg = mask.data.astype(bool)
        stats = {
            "fg_fraction": float(fg.mean()),
            "mean_fg_conf": float(probs[fg].mean()) if fg.any() else 0.0,
        }
        candidate = Candidate(
            id=cid,
            image=f"assets/images/{cid}.png",
            mask=f"assets/masks/{cid}.png",
            probmap=f"assets/probmaps/{cid}.png",
            model_tag=model_tag,
            source_id=frame.name,
            created_utc=time.time(),
            auto_stats=stats,
        )
        store.add_candidate(candidate)
        created.append(candidate)
    log.info("generated %d candidates into %s", len(created), store.root)
    return created
