"""Segmentation training: binary cross-entropy on predicted probabilities.

Samples are loaded from manifests lazily per batch; a cache keeps small
datasets in memory. Validation Dice decides the best epoch, and `train`
returns the model restored to those weights.
"""

from __future__ import annotations

import copy
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..errors import ConfigError, DataError, TrainingError
from ..imaging import load_image, load_mask
from ..manifest import DatasetManifest, ManifestEntry
from ..metrics import dice, iou
from .unet import UNet, predict

log = logging.getLogger(__name__)

BCE_EPS = 1e-7
_CACHE_LIMIT = 512  # samples; beyond this, reload from disk every epoch


@dataclass(frozen=True)
class SegTrainConfig:
    epochs: int = 20
    batch_size: int = 4
    lr: float = 1e-3
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class SegTrainResult:
    model: UNet
    history: list[dict[str, float]] = field(default_factory=list)
    best_epoch: int = 0
    best_val_dice: float = float("nan")


def bce_loss(probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy on probabilities, clamped away from {0, 1}."""
    p = probs.clamp(BCE_EPS, 1.0 - BCE_EPS)
    loss = -(targets * torch.log(p) + (1.0 - targets) * torch.log(1.0 - p)).mean()
    if not torch.isfinite(loss):
        raise TrainingError("segmentation loss is not finite")
    return loss


class _Loader:
    """Per-entry (image, mask) tensors with an optional in-memory cache."""

    def __init__(self, manifest: DatasetManifest):
        if not manifest.entries:
            raise DataError("manifest has no samples")
        self.manifest = manifest
        self.cache: dict[int, tuple[torch.Tensor, torch.Tensor]] | None = (
            {} if len(manifest.entries) <= _CACHE_LIMIT else None
        )

    def __len__(self) -> int:
        return len(self.manifest.entries)

    def _load(self, entry: ManifestEntry) -> tuple[torch.Tensor, torch.Tensor]:
        image = load_image(self.manifest.image_path(entry))
        mask = load_mask(self.manifest.mask_path(entry))
        x = torch.from_numpy(np.transpose(image.data, (2, 0, 1)))
        y = torch.from_numpy(mask.data.astype(np.float32)).unsqueeze(0)
        return x, y

    def get(self, index: int) -> tuple[torch.Tensor, torch.Tensor]:
        if self.cache is not None:
            if index not in self.cache:
                self.cache[index] = self._load(self.manifest.entries[index])
            return self.cache[index]
        return self._load(self.manifest.entries[index])

    def batch(self, indices) -> tuple[torch.Tensor, torch.Tensor]:
        pairs = [self.get(int(i)) for i in indices]
        return torch.stack([p[0] for p in pairs]), torch.stack([p[1] for p in pairs])


def _validate(
    model: UNet, manifest: DatasetManifest, threshold: float
) -> tuple[float, float]:
    """Mean Dice and IoU over a manifest."""
    dices, ious = [], []
    for entry in manifest.entries:
        image = load_image(manifest.image_path(entry))
        truth = load_mask(manifest.mask_path(entry))
        pred, _ = predict(model, image, threshold)
        dices.append(dice(pred, truth))
        ious.append(iou(pred, truth))
    return float(np.mean(dices)), float(np.mean(ious))


def _run_epochs(
    model: UNet,
    train_manifest: DatasetManifest,
    val_manifest: DatasetManifest | None,
    config: SegTrainConfig,
    history_path,
    start_epoch: int,
) -> SegTrainResult:
    loader = _Loader(train_manifest)
    opt = torch.optim.Adam(model.parameters(), lr=config.lr)
    result = SegTrainResult(model=model)
    best_state = None
    writer = None
    fh = None
    if history_path is not None:
        history_path = Path(history_path)
        history_path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not history_path.exists()
        fh = open(history_path, "a", newline="")
        writer = csv.DictWriter(fh, fieldnames=["epoch", "train_bce", "val_dice", "val_iou"])
        if fresh:
            writer.writeheader()
    try:
        for epoch in range(start_epoch, start_epoch + config.epochs):
            model.train()
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=config.seed, spawn_key=(epoch,))
            )
            order = rng.permutation(len(loader))
            losses = []
            for i in range(0, len(order), config.batch_size):
                x, y = loader.batch(order[i : i + config.batch_size])
                opt.zero_grad(set_to_none=True)
                loss = bce_loss(torch.sigmoid(model(x)), y)
                loss.backward()
                opt.step()
                losses.append(float(loss.detach()))
            row = {
                "epoch": float(epoch),
                "train_bce": float(np.mean(losses)),
                "val_dice": float("nan"),
                "val_iou": float("nan"),
            }
            if val_manifest is not None:
                row["val_dice"], row["val_iou"] = _validate(
                    model, val_manifest, config.threshold
                )
                if best_state is None or row["val_dice"] > result.best_val_dice:
                    result.best_val_dice = row["val_dice"]
                    result.best_epoch = epoch
                    best_state = copy.deepcopy(model.state_dict())
            result.history.append(row)
            if writer is not None:
                writer.writerow(row)
                fh.flush()
            log.info(
                "epoch %d: bce %.4f val_dice %.4f", epoch, row["train_bce"], row["val_dice"]
            )
    finally:
        if fh is not None:
            fh.close()
    if best_state is not None:
        model.load_state_dict(best_state)
    else:
        result.best_epoch = start_epoch + config.epochs - 1
    return result


def train(
    model: UNet,
    train_manifest: DatasetManifest,
    val_manifest: DatasetManifest | None = None,
    config: SegTrainConfig | None = None,
    history_path=None,
) -> SegTrainResult:
    """Train from the model's current weights; restores the best-val epoch."""
    return _run_epochs(
        model, train_manifest, val_manifest, config or SegTrainConfig(), history_path, 0
    )


def fine_tune(
    model: UNet,
    manifest: DatasetManifest,
    val_manifest: DatasetManifest | None = None,
    config: SegTrainConfig | None = None,
    history_path=None,
    start_epoch: int = 0,
) -> SegTrainResult:
    """Continue training an existing model on additional data.

    Identical loop to `train`; the separate entry point exists so callers
    record intent and epoch numbering continues from `start_epoch`.
    """
    return _run_epochs(
        model, manifest, val_manifest, config or SegTrainConfig(), history_path, start_epoch
    )
