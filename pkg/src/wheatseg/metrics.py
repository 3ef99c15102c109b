"""Dice and IoU scoring plus dataset-level evaluation reports.

Empty-vs-empty mask pairs score 1.0 by convention (a vacuously perfect
prediction); empty-vs-nonempty scores 0. The convention is recorded in
every report header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import _kernels
from .errors import DataError, ShapeError
from .imaging import BinaryMask

EMPTY_CONVENTION = "empty-vs-empty scores 1.0; empty-vs-nonempty scores 0.0"


def _counts(pred: BinaryMask, gt: BinaryMask) -> tuple[int, int, int]:
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise ShapeError(
            f"mask dimensions differ: {pred.height}x{pred.width} vs {gt.height}x{gt.width}"
        )
    return _kernels.overlap_counts(pred.data, gt.data)


def dice(pred: BinaryMask, gt: BinaryMask) -> float:
    """2|P∩G| / (|P| + |G|)."""
    inter, p, g = _counts(pred, gt)
    if p + g == 0:
        return 1.0
    return 2.0 * inter / (p + g)


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """|P∩G| / |P∪G|."""
    inter, p, g = _counts(pred, gt)
    union = p + g - inter
    if union == 0:
        return 1.0
    return inter / union


@dataclass
class SampleScore:
    id: str
    dice: float
    iou: float


@dataclass
class MetricReport:
    model_tag: str
    dataset_tag: str
    threshold: float
    samples: list[SampleScore]
    mean_dice: float
    mean_iou: float

    def to_dict(self) -> dict:
        return {
            "model_tag": self.model_tag,
            "dataset_tag": self.dataset_tag,
            "threshold": self.threshold,
            "empty_mask_convention": EMPTY_CONVENTION,
            "samples": [{"id": s.id, "dice": s.dice, "iou": s.iou} for s in self.samples],
            "mean_dice": self.mean_dice,
            "mean_iou": self.mean_iou,
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def build_report(
    scores: list[SampleScore], model_tag: str, dataset_tag: str, threshold: float
) -> MetricReport:
    if not scores:
        raise DataError("cannot build a metric report from zero samples")
    ordered = sorted(scores, key=lambda s: s.id)
    return MetricReport(
        model_tag=model_tag,
        dataset_tag=dataset_tag,
        threshold=threshold,
        samples=ordered,
        mean_dice=sum(s.dice for s in ordered) / len(ordered),
        mean_iou=sum(s.iou for s in ordered) / len(ordered),
    )


def evaluate(
    model,
    manifest,
    threshold: float = 0.5,
    model_tag: str = "model",
    dataset_tag: str = "dataset",
) -> MetricReport:
    """Score a segmentation model against every ground-truth mask in a manifest."""
    from .manifest import iter_samples
    from .segmentation import predict

    if len(manifest) == 0:
        raise DataError("cannot evaluate an empty manifest")
    for entry in manifest:
        if entry.mask is None:
            raise DataError(f"manifest entry {entry.id} has no ground-truth mask")
    scores = []
    for entry, sample in iter_samples(manifest):
        pred_mask, _ = predict(model, sample.image, threshold=threshold)
        scores.append(
            SampleScore(id=entry.id, dice=dice(pred_mask, sample.mask), iou=iou(pred_mask, sample.mask))
        )
    return build_report(scores, model_tag=model_tag, dataset_tag=dataset_tag, threshold=threshold)
