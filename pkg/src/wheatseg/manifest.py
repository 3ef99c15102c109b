"""Dataset manifests: JSONL files listing image/mask pairs.

Wire format is one JSON object per line: {id, image, mask, source_id},
with image/mask paths stored relative to the manifest's directory so a
dataset directory can be moved or compared byte-for-byte across runs.
Unlabeled datasets (real frames) carry "mask": null.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import DataError

SPLITS = ("train", "val", "test", "pseudo-label", "unlabeled")


@dataclass
class ManifestEntry:
    id: str
    image: str
    mask: Optional[str]
    source_id: str = ""

    def image_path(self, root: Path) -> Path:
        return root / self.image

    def mask_path(self, root: Path) -> Optional[Path]:
        return root / self.mask if self.mask is not None else None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    split: str
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        if self.split not in SPLITS:
            raise DataError(f"unknown split tag {self.split!r}, expected one of {SPLITS}")
        self.root = Path(self.root)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def image_path(self, entry: ManifestEntry) -> Path:
        return entry.image_path(self.root)

    def mask_path(self, entry: ManifestEntry) -> Optional[Path]:
        return entry.mask_path(self.root)


def write_manifest(manifest: DatasetManifest, path) -> Path:
    """Write entries as JSONL; paths inside are relative to the file's directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            fh.write(
                json.dumps(
                    {"id": e.id, "image": e.image, "mask": e.mask, "source_id": e.source_id},
                    sort_keys=True,
                )
                + "\n"
            )
    return path


def load_manifest(path, split: str, require_mask: bool = True) -> DatasetManifest:
    """Read and validate a manifest: files must exist, image paths unique."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    root = path.parent
    entries: list[ManifestEntry] = []
    seen_images: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON") from exc
            entry = ManifestEntry(
                id=str(obj["id"]),
                image=obj["image"],
                mask=obj.get("mask"),
                source_id=obj.get("source_id", ""),
            )
            if entry.image in seen_images:
                raise DataError(f"{path}:{lineno}: duplicate image path {entry.image}")
            seen_images.add(entry.image)
            if not (root / entry.image).exists():
                raise DataError(f"{path}:{lineno}: missing image file {root / entry.image}")
            if entry.mask is None:
                if require_mask:
                    raise DataError(f"{path}:{lineno}: entry {entry.id} has no mask")
            elif not (root / entry.mask).exists():
                raise DataError(f"{path}:{lineno}: missing mask file {root / entry.mask}")
            entries.append(entry)
    return DatasetManifest(entries=entries, split=split, root=root)


def split_manifest(
    manifest: DatasetManifest, val_count: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Deterministic train/val split: the last val_count entries become val."""
    if not 0 <= val_count < len(manifest.entries):
        raise DataError(
            f"val_count {val_count} out of range for {len(manifest.entries)} entries"
        )
    cut = len(manifest.entries) - val_count
    train = DatasetManifest(manifest.entries[:cut], split="train", root=manifest.root)
    val = DatasetManifest(manifest.entries[cut:], split="val", root=manifest.root)
    return train, val


def iter_samples(manifest: DatasetManifest) -> Iterable:
    """Yield (entry, MaskedSample) pairs, loading lazily."""
    from .imaging import MaskedSample, load_image, load_mask

    for entry in manifest.entries:
        if entry.mask is None:
            raise DataError(f"entry {entry.id} has no mask; use iter_images for unlabeled data")
        image = load_image(entry.image_path(manifest.root))
        mask = load_mask(entry.mask_path(manifest.root))
        yield entry, MaskedSample(image=image, mask=mask, source_id=entry.source_id)


def iter_images(manifest: DatasetManifest) -> Iterable:
    """Yield (entry, ImageBuffer) pairs for image-only datasets."""
    from .imaging import load_image

    for entry in manifest.entries:
        yield entry, load_image(entry.image_path(manifest.root))
