"""Export accepted candidates as a training-ready pseudo-label dataset."""

from __future__ import annotations

import logging
import shutil
from pathlib import Path

from ..errors import DataError
from ..manifest import DatasetManifest, ManifestEntry, write_manifest
from .store import CurationStore

log = logging.getLogger(__name__)


def export_curated(store: CurationStore, out_dir) -> DatasetManifest:
    """Byte-copy every accepted image/mask pair into `out_dir`.

    The pairs leave exactly as reviewed; no resampling or re-encoding.
    """
    accepted = sorted(store.accepted(), key=lambda c: c.id)
    if not accepted:
        raise DataError("no accepted candidates to export")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    entries = []
    for cand in accepted:
        shutil.copyfile(store.root / cand.image, out_dir / "images" / f"{cand.id}.png")
        shutil.copyfile(store.root / cand.mask, out_dir / "masks" / f"{cand.id}.png")
        entries.append(
            ManifestEntry(
                id=cand.id,
                image=f"images/{cand.id}.png",
                mask=f"masks/{cand.id}.png",
                source_id=cand.source_id,
            )
        )
    manifest = DatasetManifest(entries=entries, split="pseudo-label", root=out_dir)
    write_manifest(manifest, out_dir / "manifest.jsonl")
    log.info("exported %d accepted pairs to %s", len(entries), out_dir)
    return manifest
