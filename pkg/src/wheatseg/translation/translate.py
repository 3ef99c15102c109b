"""Batch translation of a synthetic dataset into the realistic domain.

Masks are never fed through anything that could perturb them: the output
mask file is a byte copy of the input mask file, so annotations survive
translation exactly.
"""

from __future__ import annotations

import logging
import shutil
from pathlib import Path

from ..errors import DataError
from ..imaging import load_image, load_mask, save_image
from ..manifest import DatasetManifest, ManifestEntry, write_manifest
from .model import TranslationModel

log = logging.getLogger(__name__)


def translate_dataset(
    model: TranslationModel, manifest: DatasetManifest, out_dir
) -> DatasetManifest:
    """Translate every image in `manifest`; write images, copied masks,
    and a new manifest under `out_dir`. Returns the new manifest.

    A failure partway through reports how many samples were completed so
    a rerun can be judged against the partial output.
    """
    if not manifest.entries:
        raise DataError("nothing to translate: manifest is empty")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    model.eval()
    entries = []
    for done, entry in enumerate(manifest.entries):
        if entry.mask is None:
            raise DataError(f"sample {entry.id} has no mask; translation requires pairs")
        try:
            image = load_image(manifest.image_path(entry))
            mask = load_mask(manifest.mask_path(entry))
            translated = model.translate_sample(image, mask)
            save_image(translated, out_dir / "images" / f"{entry.id}.png")
            shutil.copyfile(manifest.mask_path(entry), out_dir / "masks" / f"{entry.id}.png")
        except Exception as exc:
            raise DataError(
                f"translation failed on sample {entry.id} "
                f"({done}/{len(manifest.entries)} completed): {exc}"
            ) from exc
        entries.append(
            ManifestEntry(
                id=entry.id,
                image=f"images/{entry.id}.png",
                mask=f"masks/{entry.id}.png",
                source_id=entry.source_id,
            )
        )
    out = DatasetManifest(entries=entries, split=manifest.split, root=out_dir)
    write_manifest(out, out_dir / "manifest.jsonl")
    log.info("translated %d samples into %s", len(entries), out_dir)
    return out
