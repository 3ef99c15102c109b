"""Per-stage completion records.

Each stage directory gets a run.json naming the stage, the config hash
it ran under, its seed, sha256 digests of file inputs, and its output
paths. A stage whose record matches the current config hash is complete
and skipped on rerun; a changed config invalidates the record.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path

RECORD_NAME = "run.json"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_record(
    stage_dir,
    stage: str,
    config_hash: str,
    seed: int,
    inputs: dict[str, Path | str] | None = None,
    outputs: list[str] | None = None,
) -> Path:
    stage_dir = Path(stage_dir)
    stage_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "stage": stage,
        "config_hash": config_hash,
        "seed": seed,
        "inputs": {
            name: {"path": str(p), "sha256": file_digest(p)}
            for name, p in (inputs or {}).items()
        },
        "outputs": sorted(outputs or []),
        "completed_utc": time.time(),
    }
    path = stage_dir / RECORD_NAME
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)
    return path


def load_record(stage_dir) -> dict | None:
    path = Path(stage_dir) / RECORD_NAME
    if not path.exists():
        return None
    return json.loads(path.read_text())


def stage_complete(stage_dir, config_hash: str) -> bool:
    record = load_record(stage_dir)
    return record is not None and record.get("config_hash") == config_hash
