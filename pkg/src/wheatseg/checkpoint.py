"""Checkpoint container: a sha256 digest line followed by a torch payload.

The digest covers every payload byte, so torn or truncated writes are
caught before torch tries to parse anything. Writes go through a temp
file and os.replace, which keeps the destination either absent, the old
version, or the complete new version.
"""

from __future__ import annotations

import hashlib
import io
import os
from pathlib import Path

import torch

from .errors import ChecksumError

_DIGEST_LEN = 64  # hex sha256


def write_checkpoint(payload: dict, path) -> None:
    buf = io.BytesIO()
    torch.save(payload, buf)
    raw = buf.getvalue()
    digest = hashlib.sha256(raw).hexdigest()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(digest.encode("ascii") + b"\n" + raw)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_checkpoint(path) -> dict:
    data = Path(path).read_bytes()
    sep = data.find(b"\n")
    if sep != _DIGEST_LEN:
        raise ChecksumError(f"{path}: malformed checkpoint header")
    digest, raw = data[:sep].decode("ascii", errors="replace"), data[sep + 1 :]
    if hashlib.sha256(raw).hexdigest() != digest:
        raise ChecksumError(f"{path}: checksum mismatch (truncated or corrupted)")
    return torch.load(io.BytesIO(raw), weights_only=True)
