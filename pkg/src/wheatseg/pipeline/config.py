"""Pipeline configuration loaded from YAML.

One file drives every stage. The global seed fans out to per-stage
substreams by hashing "{seed}:{stage}", so stages are decoupled: adding
steps to one never shifts the randomness of another.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigError

STAGES = ("synth", "train-gan", "translate", "train-seg", "curate", "finetune", "eval")


def stage_seed(global_seed: int, stage: str) -> int:
    """Stable 63-bit substream seed for one named stage."""
    digest = hashlib.sha256(f"{global_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class PipelineConfig:
    raw: dict[str, Any] = field(default_factory=dict)
    source: Path | None = None

    @classmethod
    def load(cls, path, seed: int | None = None, workdir=None) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        cfg = cls(raw=raw, source=path)
        if seed is not None:
            cfg.raw["seed"] = int(seed)
        if workdir is not None:
            cfg.raw["workdir"] = str(workdir)
        cfg.workdir  # validate eagerly; every stage needs both
        cfg.seed
        return cfg

    @property
    def workdir(self) -> Path:
        try:
            return Path(self.raw["workdir"])
        except KeyError:
            raise ConfigError("config is missing required key 'workdir'") from None

    @property
    def seed(self) -> int:
        value = self.raw.get("seed", 0)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"'seed' must be an integer, got {value!r}")
        return value

    def section(self, name: str) -> dict[str, Any]:
        value = self.raw.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"config section {name!r} must be a mapping, got {value!r}")
        return value

    def get(self, dotted: str, default=None):
        """Fetch 'section.key'; returns default when absent."""
        node: Any = self.raw
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def require(self, dotted: str):
        sentinel = object()
        value = self.get(dotted, sentinel)
        if value is sentinel:
            raise ConfigError(f"config is missing required key {dotted!r}")
        return value

    def input_path(self, dotted: str) -> Path:
        """A required path that must already exist on disk."""
        path = Path(str(self.require(dotted)))
        if self.source is not None and not path.is_absolute():
            path = self.source.parent / path
        if not path.exists():
            raise ConfigError(f"config key {dotted!r} points to missing path: {path}")
        return path

    def optional_path(self, dotted: str) -> Path | None:
        if self.get(dotted) is None:
            return None
        return self.input_path(dotted)

    def config_hash(self) -> str:
        """Digest of the full resolved config; stamps every run record."""
        canon = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def stage_seed(self, stage: str) -> int:
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}, expected one of {STAGES}")
        return stage_seed(self.seed, stage)
