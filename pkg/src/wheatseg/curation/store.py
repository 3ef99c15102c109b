"""Durable storage for pseudo-label candidates and review decisions.

Two append-only JSONL files live under the store root: candidates.jsonl
(one line per generated candidate) and decisions.jsonl (one line per
review action, flushed per write). The effective decision for a
candidate is the last line recorded for it, so corrections are plain
appends and rebuilding a store from its files reproduces the live state
exactly. Image assets sit under `assets/`.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import DataError, NotFoundError

DECISIONS = ("accepted", "rejected", "undecided")
UNDECIDED = "undecided"


@dataclass
class Candidate:
    id: str
    image: str  # paths relative to the store root
    mask: str
    probmap: str
    model_tag: str = ""
    source_id: str = ""
    created_utc: float = 0.0
    auto_stats: dict = field(default_factory=dict)


@dataclass
class CurationRecord:
    candidate_id: str
    decision: str
    annotator: str
    decided_utc: float

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise DataError(f"unknown decision {self.decision!r}, expected one of {DECISIONS}")


class CurationStore:
    def __init__(self, root):
        self.root = Path(root)
        (self.root / "assets").mkdir(parents=True, exist_ok=True)
        self.candidates_path = self.root / "candidates.jsonl"
        self.decisions_path = self.root / "decisions.jsonl"
        self._candidates: dict[str, Candidate] = {}
        self._decisions: dict[str, str] = {}
        self._load()

    def _load(self):
        if self.candidates_path.exists():
            with open(self.candidates_path) as fh:
                for line in fh:
                    if line.strip():
                        cand = Candidate(**json.loads(line))
                        self._candidates[cand.id] = cand
        if self.decisions_path.exists():
            with open(self.decisions_path) as fh:
                for line in fh:
                    if line.strip():
                        rec = CurationRecord(**json.loads(line))
                        if rec.candidate_id in self._candidates:
                            self._decisions[rec.candidate_id] = rec.decision

    def add_candidate(self, candidate: Candidate) -> None:
        if candidate.id in self._candidates:
            raise DataError(f"duplicate candidate id {candidate.id!r}")
        with open(self.candidates_path, "a") as fh:
            fh.write(json.dumps(asdict(candidate), sort_keys=True) + "\n")
            fh.flush()
        self._candidates[candidate.id] = candidate

    def candidates(self, state: str | None = None) -> list[Candidate]:
        """All candidates sorted by id, optionally filtered by decision state."""
        if state is not None and state not in DECISIONS:
            raise DataError(f"unknown state {state!r}, expected one of {DECISIONS}")
        out = sorted(self._candidates.values(), key=lambda c: c.id)
        if state is not None:
            out = [c for c in out if self.decision(c.id) == state]
        return out

    def get(self, candidate_id: str) -> Candidate:
        try:
            return self._candidates[candidate_id]
        except KeyError:
            raise NotFoundError(f"no candidate {candidate_id!r}") from None

    def asset_path(self, candidate_id: str, kind: str) -> Path:
        cand = self.get(candidate_id)
        if kind not in ("image", "mask", "probmap"):
            raise NotFoundError(f"no asset kind {kind!r}")
        return self.root / getattr(cand, kind)

    def record_decision(
        self, candidate_id: str, decision: str, annotator: str = ""
    ) -> CurationRecord:
        """Append one decision line; the newest line per candidate wins."""
        self.get(candidate_id)  # NotFoundError on unknown ids
        record = CurationRecord(
            candidate_id=candidate_id,
            decision=decision,
            annotator=annotator,
            decided_utc=time.time(),
        )
        with open(self.decisions_path, "a") as fh:
            fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")
            fh.flush()
        self._decisions[candidate_id] = decision
        return record

    def decision(self, candidate_id: str) -> str:
        self.get(candidate_id)
        return self._decisions.get(candidate_id, UNDECIDED)

    def effective_state(self) -> dict[str, str]:
        """Candidate id -> current decision, undecided where never reviewed."""
        return {cid: self._decisions.get(cid, UNDECIDED) for cid in self._candidates}

    def accepted(self) -> list[Candidate]:
        return [c for c in self.candidates() if self._decisions.get(c.id) == "accepted"]

    def stats(self) -> dict[str, int]:
        counts = {"total": len(self._candidates), "accepted": 0, "rejected": 0, "undecided": 0}
        for decision in self.effective_state().values():
            counts[decision] += 1
        return counts
