"""Rollout event log: a deterministic JSONL stream of everything an episode
does, hashable for replay comparison.

Event shape: {"event": type, "timestamp": simulated seconds, "payload": ...}.
Wall-clock values never enter the log, so identical runs produce identical
bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

EVENT_TYPES = (
    "presence", "plan", "classify", "question", "qa", "motion-plan",
    "reward-code", "verify", "mpc", "diagnosis", "replan", "outcome",
)


@dataclass
class RolloutLog:
    events: list[dict] = field(default_factory=list)

    def emit(self, event_type: str, timestamp: float, payload: Any) -> None:
        if event_type not in EVENT_TYPES:
            raise ValueError(f"unknown event type {event_type!r}")
        self.events.append({
            "event": event_type,
            "timestamp": round(timestamp, 6),
            "payload": payload,
        })

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.events) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RolloutLog":
        events = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                events.append(json.loads(line))
        return cls(events=events)

    def of_type(self, event_type: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event_type]
