"""Transcript recording and deterministic scripted replay."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..prompts import Prompt
from .base import Backend, ChatExchange, Role, TranscriptExhausted, TranscriptMismatch, fingerprint


@dataclass(frozen=True, slots=True)
class TranscriptEntry:
    fingerprint: str
    role: str
    prompt: str
    response: str

    def to_json(self) -> dict:
        return {"fingerprint": self.fingerprint, "role": self.role,
                "prompt": self.prompt, "response": self.response}


@dataclass
class Transcript:
    """Ordered recording of exchanges, replayable through ScriptedBackend."""

    entries: list[TranscriptEntry] = field(default_factory=list)
    match_mode: str = "pattern"  # "exact" | "pattern"

    def append(self, exchange: ChatExchange) -> None:
        self.entries.append(TranscriptEntry(
            fingerprint=exchange.fingerprint, role=exchange.role.value,
            prompt=exchange.prompt, response=exchange.response))

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(json.dumps(entry.to_json(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path, match_mode: str = "pattern") -> "Transcript":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                entries.append(TranscriptEntry(
                    fingerprint=row["fingerprint"], role=row["role"],
                    prompt=row["prompt"], response=row["response"]))
        return cls(entries=entries, match_mode=match_mode)


class ScriptedBackend:
    """Replays a transcript in order.

    In "exact" mode the raw prompt text must match; in "pattern" mode only
    the prompt fingerprint (template id + slot digest) has to agree, which
    survives whitespace-only template changes.
    """

    def __init__(self, transcript: Transcript):
        self._transcript = transcript
        self._cursor = 0
        self._lock = threading.Lock()

    @property
    def remaining(self) -> int:
        return len(self._transcript.entries) - self._cursor

    def complete(self, role: Role, prompt: Prompt) -> str:
        with self._lock:
            if self._cursor >= len(self._transcript.entries):
                raise TranscriptExhausted(
                    f"transcript exhausted at call {self._cursor} "
                    f"(wanted {fingerprint(prompt)})")
            entry = self._transcript.entries[self._cursor]
            if self._transcript.match_mode == "exact":
                if entry.prompt != prompt.text:
                    raise TranscriptMismatch(entry.fingerprint, fingerprint(prompt))
            else:
                if entry.fingerprint != fingerprint(prompt):
                    raise TranscriptMismatch(entry.fingerprint, fingerprint(prompt))
            self._cursor += 1
            return entry.response


class RecordingBackend:
    """Wraps any backend, appending every exchange to a transcript."""

    def __init__(self, inner: Backend):
        self._inner = inner
        self.transcript = Transcript()
        self._lock = threading.Lock()

    def complete(self, role: Role, prompt: Prompt) -> str:
        response = self._inner.complete(role, prompt)
        exchange = ChatExchange(role=role, template_id=prompt.template_id,
                                fingerprint=fingerprint(prompt), prompt=prompt.text,
                                response=response, images=prompt.images)
        with self._lock:
            self.transcript.append(exchange)
        return response

    def save(self, path: str | Path) -> None:
        self.transcript.save(path)


def record(backend: Backend) -> RecordingBackend:
    return RecordingBackend(backend)


def load_scripted(path: str | Path, match_mode: str = "pattern") -> ScriptedBackend:
    return ScriptedBackend(Transcript.load(path, match_mode=match_mode))
