"""Chat-completion backend abstraction shared by every model stand-in."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, runtime_checkable

from ..prompts import Prompt


class Role(str, Enum):
    PLANNER = "planner"
    PERCEIVER = "perceiver"
    VERIFIER = "verifier"


class BackendError(RuntimeError):
    pass


class TranscriptExhausted(BackendError):
    pass


class TranscriptMismatch(BackendError):
    def __init__(self, expected: str, got: str):
        self.expected = expected
        self.got = got
        super().__init__(f"transcript expected {expected}, got {got}")


class HttpError(BackendError):
    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(f"HTTP {status}: {detail}")


def fingerprint(prompt: Prompt) -> str:
    """Stable prompt identity: template id plus a digest of the text with
    all whitespace runs collapsed, so whitespace-only edits do not change it."""
    normalized = " ".join(prompt.text.split())
    digest = hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:16]
    return f"{prompt.template_id}:{digest}"


@dataclass(frozen=True, slots=True)
class ChatExchange:
    """One prompt/response pair as recorded in transcripts and logs."""

    role: Role
    template_id: str
    fingerprint: str
    prompt: str
    response: str
    images: tuple[str, ...] = ()
    latency: float = 0.0

    def to_log(self) -> dict:
        # latency is wall-clock and deliberately left out of replayable logs
        return {
            "role": self.role.value,
            "template_id": self.template_id,
            "fingerprint": self.fingerprint,
            "prompt": self.prompt,
            "response": self.response,
        }


@runtime_checkable
class Backend(Protocol):
    """Anything that can answer a rendered prompt. Implementations must
    tolerate concurrent ``complete`` calls."""

    def complete(self, role: Role, prompt: Prompt) -> str:
        ...
