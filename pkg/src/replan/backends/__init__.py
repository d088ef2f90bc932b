"""Model backends: scripted replay, ground-truth oracle, generic HTTP."""

from .base import (
    Backend,
    BackendError,
    ChatExchange,
    HttpError,
    Role,
    TranscriptExhausted,
    TranscriptMismatch,
    fingerprint,
)
from .http import ENDPOINT_VAR, KEY_VAR, MODEL_VAR, HttpBackend
from .oracle import OracleBackend
from .transcript import (
    RecordingBackend,
    ScriptedBackend,
    Transcript,
    TranscriptEntry,
    load_scripted,
    record,
)

__all__ = [
    "ENDPOINT_VAR",
    "KEY_VAR",
    "MODEL_VAR",
    "Backend",
    "BackendError",
    "ChatExchange",
    "HttpBackend",
    "HttpError",
    "OracleBackend",
    "RecordingBackend",
    "Role",
    "ScriptedBackend",
    "Transcript",
    "TranscriptEntry",
    "TranscriptExhausted",
    "TranscriptMismatch",
    "fingerprint",
    "load_scripted",
    "record",
]
