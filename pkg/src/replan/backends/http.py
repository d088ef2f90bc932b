"""Generic HTTP chat-completion backend.

Speaks a minimal wire shape: POST {model, messages: [{role, content,
images?}]} to the configured endpoint, expecting either {"content": ...} or
an OpenAI-style {"choices": [{"message": {"content": ...}}]} reply.  No
behavior depends on which model sits behind the endpoint.
"""

from __future__ import annotations

import os
import time
from typing import Optional

import httpx

from ..prompts import Prompt
from .base import HttpError, Role

ENDPOINT_VAR = "REPLAN_HTTP_ENDPOINT"
KEY_VAR = "REPLAN_HTTP_KEY"
MODEL_VAR = "REPLAN_HTTP_MODEL"

MAX_ATTEMPTS = 3


class HttpBackend:
    def __init__(self, endpoint: Optional[str] = None, api_key: Optional[str] = None,
                 model: Optional[str] = None, timeout: float = 60.0,
                 transport: Optional[httpx.BaseTransport] = None,
                 backoff: float = 0.5):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_VAR, "")
        self.api_key = api_key if api_key is not None else os.environ.get(KEY_VAR, "")
        self.model = model or os.environ.get(MODEL_VAR, "default")
        if not self.endpoint:
            raise ValueError(f"no endpoint configured (set {ENDPOINT_VAR})")
        self._backoff = backoff
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def complete(self, role: Role, prompt: Prompt) -> str:
        message: dict = {"role": "user", "content": prompt.text}
        if prompt.images:
            message["images"] = list(prompt.images)
        payload = {"model": self.model, "messages": [message]}
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        for attempt in range(MAX_ATTEMPTS):
            try:
                response = self._client.post(self.endpoint, json=payload,
                                             headers=headers)
            except httpx.TransportError as exc:
                last_error = exc
                if attempt + 1 < MAX_ATTEMPTS:
                    time.sleep(self._backoff * (2 ** attempt))
                continue
            if response.status_code >= 500:
                last_error = HttpError(response.status_code, response.text[:200])
                if attempt + 1 < MAX_ATTEMPTS:
                    time.sleep(self._backoff * (2 ** attempt))
                continue
            if response.status_code >= 400:
                raise HttpError(response.status_code, response.text[:200])
            return _extract_content(response.json())

        if isinstance(last_error, HttpError):
            raise last_error
        raise HttpError(0, f"transport failure: {last_error}")


def _extract_content(body: dict) -> str:
    if "content" in body:
        return str(body["content"])
    try:
        return str(body["choices"][0]["message"]["content"])
    except (KeyError, IndexError, TypeError):
        raise HttpError(0, f"unrecognized response shape: {list(body)[:5]}") from None
