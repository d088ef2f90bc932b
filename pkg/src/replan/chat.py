"""Session wrapper binding a backend to the exchange record."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .backends.base import Backend, ChatExchange, Role, fingerprint
from .prompts import Prompt


@dataclass
class ChatSession:
    """Issues prompts against one backend and keeps every exchange."""

    backend: Backend
    exchanges: list[ChatExchange] = field(default_factory=list)

    def ask(self, role: Role, prompt: Prompt) -> str:
        started = time.monotonic()
        response = self.backend.complete(role, prompt)
        exchange = ChatExchange(
            role=role,
            template_id=prompt.template_id,
            fingerprint=fingerprint(prompt),
            prompt=prompt.text,
            response=response,
            images=prompt.images,
            latency=time.monotonic() - started,
        )
        self.exchanges.append(exchange)
        return response

    def drain(self) -> list[dict]:
        """Pop accumulated exchanges as log-ready dicts."""
        out = [e.to_log() for e in self.exchanges]
        self.exchanges.clear()
        return out
