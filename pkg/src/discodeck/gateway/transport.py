"""Transports: OpenAI-compatible chat completions over HTTP, plus a scripted stand-in."""

from __future__ import annotations

import base64
import os
import threading
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Protocol

import httpx

from ..errors import TransportError

if TYPE_CHECKING:
    from . import AgentRequest

DEFAULT_BASE_URL = "https://api.openai.com/v1"

ENV_API_KEY = "DISCODECK_API_KEY"
ENV_BASE_URL = "DISCODECK_BASE_URL"
ENV_GEN_MODEL = "DISCODECK_GEN_MODEL"
ENV_EVAL_MODEL = "DISCODECK_EVAL_MODEL"


class Transport(Protocol):
    def complete(self, request: "AgentRequest", model: str) -> str: ...


def _image_part(data: bytes) -> dict[str, Any]:
    mime = "image/png" if data[:8] == b"\x89PNG\r\n\x1a\n" else "image/jpeg"
    encoded = base64.b64encode(data).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:{mime};base64,{encoded}"}}


def build_messages(request: "AgentRequest") -> list[dict[str, Any]]:
    user: Any = request.user_payload
    if request.images:
        user = [{"type": "text", "text": request.user_payload}] + [_image_part(i) for i in request.images]
    return [
        {"role": "system", "content": request.system_prompt},
        {"role": "user", "content": user},
    ]


@dataclass
class OpenAIChatTransport:
    base_url: str = DEFAULT_BASE_URL
    api_key: str = ""
    timeout_s: float = 120.0

    @classmethod
    def from_env(cls) -> "OpenAIChatTransport":
        return cls(
            base_url=os.getenv(ENV_BASE_URL, "").strip() or DEFAULT_BASE_URL,
            api_key=os.getenv(ENV_API_KEY, "").strip(),
        )

    def complete(self, request: "AgentRequest", model: str) -> str:
        body = {
            "model": model,
            "messages": build_messages(request),
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "response_format": {"type": "json_object"},
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        url = self.base_url.rstrip("/") + "/chat/completions"
        try:
            resp = httpx.post(url, json=body, headers=headers, timeout=self.timeout_s)
        except httpx.HTTPError as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response body: {exc}") from exc


class ScriptedTransport:
    """Answers requests with a Python callable; counts calls.

    Used for tests, offline demos, and recording fixture transcripts.
    """

    def __init__(self, responder: Callable[["AgentRequest"], str]):
        self.responder = responder
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, request: "AgentRequest", model: str) -> str:
        with self._lock:
            self.calls += 1
        return self.responder(request)


class NoNetworkTransport:
    """Fails loudly if anything tries to reach the network."""

    calls = 0

    def complete(self, request: "AgentRequest", model: str) -> str:
        self.calls += 1
        raise AssertionError(f"network access attempted by {request.agent.value}")
