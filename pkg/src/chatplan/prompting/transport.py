"""LLM transports: a chat-completions HTTP client plus test doubles.

Every pipeline entry point takes a transport argument, so the whole
extraction path runs without network access in tests. A transport makes
exactly one attempt; ``call_llm`` owns the retry budget.
"""

from __future__ import annotations

import time
from typing import Protocol

import httpx

from ..core.types import ChatplanError
from .config import LlmConfig


class LlmTransportError(ChatplanError):
    """Base class for transport failures."""


class LlmAuthError(LlmTransportError):
    """Endpoint rejected the credentials."""


class TransientTransportError(LlmTransportError):
    """Single failed attempt that is worth retrying (connect error, 5xx, 429)."""


class LlmTimeoutError(LlmTransportError):
    """Transient failures persisted beyond the retry budget."""


class LlmMalformedResponseError(LlmTransportError):
    """Endpoint answered, but not in chat-completions shape."""


class Transport(Protocol):
    def complete(self, prompt: str, cfg: LlmConfig) -> str: ...


def call_llm(
    prompt: str,
    cfg: LlmConfig,
    transport: Transport,
    base_delay: float = 0.5,
) -> str:
    """One completion, retrying transient failures with exponential backoff.

    Makes at most ``cfg.max_retries + 1`` attempts.
    """
    failures = 0
    while True:
        try:
            return transport.complete(prompt, cfg)
        except TransientTransportError as exc:
            failures += 1
            if failures > cfg.max_retries:
                raise LlmTimeoutError(
                    f"transport failed after {failures} attempts: {exc}"
                ) from exc
            time.sleep(base_delay * 2 ** (failures - 1))


class HttpTransport:
    """POSTs to {base_url}/chat/completions in the common inference shape."""

    def __init__(self, client: httpx.Client | None = None) -> None:
        self._client = client

    def complete(self, prompt: str, cfg: LlmConfig) -> str:
        payload = {
            "model": cfg.model_name,
            "temperature": cfg.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {"Authorization": f"Bearer {cfg.api_key}"}
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        client = self._client or httpx.Client(timeout=cfg.timeout)
        try:
            body = self._post(client, url, payload, headers)
        finally:
            if self._client is None:
                client.close()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise LlmMalformedResponseError(
                f"completion missing choices[0].message.content: {exc}"
            ) from exc

    @staticmethod
    def _post(client: httpx.Client, url: str, payload: dict, headers: dict) -> dict:
        try:
            resp = client.post(url, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            raise TransientTransportError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise LlmAuthError(f"authentication failed ({resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientTransportError(f"status {resp.status_code}")
        if resp.status_code != 200:
            raise LlmMalformedResponseError(
                f"unexpected status {resp.status_code}: {resp.text[:200]}"
            )
        try:
            return resp.json()
        except ValueError as exc:
            raise LlmMalformedResponseError(f"non-JSON response body: {exc}") from exc


class FixtureTransport:
    """Returns canned completions in order; repeats the last one."""

    def __init__(self, *responses: str) -> None:
        if not responses:
            raise ValueError("FixtureTransport needs at least one response")
        self.responses = list(responses)
        self.calls: list[str] = []

    def complete(self, prompt: str, cfg: LlmConfig) -> str:
        self.calls.append(prompt)
        idx = min(len(self.calls) - 1, len(self.responses) - 1)
        return self.responses[idx]


class FlakyTransport:
    """Raises a retryable error n times, then delegates to the inner transport."""

    def __init__(self, failures: int, inner: Transport) -> None:
        self.remaining = failures
        self.inner = inner

    def complete(self, prompt: str, cfg: LlmConfig) -> str:
        if self.remaining > 0:
            self.remaining -= 1
            raise TransientTransportError("injected failure")
        return self.inner.complete(prompt, cfg)
