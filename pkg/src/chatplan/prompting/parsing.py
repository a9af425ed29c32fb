"""Tolerant extraction of room records from raw LLM completions."""

from __future__ import annotations

import json
import re
from typing import Any

from ..core.types import ChatplanError


class LlmOutputError(ChatplanError):
    """Completion did not contain a usable rooms JSON."""


_FENCE_RE = re.compile(r"```(?:json|JSON)?\s*(.*?)```", re.DOTALL)


def parse_llm_output(raw: str) -> list[dict[str, Any]]:
    """Return the untyped room records from the first JSON value in ``raw``.

    Tolerates markdown code fences and prose before/after the JSON. The
    JSON may be an object with a "rooms" key or a bare array of room
    records.
    """
    candidates = [raw]
    candidates += _FENCE_RE.findall(raw)
    for text in candidates:
        value = _first_json_value(text)
        if value is not None:
            return _records_from(value)
    raise LlmOutputError("no JSON object or array found in completion")


def _first_json_value(text: str) -> Any:
    decoder = json.JSONDecoder()
    for match in re.finditer(r"[{\[]", text):
        try:
            value, _ = decoder.raw_decode(text, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(value, (dict, list)):
            return value
    return None


def _records_from(value: Any) -> list[dict[str, Any]]:
    if isinstance(value, dict):
        if "rooms" not in value:
            raise LlmOutputError('completion JSON lacks the "rooms" key')
        rooms = value["rooms"]
    else:
        rooms = value
    if not isinstance(rooms, list):
        raise LlmOutputError('"rooms" must be an array of room records')
    return rooms
