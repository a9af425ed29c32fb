"""End-to-end text -> validated rooms document extraction."""

from __future__ import annotations

from typing import Optional

from ..core.types import RoomsDocument
from .config import LlmConfig
from .fuzzy import DEFAULT_MAX_DISTANCE
from .parsing import parse_llm_output
from .prompts import build_extraction_prompt
from .transport import Transport, call_llm
from .validate import ExtractionResult, validate_document


def extract(
    user_text: str,
    cfg: LlmConfig,
    transport: Transport,
    previous_document: Optional[RoomsDocument] = None,
    max_distance: int = DEFAULT_MAX_DISTANCE,
) -> ExtractionResult:
    """Prompt -> completion -> records -> validated document.

    With a fixture transport this is a pure function of
    (user_text, previous_document, fixture).
    """
    prompt = build_extraction_prompt(user_text, previous_document)
    raw = call_llm(prompt, cfg, transport)
    records = parse_llm_output(raw)
    return validate_document(records, max_distance=max_distance)
