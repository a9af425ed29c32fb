from .config import LlmConfig
from .extract import extract
from .fuzzy import DEFAULT_MAX_DISTANCE, fuzzy_normalize, levenshtein
from .parsing import LlmOutputError, parse_llm_output
from .prompts import OUTPUT_SCHEMA, build_extraction_prompt
from .transport import (
    FixtureTransport,
    FlakyTransport,
    HttpTransport,
    LlmAuthError,
    LlmMalformedResponseError,
    LlmTimeoutError,
    LlmTransportError,
    Transport,
    TransientTransportError,
    call_llm,
)
from .validate import Correction, ExtractionResult, Rejection, validate_document

__all__ = [
    "LlmConfig",
    "Transport",
    "HttpTransport",
    "FixtureTransport",
    "FlakyTransport",
    "call_llm",
    "LlmTransportError",
    "LlmAuthError",
    "LlmTimeoutError",
    "LlmMalformedResponseError",
    "TransientTransportError",
    "LlmOutputError",
    "parse_llm_output",
    "OUTPUT_SCHEMA",
    "build_extraction_prompt",
    "levenshtein",
    "fuzzy_normalize",
    "DEFAULT_MAX_DISTANCE",
    "validate_document",
    "ExtractionResult",
    "Correction",
    "Rejection",
    "extract",
]
