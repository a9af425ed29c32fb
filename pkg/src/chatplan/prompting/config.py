"""LLM endpoint configuration, sourced from CHD_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass

from ..core.types import ValidationError

ENV_API_KEY = "CHD_LLM_API_KEY"
ENV_BASE_URL = "CHD_LLM_BASE_URL"
ENV_MODEL = "CHD_LLM_MODEL"

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4-turbo"


@dataclass(frozen=True)
class LlmConfig:
    base_url: str = DEFAULT_BASE_URL
    api_key: str = ""
    model_name: str = DEFAULT_MODEL
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValidationError("timeout must be > 0")

    @classmethod
    def from_env(cls, **overrides) -> "LlmConfig":
        values = {
            "base_url": os.environ.get(ENV_BASE_URL, DEFAULT_BASE_URL),
            "api_key": os.environ.get(ENV_API_KEY, ""),
            "model_name": os.environ.get(ENV_MODEL, DEFAULT_MODEL),
        }
        values.update(overrides)
        return cls(**values)
