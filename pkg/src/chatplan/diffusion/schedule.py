"""Noise schedule for the denoising process.

Cosine schedule; alpha_bar is indexed 0..T with the boundary convention
alpha_bar[0] = 1, so timestep t=0 means "clean".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.types import ValidationError

MAX_BETA = 0.999


@dataclass(frozen=True)
class DiffusionSchedule:
    t_steps: int
    betas: np.ndarray  # (T,) float64, betas[i] is beta_{i+1}
    alphas: np.ndarray  # (T,)
    alpha_bars: np.ndarray  # (T+1,) float64 with alpha_bars[0] = 1

    def __post_init__(self) -> None:
        if self.betas.shape != (self.t_steps,):
            raise ValidationError("betas must have length T")
        if np.any(self.betas <= 0) or np.any(self.betas >= 1):
            raise ValidationError("betas must lie in (0, 1)")
        if self.alpha_bars[0] != 1.0 or np.any(np.diff(self.alpha_bars) >= 0):
            raise ValidationError("alpha_bars must start at 1 and strictly decrease")

    def alpha_bar(self, t: int) -> float:
        if not 0 <= t <= self.t_steps:
            raise ValidationError(f"timestep {t} outside [0, {self.t_steps}]")
        return float(self.alpha_bars[t])

    @classmethod
    def cosine(cls, t_steps: int = 1000, s: float = 0.008) -> "DiffusionSchedule":
        f = lambda u: math.cos((u / t_steps + s) / (1 + s) * math.pi / 2) ** 2
        f0 = f(0)
        alpha_bars = np.array([f(t) / f0 for t in range(t_steps + 1)], dtype=np.float64)
        betas = 1.0 - alpha_bars[1:] / alpha_bars[:-1]
        betas = np.clip(betas, 1e-8, MAX_BETA)
        alphas = 1.0 - betas
        alpha_bars = np.concatenate([[1.0], np.cumprod(alphas)])
        return cls(t_steps=t_steps, betas=betas, alphas=alphas, alpha_bars=alpha_bars)

    def strided_timesteps(self, steps: int) -> list[tuple[int, int]]:
        """Evenly strided (t, t_prev) pairs from T down to 0 for sampling."""
        if not 1 <= steps <= self.t_steps:
            raise ValidationError(
                f"sampling steps must lie in [1, {self.t_steps}], got {steps}"
            )
        ts = np.unique(np.linspace(0, self.t_steps, steps + 1).round().astype(int))
        ts = ts[::-1]  # T ... 0
        return [(int(ts[i]), int(ts[i + 1])) for i in range(len(ts) - 1)]

    def to_json_dict(self) -> dict:
        return {"kind": "cosine", "t_steps": self.t_steps}

    @classmethod
    def from_json_dict(cls, data: dict) -> "DiffusionSchedule":
        if data.get("kind") != "cosine":
            raise ValidationError(f"unknown schedule kind {data.get('kind')!r}")
        return cls.cosine(t_steps=int(data["t_steps"]))
