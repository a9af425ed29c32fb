"""Saved cross-attention maps of one seeded sampling run.

The store carries everything needed to re-run the generation it came from
(outline, seed, guidance, step count), so an edit is reproducible from the
store plus the checkpoint alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import torch

from ..core.raster import OutlineMask
from ..core.types import ChatplanError, ValidationError

STORE_FORMAT = 1


class IncompleteStoreError(ChatplanError):
    """Attention store is missing (step, site) entries for its run."""


@dataclass(frozen=True)
class AttentionStore:
    maps: dict[tuple[int, str], torch.Tensor]  # (step, site) -> (heads, Q, N)
    room_names: tuple[str, ...]
    seed: int
    steps: int
    sites: tuple[str, ...]
    guidance_scale: float
    outline: OutlineMask
    fingerprint: str

    def check_complete(self, sites: Iterable[str] | None = None) -> None:
        expected = tuple(sites) if sites is not None else self.sites
        missing = [
            (s, site)
            for s in range(self.steps)
            for site in expected
            if (s, site) not in self.maps
        ]
        if missing:
            raise IncompleteStoreError(
                f"store missing {len(missing)} entries, first: {missing[0]}"
            )
        n = len(self.room_names)
        for key, value in self.maps.items():
            if value.shape[-1] != n:
                raise IncompleteStoreError(
                    f"map {key} has {value.shape[-1]} columns for {n} rooms"
                )

    def save(self, path: str | Path) -> None:
        payload = {
            "format": STORE_FORMAT,
            "room_names": list(self.room_names),
            "seed": self.seed,
            "steps": self.steps,
            "sites": list(self.sites),
            "guidance_scale": self.guidance_scale,
            "outline": torch.from_numpy(self.outline.grid.copy()),
            "fingerprint": self.fingerprint,
            "maps": {f"{s}|{site}": v for (s, site), v in self.maps.items()},
        }
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, path)

    @classmethod
    def load(cls, path: str | Path) -> "AttentionStore":
        payload = torch.load(path, map_location="cpu", weights_only=True)
        if payload.get("format") != STORE_FORMAT:
            raise ValidationError(
                f"unsupported attention store format {payload.get('format')!r}"
            )
        maps: dict[tuple[int, str], torch.Tensor] = {}
        for key, value in payload["maps"].items():
            step, site = key.split("|", 1)
            maps[(int(step), site)] = value
        return cls(
            maps=maps,
            room_names=tuple(payload["room_names"]),
            seed=int(payload["seed"]),
            steps=int(payload["steps"]),
            sites=tuple(payload["sites"]),
            guidance_scale=float(payload["guidance_scale"]),
            outline=OutlineMask(grid=payload["outline"].numpy()),
            fingerprint=payload["fingerprint"],
        )
