"""Localized plan edits by re-running a seeded generation with the saved
cross-attention maps injected during the initial denoising steps.

tau in [0, 1] sets the fraction of steps anchored to the original maps:
tau=0 is a fresh generation, tau=1 maximal structure preservation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

import torch

from ..core.raster import PlanGrid
from ..core.types import RoomsDocument, ValidationError
from .store import AttentionStore

if TYPE_CHECKING:  # avoids a circular import with the engine module
    from ..diffusion.engine import DiffusionEngine


class RoomAction(Enum):
    KEEP_REPLACED = "keep-replaced"
    NEW = "new"
    DELETED = "deleted"


def align_rooms(
    old_names: list[str] | tuple[str, ...],
    new_names: list[str] | tuple[str, ...],
) -> list[tuple[str, RoomAction]]:
    """Match rooms by exact name across the two runs.

    Returns new rooms first (KEEP_REPLACED or NEW, in new order), then the
    DELETED old rooms in old order.
    """
    for names in (old_names, new_names):
        if len(set(names)) != len(names):
            raise ValidationError("room names must be unique for alignment")
    old_set = set(old_names)
    actions = [
        (name, RoomAction.KEEP_REPLACED if name in old_set else RoomAction.NEW)
        for name in new_names
    ]
    new_set = set(new_names)
    actions += [
        (name, RoomAction.DELETED) for name in old_names if name not in new_set
    ]
    return actions


@dataclass(frozen=True)
class EditRequest:
    store: AttentionStore
    new_doc: RoomsDocument
    tau: float
    seed: int
    mode: str = "cutoff"  # "interpolate" reserved, not implemented

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau <= 1.0:
            raise ValidationError("tau must lie in [0, 1]")
        if self.mode not in ("cutoff", "interpolate"):
            raise ValidationError(f"unknown edit mode {self.mode!r}")


def replaced_step_count(tau: float, steps: int) -> int:
    """Number of initial denoising steps whose maps are replaced."""
    return math.ceil(tau * steps)


def edit(engine: "DiffusionEngine", req: EditRequest) -> tuple[PlanGrid, AttentionStore]:
    """Re-run sampling with new conditioning, injecting stored maps.

    For steps s < ceil(tau * S): columns of rooms present in both runs are
    overwritten with the stored columns. When the room sets are identical
    the stored map is used wholesale (bit-exact identity edits); otherwise
    rows are renormalized to sum to 1. Columns of NEW rooms are never
    touched, so new content can emerge; DELETED rooms' stored columns are
    dropped.
    """
    from ..diffusion.engine import SampleRequest  # local: breaks import cycle

    if req.mode == "interpolate":
        raise NotImplementedError(
            "soft-interpolation tau semantics are reserved but not implemented"
        )
    store = req.store
    if req.seed != store.seed:
        raise ValidationError(
            f"edit seed {req.seed} does not match store seed {store.seed}"
        )
    store.check_complete(engine.network.attention_sites)

    new_names = req.new_doc.names
    old_index = {name: i for i, name in enumerate(store.room_names)}
    column_map: list[Optional[int]] = [old_index.get(name) for name in new_names]
    wholesale = set(new_names) == set(store.room_names)
    cutoff = replaced_step_count(req.tau, store.steps)

    def hook_factory(step: int):
        if step >= cutoff:
            return None

        def hook(site: str, probs: torch.Tensor) -> torch.Tensor:
            stored = store.maps[(step, site)]
            if wholesale:
                perm = torch.tensor(column_map, dtype=torch.long)
                return stored[:, :, perm].unsqueeze(0)
            out = probs[0].clone()
            for j, old_j in enumerate(column_map):
                if old_j is not None:
                    out[:, :, j] = stored[:, :, old_j]
            out = out / out.sum(dim=-1, keepdim=True)
            return out.unsqueeze(0)

        return hook

    conditioning = engine.condition(req.new_doc)
    request = SampleRequest(
        outline=store.outline,
        conditioning=conditioning,
        seed=req.seed,
        guidance_scale=store.guidance_scale,
        steps=store.steps,
    )
    return engine.sample(request, hook_factory=hook_factory)
