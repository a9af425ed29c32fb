"""Fixed-palette PNG codecs for plan grids and outline masks.

Plan rasters are indexed-color PNGs whose palette is pinned below
(PALETTE_VERSION); decoding is the exact inverse of encoding.
"""

from __future__ import annotations

import io
import json
from typing import Any, Union

import numpy as np
from PIL import Image

from .raster import GRID_SIZE, OutlineMask, PlanGrid, outline_from_polygon
from .types import ROOM_TYPES, ValidationError

PALETTE_VERSION = 1

# Category index -> RGB. Entry 0 is the background; entries 1..13 follow
# the room-type enum order.
PALETTE: tuple[tuple[int, int, int], ...] = (
    (255, 255, 255),  # 0 background
    (224, 64, 64),    # 1 LivingRoom
    (255, 160, 64),   # 2 MasterRoom
    (160, 96, 64),    # 3 Kitchen
    (96, 160, 224),   # 4 Bathroom
    (224, 96, 160),   # 5 DiningRoom
    (255, 208, 112),  # 6 CommonRoom
    (255, 224, 64),   # 7 SecondRoom
    (160, 224, 96),   # 8 ChildRoom
    (64, 160, 96),    # 9 StudyRoom
    (128, 112, 224),  # 10 GuestRoom
    (96, 208, 208),   # 11 Balcony
    (128, 128, 128),  # 12 Entrance
    (64, 96, 128),    # 13 Storage
)

assert len(PALETTE) == len(ROOM_TYPES) + 1


def _flat_palette() -> list[int]:
    flat = [c for rgb in PALETTE for c in rgb]
    flat += [0] * (768 - len(flat))
    return flat


def encode_plan_png(plan: PlanGrid) -> bytes:
    img = Image.fromarray(plan.grid, mode="P")
    img.putpalette(_flat_palette())
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def decode_plan_png(data: bytes) -> PlanGrid:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise ValidationError(f"not a decodable PNG: {exc}") from exc
    if img.mode != "P":
        raise ValidationError(f"plan PNG must be indexed-color, got mode {img.mode}")
    arr = np.asarray(img)
    if arr.shape != (GRID_SIZE, GRID_SIZE):
        raise ValidationError(f"plan PNG must be {GRID_SIZE}x{GRID_SIZE}")
    if arr.max() >= len(PALETTE):
        raise ValidationError(
            f"unknown palette entry {int(arr.max())}; palette has {len(PALETTE)} entries"
        )
    palette = img.getpalette() or []
    for idx in np.unique(arr):
        rgb = tuple(palette[3 * idx : 3 * idx + 3])
        if rgb != PALETTE[idx]:
            raise ValidationError(
                f"palette entry {int(idx)} is {rgb}, expected {PALETTE[idx]}"
            )
    return PlanGrid(grid=arr.astype(np.uint8))


def encode_outline_png(mask: OutlineMask) -> bytes:
    img = Image.fromarray((mask.grid * 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def decode_outline_png(data: bytes) -> OutlineMask:
    try:
        img = Image.open(io.BytesIO(data)).convert("L")
    except Exception as exc:
        raise ValidationError(f"not a decodable PNG: {exc}") from exc
    arr = np.asarray(img)
    if arr.shape != (GRID_SIZE, GRID_SIZE):
        raise ValidationError(f"outline PNG must be {GRID_SIZE}x{GRID_SIZE}")
    return OutlineMask(grid=(arr > 127).astype(np.uint8))


def load_outline(source: Union[bytes, str, dict, list]) -> OutlineMask:
    """Accepts a binary outline PNG, a polygon JSON string, or an already
    parsed polygon (list of [x, y] lattice vertices / {"polygon": [...]})."""
    if isinstance(source, bytes):
        if source[:8] == b"\x89PNG\r\n\x1a\n":
            return decode_outline_png(source)
        source = source.decode("utf-8")
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"outline is neither a PNG nor JSON: {exc}") from exc
    if isinstance(source, dict):
        source = source.get("polygon")
    if not isinstance(source, list):
        raise ValidationError("outline polygon must be a list of [x, y] vertices")
    return outline_from_polygon(source)


def palette_json() -> dict[str, Any]:
    """Documented category -> color table, for docs and checkpoints."""
    names = ["background"] + [t.value for t in ROOM_TYPES]
    return {
        "version": PALETTE_VERSION,
        "entries": [
            {"category": i, "name": names[i], "rgb": list(PALETTE[i])}
            for i in range(len(PALETTE))
        ],
    }
