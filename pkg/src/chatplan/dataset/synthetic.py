"""Deterministic synthetic floor-plan rasters in the annotated 256 format.

Stands in for the real training corpus: rectangular outlines on a 4-pixel
lattice are BSP-split into rooms, door markers straddle shared walls, and
the whole raster uses the documented category coding (0 exterior, 1..13
rooms, 14 door).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..core.types import CATEGORY_OF_TYPE, RoomType
from .vectorize import DOOR_CATEGORY, RASTER_SIZE

LATTICE = 4
MIN_ROOM_SIDE = 36
DOOR_LENGTH = 10
MIN_SHARED_WALL = 16

_TYPE_POOL = (
    RoomType.MasterRoom, RoomType.Kitchen, RoomType.Bathroom,
    RoomType.SecondRoom, RoomType.Balcony, RoomType.DiningRoom,
    RoomType.StudyRoom, RoomType.CommonRoom, RoomType.ChildRoom,
    RoomType.GuestRoom, RoomType.Entrance, RoomType.Storage,
)


@dataclass(frozen=True)
class _Rect:
    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height


def _split(rect: _Rect, count: int, rng: np.random.Generator) -> list[_Rect]:
    if count <= 1:
        return [rect]
    vertical = rect.width >= rect.height
    side = rect.width if vertical else rect.height
    lo = MIN_ROOM_SIDE // LATTICE
    hi = side // LATTICE - lo
    if hi <= lo:  # too small to split further
        return [rect]
    cut = int(rng.integers(lo, hi + 1)) * LATTICE
    if vertical:
        a = _Rect(rect.x0, rect.y0, rect.x0 + cut, rect.y1)
        b = _Rect(rect.x0 + cut, rect.y0, rect.x1, rect.y1)
    else:
        a = _Rect(rect.x0, rect.y0, rect.x1, rect.y0 + cut)
        b = _Rect(rect.x0, rect.y0 + cut, rect.x1, rect.y1)
    count_a = max(1, min(count - 1, round(count * a.area / rect.area)))
    return _split(a, count_a, rng) + _split(b, count - count_a, rng)


def _shared_wall(a: _Rect, b: _Rect):
    """(orientation, coordinate, lo, hi) of a shared boundary, or None."""
    if a.x1 == b.x0 or b.x1 == a.x0:
        x = a.x1 if a.x1 == b.x0 else b.x1
        lo, hi = max(a.y0, b.y0), min(a.y1, b.y1)
        if hi - lo >= MIN_SHARED_WALL:
            return ("v", x, lo, hi)
    if a.y1 == b.y0 or b.y1 == a.y0:
        y = a.y1 if a.y1 == b.y0 else b.y1
        lo, hi = max(a.x0, b.x0), min(a.x1, b.x1)
        if hi - lo >= MIN_SHARED_WALL:
            return ("h", y, lo, hi)
    return None


def generate_annotated_raster(seed: int) -> np.ndarray:
    """One synthetic 256x256 annotated plan, fully determined by the seed."""
    rng = np.random.default_rng(seed)
    margin = lambda: int(rng.integers(5, 12)) * LATTICE
    outline = _Rect(margin(), margin(),
                    RASTER_SIZE - margin(), RASTER_SIZE - margin())
    rooms = _split(outline, int(rng.integers(4, 9)), rng)

    order = sorted(range(len(rooms)), key=lambda i: -rooms[i].area)
    types: dict[int, RoomType] = {order[0]: RoomType.LivingRoom}
    pool = list(rng.permutation(len(_TYPE_POOL)))
    for slot, i in enumerate(order[1:]):
        types[i] = _TYPE_POOL[pool[slot % len(pool)]]

    raster = np.zeros((RASTER_SIZE, RASTER_SIZE), dtype=np.uint8)
    for i, rect in enumerate(rooms):
        raster[rect.y0:rect.y1, rect.x0:rect.x1] = CATEGORY_OF_TYPE[types[i]]

    # Doors: spanning tree over wall adjacency plus a few extras.
    walls = {}
    for i in range(len(rooms)):
        for j in range(i + 1, len(rooms)):
            wall = _shared_wall(rooms[i], rooms[j])
            if wall is not None:
                walls[(i, j)] = wall
    connected = {order[0]}
    doors: list[tuple[int, int]] = []
    edges = list(walls)
    rng.shuffle(edges)
    while len(connected) < len(rooms):
        progressed = False
        for i, j in edges:
            if (i in connected) != (j in connected):
                doors.append((i, j))
                connected |= {i, j}
                progressed = True
        if not progressed:  # isolated room without a long-enough wall
            break
    for pair in edges:
        if pair not in doors and rng.random() < 0.25:
            doors.append(pair)

    for i, j in doors:
        orientation, coord, lo, hi = walls[(min(i, j), max(i, j))]
        half = DOOR_LENGTH // 2
        center = int(rng.integers(lo + half + 2, hi - half - 1))
        if orientation == "v":
            raster[center - half:center + half, coord - 1:coord + 1] = DOOR_CATEGORY
        else:
            raster[coord - 1:coord + 1, center - half:center + half] = DOOR_CATEGORY
    return raster


def write_fixture_directory(out_dir: str | Path, count: int, seed: int = 0) -> list[Path]:
    """Write ``count`` grayscale fixture PNGs (pixel value = category)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        raster = generate_annotated_raster(seed * 100_003 + i)
        path = out_dir / f"plan_{i:04d}.png"
        Image.fromarray(raster, mode="L").save(path)
        paths.append(path)
    return paths
