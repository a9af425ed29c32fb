"""Door-based room connectivity analysis on the 256-scale vector plan."""

from __future__ import annotations

import logging
from typing import Optional

from .vectorize import DoorSegment, VectorPlan, point_in_polygon

log = logging.getLogger(__name__)

PROBE_DEPTH = 2  # pixels to search on each side of a door


def _room_at(vp: VectorPlan, x: float, y: float) -> Optional[int]:
    for i, (_, verts) in enumerate(vp.rooms):
        if point_in_polygon(x, y, verts):
            return i
    return None


def _side_room(vp: VectorPlan, door: DoorSegment, sign: int) -> Optional[int]:
    mx, my = door.midpoint
    px, py = door.perpendicular
    for depth in range(1, PROBE_DEPTH + 1):
        room = _room_at(vp, mx + sign * depth * px, my + sign * depth * py)
        if room is not None:
            return room
    return None


def analyze_connections(vp: VectorPlan) -> list[tuple[int, int]]:
    """Room index pairs joined by an interior door.

    A door links the two rooms whose interiors lie within PROBE_DEPTH
    pixels on opposite sides of its centerline; doors without two distinct
    adjacent rooms are logged and skipped. Pairs are deduplicated.
    """
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for door in vp.doors:
        a = _side_room(vp, door, -1)
        b = _side_room(vp, door, +1)
        if a is None or b is None or a == b:
            log.warning("door at %s has fewer than 2 adjacent rooms, skipped",
                        door.midpoint)
            continue
        pair = (min(a, b), max(a, b))
        if pair not in seen:
            seen.add(pair)
            pairs.append(pair)
    return pairs
