"""Raster-to-vector extraction for 256x256 annotated floor plans.

Input coding (documents the bundled fixture format; 0 = exterior,
1..13 = room categories in enum order, 14 = interior door). Each room
component is traced to a rectilinear polygon; 1-2 pixel dislocations are
healed by snapping boundary coordinates to the dominant nearby axis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..core.types import NUM_ROOM_CHANNELS, ROOM_TYPES, RoomType, ValidationError

log = logging.getLogger(__name__)

DOOR_CATEGORY = 14
RASTER_SIZE = 256
MIN_COMPONENT_PIXELS = 4
SNAP_TOLERANCE = 2

Point = tuple[int, int]  # (x, y) on the lattice of cell corners


@dataclass(frozen=True)
class DoorSegment:
    """Axis-aligned door footprint, as the centerline of its pixel bbox."""

    start: tuple[float, float]
    end: tuple[float, float]

    @property
    def midpoint(self) -> tuple[float, float]:
        return (
            (self.start[0] + self.end[0]) / 2,
            (self.start[1] + self.end[1]) / 2,
        )

    @property
    def perpendicular(self) -> tuple[float, float]:
        dx = self.end[0] - self.start[0]
        dy = self.end[1] - self.start[1]
        norm = max((dx * dx + dy * dy) ** 0.5, 1e-9)
        return (-dy / norm, dx / norm)


@dataclass(frozen=True)
class VectorPlan:
    rooms: tuple[tuple[RoomType, tuple[Point, ...]], ...]
    doors: tuple[DoorSegment, ...] = ()
    boundary: tuple[Point, ...] = ()


def polygon_area(verts) -> float:
    xs = np.array([v[0] for v in verts], dtype=np.float64)
    ys = np.array([v[1] for v in verts], dtype=np.float64)
    return float(abs(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))) / 2)


def polygon_centroid(verts) -> tuple[float, float]:
    xs = np.array([v[0] for v in verts], dtype=np.float64)
    ys = np.array([v[1] for v in verts], dtype=np.float64)
    cross = xs * np.roll(ys, -1) - np.roll(xs, -1) * ys
    area = cross.sum() / 2
    if abs(area) < 1e-9:
        return float(xs.mean()), float(ys.mean())
    cx = ((xs + np.roll(xs, -1)) * cross).sum() / (6 * area)
    cy = ((ys + np.roll(ys, -1)) * cross).sum() / (6 * area)
    return float(cx), float(cy)


def point_in_polygon(x: float, y: float, verts) -> bool:
    """Even-odd rule with a ray toward +x."""
    inside = False
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            x_at = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x_at > x:
                inside = not inside
    return inside


def trace_boundary(mask: np.ndarray) -> list[Point]:
    """Outer rectilinear boundary of a connected pixel mask.

    Directed boundary edges keep the interior on the right; junctions
    (diagonally touching pixels) resolve by the sharpest clockwise turn.
    Returns the loop of largest area with collinear vertices merged.
    """
    rows, cols = mask.shape
    padded = np.zeros((rows + 2, cols + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask.astype(bool)
    outgoing: dict[Point, list[Point]] = {}

    def add(a: Point, b: Point) -> None:
        outgoing.setdefault(a, []).append(b)

    rs, cs = np.nonzero(padded)
    for r, c in zip(rs - 1, cs - 1):
        if not padded[r, c + 1]:  # no cell above
            add((c, r), (c + 1, r))
        if not padded[r + 2, c + 1]:  # no cell below
            add((c + 1, r + 1), (c, r + 1))
        if not padded[r + 1, c]:  # no cell left
            add((c, r + 1), (c, r))
        if not padded[r + 1, c + 2]:  # no cell right
            add((c + 1, r), (c + 1, r + 1))

    loops: list[list[Point]] = []
    used: set[tuple[Point, Point]] = set()
    for start in sorted(outgoing):
        for first in outgoing[start]:
            if (start, first) in used:
                continue
            loop = [start]
            prev, cur = start, first
            used.add((start, first))
            while cur != start:
                loop.append(cur)
                direction = (cur[0] - prev[0], cur[1] - prev[1])
                # Preference: right turn, straight, left turn (y axis down,
                # so a right/clockwise turn maps (dx, dy) -> (-dy, dx)).
                preferences = [
                    (-direction[1], direction[0]),
                    direction,
                    (direction[1], -direction[0]),
                ]
                nxt = None
                candidates = [
                    p for p in outgoing.get(cur, []) if (cur, p) not in used
                ]
                for d in preferences:
                    want = (cur[0] + d[0], cur[1] + d[1])
                    if want in candidates:
                        nxt = want
                        break
                if nxt is None:
                    raise ValidationError("open boundary while tracing component")
                used.add((cur, nxt))
                prev, cur = cur, nxt
            loops.append(loop)
    if not loops:
        raise ValidationError("cannot trace an empty mask")
    outer = max(loops, key=polygon_area)
    return simplify_collinear(outer)


def simplify_collinear(verts: list[Point]) -> list[Point]:
    # Snapping can leave runs of identical vertices; dedupe them first so a
    # true corner is never judged against its own duplicate.
    deduped: list[Point] = []
    for v in verts:
        if not deduped or deduped[-1] != v:
            deduped.append(v)
    while len(deduped) > 1 and deduped[0] == deduped[-1]:
        deduped.pop()
    out: list[Point] = []
    n = len(deduped)
    for i in range(n):
        prev = deduped[(i - 1) % n]
        cur = deduped[i]
        nxt = deduped[(i + 1) % n]
        d1 = (cur[0] - prev[0], cur[1] - prev[1])
        d2 = (nxt[0] - cur[0], nxt[1] - cur[1])
        if d1[0] * d2[1] - d1[1] * d2[0] != 0:
            out.append(cur)
    return out


def _cluster_axes(weights: dict[int, float], tol: int) -> dict[int, int]:
    """Map each coordinate to the dominant coordinate within tolerance."""
    mapping: dict[int, int] = {}
    for value in sorted(weights, key=lambda v: (-weights[v], v)):
        if value in mapping:
            continue
        mapping[value] = value
        for other in weights:
            if other not in mapping and abs(other - value) <= tol:
                mapping[other] = value
    return mapping


def snap_polygon(verts: list[Point], tol: int = SNAP_TOLERANCE) -> list[Point]:
    """Heal 1-2 pixel jitter by snapping parallel edges to shared axes.

    Coordinates of vertical edges are clustered by x (weighted by edge
    length) and replaced by each cluster's dominant value; horizontal
    edges likewise by y.
    """
    n = len(verts)
    x_weight: dict[int, float] = {}
    y_weight: dict[int, float] = {}
    for i in range(n):
        (x0, y0), (x1, y1) = verts[i], verts[(i + 1) % n]
        if x0 == x1:
            x_weight[x0] = x_weight.get(x0, 0.0) + abs(y1 - y0)
        else:
            y_weight[y0] = y_weight.get(y0, 0.0) + abs(x1 - x0)
    x_map = _cluster_axes(x_weight, tol)
    y_map = _cluster_axes(y_weight, tol)
    snapped = [(x_map.get(x, x), y_map.get(y, y)) for x, y in verts]
    return simplify_collinear(snapped)


def _door_segments(raster: np.ndarray) -> list[DoorSegment]:
    labeled, count = ndimage.label(raster == DOOR_CATEGORY)
    doors = []
    for idx in range(1, count + 1):
        rs, cs = np.nonzero(labeled == idx)
        r0, r1 = rs.min(), rs.max() + 1
        c0, c1 = cs.min(), cs.max() + 1
        if (r1 - r0) >= (c1 - c0):  # door along a vertical wall line
            x_mid = (c0 + c1) / 2
            doors.append(DoorSegment((x_mid, float(r0)), (x_mid, float(r1))))
        else:
            y_mid = (r0 + r1) / 2
            doors.append(DoorSegment((float(c0), y_mid), (float(c1), y_mid)))
    return doors


def vectorize(raster256: np.ndarray) -> VectorPlan:
    """Trace room components, door segments, and the house boundary."""
    raster = np.asarray(raster256)
    if raster.ndim != 2:
        raise ValidationError("annotated raster must be 2-D")
    if raster.max() > DOOR_CATEGORY:
        raise ValidationError(
            f"unknown category {int(raster.max())}; expected 0..{DOOR_CATEGORY}"
        )
    rooms: list[tuple[RoomType, tuple[Point, ...]]] = []
    for category in range(1, NUM_ROOM_CHANNELS + 1):
        labeled, count = ndimage.label(raster == category)
        for idx in range(1, count + 1):
            component = labeled == idx
            pixels = int(component.sum())
            if pixels < MIN_COMPONENT_PIXELS:
                log.warning(
                    "discarding %d-pixel %s component",
                    pixels, ROOM_TYPES[category - 1].value,
                )
                continue
            polygon = snap_polygon(trace_boundary(component))
            rooms.append((ROOM_TYPES[category - 1], tuple(polygon)))
    interior = raster > 0
    boundary = tuple(snap_polygon(trace_boundary(interior))) if interior.any() else ()
    return VectorPlan(rooms=tuple(rooms), doors=tuple(_door_segments(raster)),
                      boundary=boundary)
