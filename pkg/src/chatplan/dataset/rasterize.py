"""Vector plan -> 64x64 training rasters."""

from __future__ import annotations

import numpy as np

from ..core.raster import GRID_SIZE, OutlineMask, PlanGrid, fill_polygon
from ..core.types import CATEGORY_OF_TYPE, ValidationError
from .vectorize import VectorPlan, polygon_area

SCALE = 4  # 256 -> 64


def _scale_vertex(v: float) -> int:
    # Half-up rounding: deterministic and independent of banker's rounding.
    return int(np.floor(v / SCALE + 0.5))


def rasterize64(vp: VectorPlan) -> tuple[OutlineMask, PlanGrid]:
    """Scale polygons to the 64 lattice and fill them even-odd.

    Cells claimed by several rooms after rounding go to the smallest room
    (by 256-scale area), so slivers cannot swallow small rooms. The
    outline is the union of all room fills.
    """
    if not vp.rooms:
        raise ValidationError("vector plan has no rooms")
    fills = []
    for room_type, verts in vp.rooms:
        scaled = [(_scale_vertex(x), _scale_vertex(y)) for x, y in verts]
        fills.append((room_type, polygon_area(verts), fill_polygon(scaled, GRID_SIZE)))

    outline = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.uint8)
    for _, _, fill in fills:
        outline |= fill
    if not outline.any():
        raise ValidationError("vector plan rasterizes to an empty interior")

    grid = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.uint8)
    for room_type, _, fill in sorted(fills, key=lambda item: -item[1]):
        grid[fill == 1] = CATEGORY_OF_TYPE[room_type]
    return OutlineMask(grid=outline), PlanGrid(grid=grid)
