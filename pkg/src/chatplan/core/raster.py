"""64x64 raster representations: outline mask, categorical plan, channel tensor.

Axis convention everywhere: index [row, col] with row 0 at the top (north);
polygon vertices are (x, y) = (col, row) on the lattice of cell corners.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .types import NUM_ROOM_CHANNELS, ValidationError

GRID_SIZE = 64


@dataclass(frozen=True)
class OutlineMask:
    """Binary interior mask; 1 = interior, 0 = exterior."""

    grid: np.ndarray  # (64, 64) uint8

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid)
        if grid.shape != (GRID_SIZE, GRID_SIZE):
            raise ValidationError(f"outline must be {GRID_SIZE}x{GRID_SIZE}")
        if not np.isin(grid, (0, 1)).all():
            raise ValidationError("outline values must be 0 or 1")
        if not grid.any():
            raise ValidationError("outline must have at least one interior cell")
        object.__setattr__(self, "grid", grid.astype(np.uint8))
        self.grid.setflags(write=False)

    @property
    def interior_count(self) -> int:
        return int(self.grid.sum())


@dataclass(frozen=True)
class PlanGrid:
    """Categorical plan raster: 0 = background, 1..13 = room types."""

    grid: np.ndarray  # (64, 64) uint8

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid)
        if grid.shape != (GRID_SIZE, GRID_SIZE):
            raise ValidationError(f"plan must be {GRID_SIZE}x{GRID_SIZE}")
        if grid.min() < 0 or grid.max() > NUM_ROOM_CHANNELS:
            raise ValidationError(
                f"plan categories must lie in [0, {NUM_ROOM_CHANNELS}]"
            )
        object.__setattr__(self, "grid", grid.astype(np.uint8))
        self.grid.setflags(write=False)

    def matches_outline(self, mask: OutlineMask) -> bool:
        """True when every exterior cell is background."""
        return not np.any((mask.grid == 0) & (self.grid != 0))


def grid_to_tensor(plan: PlanGrid) -> np.ndarray:
    """One-hot-style encoding: channel c is +1 where category c+1 occupies
    the cell and -1 elsewhere. Background cells are all -1."""
    grid = plan.grid
    tensor = -np.ones((NUM_ROOM_CHANNELS, GRID_SIZE, GRID_SIZE), dtype=np.float32)
    for c in range(NUM_ROOM_CHANNELS):
        tensor[c][grid == c + 1] = 1.0
    return tensor


def tensor_to_grid(x: np.ndarray, mask: OutlineMask) -> PlanGrid:
    """Per-pixel argmax over channels inside the mask; exterior is 0."""
    x = np.asarray(x)
    if x.shape != (NUM_ROOM_CHANNELS, GRID_SIZE, GRID_SIZE):
        raise ValidationError(
            f"tensor must be {NUM_ROOM_CHANNELS}x{GRID_SIZE}x{GRID_SIZE}"
        )
    grid = (np.argmax(x, axis=0) + 1).astype(np.uint8)
    grid[mask.grid == 0] = 0
    return PlanGrid(grid=grid)


def fill_polygon(vertices: Sequence[Sequence[float]], size: int = GRID_SIZE) -> np.ndarray:
    """Even-odd fill of a closed polygon over a size x size cell grid.

    A cell is filled when its center lies inside the polygon under the
    even-odd rule (ray cast toward +x). Vertices are (x, y) corner
    coordinates; the closing edge back to the first vertex is implicit.
    """
    verts = [(float(x), float(y)) for x, y in vertices]
    if len(verts) < 3:
        raise ValidationError("polygon needs at least 3 vertices")
    out = np.zeros((size, size), dtype=np.uint8)
    edges = list(zip(verts, verts[1:] + verts[:1]))
    for row in range(size):
        cy = row + 0.5
        crossings = []
        for (x0, y0), (x1, y1) in edges:
            if (y0 > cy) != (y1 > cy):
                x_at = x0 + (cy - y0) * (x1 - x0) / (y1 - y0)
                crossings.append(x_at)
        if not crossings:
            continue
        crossings.sort()
        # Parity of crossings strictly to the right of the cell center.
        xs = np.arange(size) + 0.5
        count = np.searchsorted(crossings, xs, side="right")
        inside = (len(crossings) - count) % 2 == 1
        out[row, inside] = 1
    return out


def outline_from_polygon(vertices: Sequence[Sequence[float]]) -> OutlineMask:
    """Rasterize a closed polygon on the 64-lattice into an outline mask."""
    return OutlineMask(grid=fill_polygon(vertices, GRID_SIZE))


def full_mask() -> OutlineMask:
    return OutlineMask(grid=np.ones((GRID_SIZE, GRID_SIZE), dtype=np.uint8))
