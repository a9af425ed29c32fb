"""Size and location labeling of vectorized rooms for JSON generation."""

from __future__ import annotations

from dataclasses import dataclass

from ..core.types import LocationType, RoomSpec, RoomsDocument, SizeType, ValidationError
from .vectorize import VectorPlan, polygon_area, polygon_centroid

# 3x3 location grid, row 0 = north (top of the raster).
_LOCATION_GRID = (
    (LocationType.northwest, LocationType.north, LocationType.northeast),
    (LocationType.west, LocationType.center, LocationType.east),
    (LocationType.southwest, LocationType.south, LocationType.southeast),
)


@dataclass(frozen=True)
class LabelingThresholds:
    """Quantile boundaries of room-area / outline-area for XS..XL."""

    size_bounds: tuple[float, float, float, float] = (0.05, 0.10, 0.15, 0.25)

    def __post_init__(self) -> None:
        bounds = self.size_bounds
        if len(bounds) != 4 or any(not 0 < b < 1 for b in bounds):
            raise ValidationError("size boundaries must be 4 values in (0, 1)")
        if any(bounds[i] >= bounds[i + 1] for i in range(3)):
            raise ValidationError("size boundaries must be strictly increasing")

    def bucket(self, ratio: float) -> SizeType:
        for bound, size in zip(self.size_bounds,
                               (SizeType.XS, SizeType.S, SizeType.M, SizeType.L)):
            if ratio < bound:
                return size
        return SizeType.XL


def _third(value: float, lo: float, hi: float) -> int:
    if hi <= lo:
        return 1
    frac = (value - lo) / (hi - lo)
    return min(2, max(0, int(frac * 3)))


def assign_labels(
    vp: VectorPlan,
    thresholds: LabelingThresholds = LabelingThresholds(),
    links: list[tuple[int, int]] | None = None,
) -> RoomsDocument:
    """Rooms document with sizes, locations, names, and door links.

    Size is the bucket of room-area over total-room-area; location is the
    room centroid's cell in a 3x3 grid over the bounding box of all rooms.
    Names are the type name, suffixed _2, _3, ... for duplicates in raster
    scan order (topmost, then leftmost).
    """
    if not vp.rooms:
        raise ValidationError("vector plan has no rooms")
    order = sorted(
        range(len(vp.rooms)),
        key=lambda i: (
            min(y for _, y in vp.rooms[i][1]),
            min(x for x, _ in vp.rooms[i][1]),
        ),
    )
    areas = [polygon_area(verts) for _, verts in vp.rooms]
    total_area = sum(areas)
    if total_area <= 0:
        raise ValidationError("outline area must be positive")
    xs = [x for _, verts in vp.rooms for x, _ in verts]
    ys = [y for _, verts in vp.rooms for _, y in verts]
    x_lo, x_hi, y_lo, y_hi = min(xs), max(xs), min(ys), max(ys)

    names: dict[int, str] = {}
    type_counts: dict[str, int] = {}
    for i in order:
        base = vp.rooms[i][0].value
        type_counts[base] = type_counts.get(base, 0) + 1
        names[i] = base if type_counts[base] == 1 else f"{base}_{type_counts[base]}"

    link_names: dict[int, list[str]] = {i: [] for i in range(len(vp.rooms))}
    for a, b in links or []:
        link_names[a].append(names[b])
        link_names[b].append(names[a])

    rooms = []
    for i in order:
        room_type, verts = vp.rooms[i]
        cx, cy = polygon_centroid(verts)
        location = _LOCATION_GRID[_third(cy, y_lo, y_hi)][_third(cx, x_lo, x_hi)]
        rooms.append(
            RoomSpec(
                name=names[i],
                link=tuple(link_names[i]),
                type=room_type,
                location=location,
                size=thresholds.bucket(areas[i] / total_area),
            )
        )
    return RoomsDocument(rooms=tuple(rooms))
