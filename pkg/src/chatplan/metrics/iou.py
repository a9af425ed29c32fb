"""Micro/Macro intersection-over-union between categorical plans.

Micro aggregates intersections and unions over all room types before
dividing; Macro averages the per-type ratios over the R types present in
either plan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.raster import PlanGrid
from ..core.types import NUM_ROOM_CHANNELS, ValidationError


@dataclass(frozen=True)
class IoUReport:
    intersections: dict[int, int]  # category -> I_r, only types present
    unions: dict[int, int]  # category -> U_r
    micro: float
    macro: float
    num_types: int

    def per_type_ratio(self, category: int) -> float:
        return self.intersections[category] / self.unions[category]


def iou(pred: PlanGrid, truth: PlanGrid) -> IoUReport:
    """Pixelwise IoU over room categories 1..13; background is ignored.

    Types absent from both plans are excluded from R. A type present in
    only one plan has I_r = 0 and still counts toward R.
    """
    a, b = pred.grid, truth.grid
    if a.shape != b.shape:
        raise ValidationError("plans must have equal shape")
    intersections: dict[int, int] = {}
    unions: dict[int, int] = {}
    for category in range(1, NUM_ROOM_CHANNELS + 1):
        in_a = a == category
        in_b = b == category
        union = int(np.count_nonzero(in_a | in_b))
        if union == 0:
            continue
        intersections[category] = int(np.count_nonzero(in_a & in_b))
        unions[category] = union
    num_types = len(unions)
    if num_types == 0:
        return IoUReport({}, {}, micro=1.0, macro=1.0, num_types=0)
    micro = sum(intersections.values()) / sum(unions.values())
    macro = sum(intersections[c] / unions[c] for c in unions) / num_types
    return IoUReport(intersections, unions, micro=micro, macro=macro,
                     num_types=num_types)
