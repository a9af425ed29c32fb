"""Attribute-accuracy scoring of a parsed document against an annotation.

Rooms are matched greedily: exact name first, then (type, document order)
for the leftovers. The rule is pinned by tests so scores are comparable
across runs of this toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core.types import RoomsDocument, ValidationError


@dataclass(frozen=True)
class ParsingAccuracy:
    type: float
    size: float
    location: float
    matched: int
    annotated: int


def parsing_accuracy(parsed: RoomsDocument, annotated: RoomsDocument) -> ParsingAccuracy:
    """Per-attribute accuracy out of the annotated room count.

    Unmatched annotated rooms count as wrong on every attribute.
    """
    if not annotated.rooms:
        raise ValidationError("annotated document is empty")

    parsed_rooms = list(parsed.rooms)
    annotated_rooms = list(annotated.rooms)
    pairs: list[tuple[int, int]] = []
    used_parsed: set[int] = set()
    used_annotated: set[int] = set()

    parsed_by_name = {r.name: i for i, r in enumerate(parsed_rooms)}
    for j, room in enumerate(annotated_rooms):
        i = parsed_by_name.get(room.name)
        if i is not None and i not in used_parsed:
            pairs.append((i, j))
            used_parsed.add(i)
            used_annotated.add(j)

    for j, room in enumerate(annotated_rooms):
        if j in used_annotated:
            continue
        for i, candidate in enumerate(parsed_rooms):
            if i in used_parsed:
                continue
            if candidate.type == room.type:
                pairs.append((i, j))
                used_parsed.add(i)
                used_annotated.add(j)
                break

    n = len(annotated_rooms)
    hits = {"type": 0, "size": 0, "location": 0}
    for i, j in pairs:
        for attr in hits:
            if getattr(parsed_rooms[i], attr) == getattr(annotated_rooms[j], attr):
                hits[attr] += 1
    return ParsingAccuracy(
        type=hits["type"] / n,
        size=hits["size"] / n,
        location=hits["location"] / n,
        matched=len(pairs),
        annotated=n,
    )
