"""Turn raw LLM room records into a validated RoomsDocument.

Required fields are enforced strictly; optional enum attributes are
repaired by fuzzy matching where possible and otherwise degrade to
unspecified with a logged rejection, so one garbled attribute never sinks
the whole extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

from ..core.types import (
    LocationType,
    RoomSpec,
    RoomType,
    RoomsDocument,
    SizeType,
    ValidationError,
)
from .fuzzy import DEFAULT_MAX_DISTANCE, fuzzy_normalize


class Correction(NamedTuple):
    field: str
    raw_value: str
    corrected_value: str
    distance: int


class Rejection(NamedTuple):
    field: str
    raw_value: str
    reason: str


@dataclass(frozen=True)
class ExtractionResult:
    document: RoomsDocument
    corrections: tuple[Correction, ...] = ()
    rejected: tuple[Rejection, ...] = ()


_ENUM_FIELDS = (
    ("type", RoomType),
    ("location", LocationType),
    ("size", SizeType),
)


def validate_document(
    records: Sequence[dict[str, Any]],
    max_distance: int = DEFAULT_MAX_DISTANCE,
) -> ExtractionResult:
    if not records:
        raise ValidationError("empty room list")

    corrections: list[Correction] = []
    rejected: list[Rejection] = []

    names = _assign_names(records)
    rooms: list[RoomSpec] = []
    for i, record in enumerate(records):
        if not isinstance(record, dict):
            raise ValidationError(f"rooms[{i}] is not an object")
        if "link" not in record:
            raise ValidationError(f"rooms[{i}] missing required field: link")
        raw_link = record["link"]
        if not isinstance(raw_link, list):
            raise ValidationError(f"rooms[{i}].link must be a list of room names")

        attrs: dict[str, Any] = {}
        for attr, enum_cls in _ENUM_FIELDS:
            attrs[attr] = _normalize_enum(
                record.get(attr), enum_cls, f"rooms[{i}].{attr}",
                max_distance, corrections, rejected,
            )
        link = _normalize_links(
            raw_link, names[i], names, f"rooms[{i}].link",
            max_distance, corrections, rejected,
        )
        rooms.append(RoomSpec(name=names[i], link=link, **attrs))

    return ExtractionResult(
        document=RoomsDocument(rooms=tuple(rooms)),
        corrections=tuple(corrections),
        rejected=tuple(rejected),
    )


def _assign_names(records: Sequence[dict[str, Any]]) -> list[str]:
    """Required-name check plus deterministic suffixing of duplicates."""
    names: list[str] = []
    used: set[str] = set()
    for i, record in enumerate(records):
        if not isinstance(record, dict) or "name" not in record:
            raise ValidationError(f"rooms[{i}] missing required field: name")
        name = record["name"]
        if not isinstance(name, str) or not name.strip():
            raise ValidationError(f"rooms[{i}].name must be a non-empty string")
        name = name.strip()
        if name in used:
            k = 2
            while f"{name}_{k}" in used:
                k += 1
            name = f"{name}_{k}"
        used.add(name)
        names.append(name)
    return names


def _normalize_enum(value, enum_cls, field_path, max_distance, corrections, rejected):
    if value is None:
        return None
    if not isinstance(value, str):
        rejected.append(Rejection(field_path, repr(value), "not a string"))
        return None
    legal = [e.value for e in enum_cls]
    match = fuzzy_normalize(value, legal, max_distance)
    if match is None:
        rejected.append(
            Rejection(field_path, value, f"no legal value within distance {max_distance}")
        )
        return None
    corrected, distance = match
    if corrected != value:
        corrections.append(Correction(field_path, value, corrected, distance))
    return enum_cls(corrected)


def _normalize_links(raw_link, own_name, names, field_path, max_distance,
                     corrections, rejected) -> tuple[str, ...]:
    resolved: list[str] = []
    for entry in raw_link:
        if not isinstance(entry, str):
            rejected.append(Rejection(field_path, repr(entry), "not a string"))
            continue
        target = entry.strip()
        if target in names:
            matched = target
        else:
            match = fuzzy_normalize(target, names, max_distance)
            if match is None:
                rejected.append(
                    Rejection(field_path, entry, "links to unknown room")
                )
                continue
            matched, distance = match
            corrections.append(Correction(field_path, entry, matched, distance))
        if matched == own_name:
            rejected.append(Rejection(field_path, entry, "room links to itself"))
            continue
        if matched not in resolved:
            resolved.append(matched)
    return tuple(resolved)
