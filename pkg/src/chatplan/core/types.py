"""Canonical room vocabulary and the validated rooms document.

Field names and enum spellings are part of the wire format (rooms JSON) and
must not be renamed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Optional


class ChatplanError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ChatplanError):
    """A document, grid, or request violates a structural invariant."""


class RoomType(str, Enum):
    LivingRoom = "LivingRoom"
    MasterRoom = "MasterRoom"
    Kitchen = "Kitchen"
    Bathroom = "Bathroom"
    DiningRoom = "DiningRoom"
    CommonRoom = "CommonRoom"
    SecondRoom = "SecondRoom"
    ChildRoom = "ChildRoom"
    StudyRoom = "StudyRoom"
    GuestRoom = "GuestRoom"
    Balcony = "Balcony"
    Entrance = "Entrance"
    Storage = "Storage"


class LocationType(str, Enum):
    """Compass location within the outline; row 0 of rasters is north."""

    north = "north"
    northwest = "northwest"
    west = "west"
    southwest = "southwest"
    south = "south"
    southeast = "southeast"
    east = "east"
    northeast = "northeast"
    center = "center"


class SizeType(str, Enum):
    """Share of the outline area, ordered XL > L > M > S > XS."""

    XL = "XL"
    L = "L"
    M = "M"
    S = "S"
    XS = "XS"


ROOM_TYPES: tuple[RoomType, ...] = tuple(RoomType)
LOCATION_TYPES: tuple[LocationType, ...] = tuple(LocationType)
SIZE_TYPES: tuple[SizeType, ...] = tuple(SizeType)

# PlanGrid category index for each room type; 0 is background/exterior.
CATEGORY_OF_TYPE: dict[RoomType, int] = {t: i + 1 for i, t in enumerate(ROOM_TYPES)}
TYPE_OF_CATEGORY: dict[int, RoomType] = {i + 1: t for i, t in enumerate(ROOM_TYPES)}
NUM_ROOM_CHANNELS = len(ROOM_TYPES)


@dataclass(frozen=True)
class RoomSpec:
    """One room of a rooms document.

    ``link`` holds names of connected rooms; connectivity is undirected, so
    documents normalize it to be symmetric.
    """

    name: str
    link: tuple[str, ...] = ()
    type: Optional[RoomType] = None
    location: Optional[LocationType] = None
    size: Optional[SizeType] = None

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("room name must be a non-empty string")
        object.__setattr__(self, "link", tuple(self.link))

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name}
        if self.type is not None:
            out["type"] = self.type.value
        out["link"] = list(self.link)
        if self.location is not None:
            out["location"] = self.location.value
        if self.size is not None:
            out["size"] = self.size.value
        return out


@dataclass(frozen=True)
class RoomsDocument:
    """Ordered, validated list of rooms.

    Construction validates names and link targets and symmetrizes the link
    relation (a single directed mention links both ends). Room order is
    canonical: conditioning rows and attention columns index by it.
    """

    rooms: tuple[RoomSpec, ...]

    def __post_init__(self) -> None:
        rooms = tuple(self.rooms)
        if not rooms:
            raise ValidationError("document must contain at least one room")
        names = [r.name for r in rooms]
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise ValidationError(f"duplicate room name: {name!r}")
            seen.add(name)
        for r in rooms:
            for target in r.link:
                if target == r.name:
                    raise ValidationError(f"room {r.name!r} links to itself")
                if target not in seen:
                    raise ValidationError(
                        f"room {r.name!r} links to unknown room {target!r}"
                    )
        object.__setattr__(self, "rooms", _symmetrize(rooms))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rooms)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def to_json_dict(self) -> dict[str, Any]:
        return {"rooms": [r.to_json_dict() for r in self.rooms]}

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "RoomsDocument":
        """Strict parse: enum values must be exact. Fuzzy repair lives in
        the prompt pipeline, not here."""
        if not isinstance(data, dict) or "rooms" not in data:
            raise ValidationError('rooms JSON must be an object with a "rooms" key')
        rooms = []
        for rec in data["rooms"]:
            if not isinstance(rec, dict):
                raise ValidationError("each room must be a JSON object")
            if "name" not in rec:
                raise ValidationError("room record missing required field: name")
            if "link" not in rec:
                raise ValidationError("room record missing required field: link")
            link = rec["link"]
            if not isinstance(link, list) or not all(isinstance(x, str) for x in link):
                raise ValidationError("room link must be a list of room names")
            rooms.append(
                RoomSpec(
                    name=rec["name"],
                    link=tuple(link),
                    type=_parse_enum(RoomType, rec.get("type"), "type"),
                    location=_parse_enum(LocationType, rec.get("location"), "location"),
                    size=_parse_enum(SizeType, rec.get("size"), "size"),
                )
            )
        return cls(rooms=tuple(rooms))

    @classmethod
    def from_json(cls, text: str) -> "RoomsDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid rooms JSON: {exc}") from exc
        return cls.from_json_dict(data)


def _parse_enum(enum_cls: type, value: Any, field_name: str):
    if value is None:
        return None
    try:
        return enum_cls(value)
    except ValueError:
        raise ValidationError(
            f"illegal {field_name} value {value!r}; legal values: "
            f"{[e.value for e in enum_cls]}"
        ) from None


def _symmetrize(rooms: tuple[RoomSpec, ...]) -> tuple[RoomSpec, ...]:
    """Union of directed link mentions, preserving first-mention order."""
    links: dict[str, list[str]] = {r.name: list(r.link) for r in rooms}
    for r in rooms:
        for target in r.link:
            if r.name not in links[target]:
                links[target].append(r.name)
    out = []
    for r in rooms:
        deduped = tuple(dict.fromkeys(links[r.name]))
        out.append(
            RoomSpec(
                name=r.name,
                link=deduped,
                type=r.type,
                location=r.location,
                size=r.size,
            )
        )
    return tuple(out)


def document_from_rooms(rooms: Iterable[RoomSpec]) -> RoomsDocument:
    return RoomsDocument(rooms=tuple(rooms))
