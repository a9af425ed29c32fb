"""Extraction prompt construction: user text + the output schema."""

from __future__ import annotations

import json
from typing import Optional

from ..core.types import LocationType, RoomType, RoomsDocument, SizeType

# The structured-output contract handed to the LLM. Field names, enum
# values, and the required lists are the wire format and must not drift.
OUTPUT_SCHEMA: dict = {
    "properties": {
        "rooms": {
            "title": "Rooms",
            "type": "array",
            "items": {"$ref": "#/definitions/Room"},
        }
    },
    "required": ["rooms"],
    "definitions": {
        "RoomType": {
            "title": "RoomType",
            "description": "An enumeration.",
            "enum": [t.value for t in RoomType],
        },
        "LocationType": {
            "title": "LocationType",
            "description": "An enumeration.",
            "enum": [t.value for t in LocationType],
        },
        "SizeType": {
            "title": "SizeType",
            "description": "An enumeration.",
            "enum": [t.value for t in SizeType],
        },
        "Room": {
            "title": "Room",
            "type": "object",
            "properties": {
                "name": {
                    "title": "Name",
                    "description": "The name of the room. Ensure it is unique.",
                    "type": "string",
                },
                "type": {
                    "description": "The type of the room.",
                    "allOf": [{"$ref": "#/definitions/RoomType"}],
                },
                "link": {
                    "title": "Link",
                    "description": "The names of the rooms this room is connected to.",
                    "type": "array",
                    "items": {"type": "string"},
                },
                "location": {
                    "description": (
                        "The location of the room within the layout. "
                        "Top represents the north, bottom represents the south."
                    ),
                    "allOf": [{"$ref": "#/definitions/LocationType"}],
                },
                "size": {
                    "description": (
                        "The size of the room, calculated as a proportion "
                        "of the entire layout outline."
                    ),
                    "allOf": [{"$ref": "#/definitions/SizeType"}],
                },
            },
            "required": ["name", "link"],
        },
    },
}


def build_extraction_prompt(
    user_text: str, previous_document: Optional[RoomsDocument] = None
) -> str:
    """Combine the user's text with the output schema; in edit mode the
    previous rooms JSON is included with an instruction to modify it."""
    if not user_text or not user_text.strip():
        raise ValueError("user_text must be non-empty")
    schema = json.dumps(OUTPUT_SCHEMA, indent=2)
    parts = [
        "Extract the rooms of a residential floor plan from the user's"
        " description.",
        "Respond with a single JSON object that conforms to this schema"
        " (the schema describes the meaning of each attribute and its"
        " legal values):",
        schema,
        "Only use attribute values listed in the schema enumerations."
        " Omit type, location, or size when the description does not"
        " state them. Every room mentioned as connected to another must"
        " appear in that room's link list.",
    ]
    if previous_document is not None:
        parts += [
            "This is an edit of an existing design. The current rooms JSON is:",
            previous_document.to_json(indent=2),
            "Apply the user's requested changes to this JSON instead of"
            " designing from scratch: keep every room and attribute the"
            " user did not ask to change, including room names.",
        ]
    parts += ["User description:", user_text.strip(), "JSON:"]
    return "\n\n".join(parts)
