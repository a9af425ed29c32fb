"""Per-room attribute embedding.

Every attribute is drawn from a closed enum, so the default encoder is a
set of learned lookup tables (index 0 = unspecified) concatenated and
projected to the model width. Any module mapping a RoomsDocument to an
(N, d_model) matrix can replace it to plug in a pretrained text encoder.
"""

from __future__ import annotations

import torch
from torch import nn

from ..core.types import (
    LOCATION_TYPES,
    ROOM_TYPES,
    SIZE_TYPES,
    RoomsDocument,
)

_TYPE_INDEX = {t: i + 1 for i, t in enumerate(ROOM_TYPES)}
_LOCATION_INDEX = {t: i + 1 for i, t in enumerate(LOCATION_TYPES)}
_SIZE_INDEX = {t: i + 1 for i, t in enumerate(SIZE_TYPES)}


def attribute_indices(doc: RoomsDocument) -> torch.Tensor:
    """(N, 3) long tensor of [type, location, size] indices; 0 = unspecified."""
    rows = [
        (
            _TYPE_INDEX.get(room.type, 0),
            _LOCATION_INDEX.get(room.location, 0),
            _SIZE_INDEX.get(room.size, 0),
        )
        for room in doc.rooms
    ]
    return torch.tensor(rows, dtype=torch.long)


class AttributeEmbedder(nn.Module):
    """Concatenated type/location/size lookups projected to d_model."""

    def __init__(self, d_attr: int = 64, d_model: int = 256) -> None:
        super().__init__()
        self.d_attr = d_attr
        self.d_model = d_model
        self.type_table = nn.Embedding(len(ROOM_TYPES) + 1, d_attr)
        self.location_table = nn.Embedding(len(LOCATION_TYPES) + 1, d_attr)
        self.size_table = nn.Embedding(len(SIZE_TYPES) + 1, d_attr)
        self.project = nn.Linear(3 * d_attr, d_model)

    def forward(self, doc: RoomsDocument) -> torch.Tensor:
        idx = attribute_indices(doc).to(self.type_table.weight.device)
        parts = torch.cat(
            [
                self.type_table(idx[:, 0]),
                self.location_table(idx[:, 1]),
                self.size_table(idx[:, 2]),
            ],
            dim=1,
        )
        return self.project(parts)
