from .types import (
    ChatplanError,
    LocationType,
    RoomSpec,
    RoomType,
    RoomsDocument,
    SizeType,
    ValidationError,
    CATEGORY_OF_TYPE,
    NUM_ROOM_CHANNELS,
    ROOM_TYPES,
    TYPE_OF_CATEGORY,
)
from .graph import RoomGraph, build_room_graph
from .raster import (
    GRID_SIZE,
    OutlineMask,
    PlanGrid,
    fill_polygon,
    full_mask,
    grid_to_tensor,
    outline_from_polygon,
    tensor_to_grid,
)
from .codecs import (
    PALETTE,
    PALETTE_VERSION,
    decode_outline_png,
    decode_plan_png,
    encode_outline_png,
    encode_plan_png,
    load_outline,
    palette_json,
)

__all__ = [
    "ChatplanError",
    "ValidationError",
    "RoomType",
    "LocationType",
    "SizeType",
    "RoomSpec",
    "RoomsDocument",
    "RoomGraph",
    "build_room_graph",
    "OutlineMask",
    "PlanGrid",
    "GRID_SIZE",
    "NUM_ROOM_CHANNELS",
    "ROOM_TYPES",
    "CATEGORY_OF_TYPE",
    "TYPE_OF_CATEGORY",
    "grid_to_tensor",
    "tensor_to_grid",
    "fill_polygon",
    "full_mask",
    "outline_from_polygon",
    "encode_plan_png",
    "decode_plan_png",
    "encode_outline_png",
    "decode_outline_png",
    "load_outline",
    "palette_json",
    "PALETTE",
    "PALETTE_VERSION",
]
