"""chatplan: chat-driven floor-plan generation and editing.

Natural-language room descriptions become validated room graphs, a
graph-conditioned diffusion model turns them into 64x64 plans inside a
drawn outline, and saved cross-attention maps support localized edits.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    LocationType,
    OutlineMask,
    PlanGrid,
    RoomSpec,
    RoomType,
    RoomsDocument,
    SizeType,
    ValidationError,
    build_room_graph,
)
