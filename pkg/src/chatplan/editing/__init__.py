from .store import AttentionStore, IncompleteStoreError
from .editor import EditRequest, RoomAction, align_rooms, edit, replaced_step_count

__all__ = [
    "AttentionStore",
    "IncompleteStoreError",
    "EditRequest",
    "RoomAction",
    "align_rooms",
    "edit",
    "replaced_step_count",
]
