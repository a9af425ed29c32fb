from .app import ServiceConfig, create_app
from .sessions import (
    HistoryEntry,
    Session,
    SessionBusyError,
    SessionStore,
    UnknownSessionError,
    replay_session,
)

__all__ = [
    "ServiceConfig",
    "create_app",
    "Session",
    "SessionStore",
    "HistoryEntry",
    "SessionBusyError",
    "UnknownSessionError",
    "replay_session",
]
