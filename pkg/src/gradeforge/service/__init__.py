"""HTTP service for session-oriented grading."""

from .app import GradingService, ServiceConfig, create_app
from .store import SessionStore, UnknownSessionError

__all__ = [
    "GradingService",
    "ServiceConfig",
    "SessionStore",
    "UnknownSessionError",
    "create_app",
]
