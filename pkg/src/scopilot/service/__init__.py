"""HTTP session service over the writing orchestrator."""

from .app import create_app
from .store import ApiSession, SessionStore

__all__ = ["ApiSession", "SessionStore", "create_app"]
