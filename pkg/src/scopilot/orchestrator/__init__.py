"""Interleaved generate/retrieve/inject inference over a trained checkpoint."""

from .engine import Orchestrator
from .session import (
    DONE,
    GENERATING,
    PAUSED,
    SECTIONS,
    DecodeConfig,
    GenerationEvent,
    SessionState,
)

__all__ = [
    "DONE",
    "DecodeConfig",
    "GENERATING",
    "GenerationEvent",
    "Orchestrator",
    "PAUSED",
    "SECTIONS",
    "SessionState",
]
