"""File-backed session persistence: one JSON document per session.

Writes are atomic (temp file, fsync, rename) so a crash mid-write can only
ever leave a stale-but-valid previous version plus an ignorable .tmp file,
never a torn session.
"""

import json
import os
import threading
import time
from dataclasses import dataclass, field

from ..errors import ValidationError
from ..orchestrator import SessionState


@dataclass
class ApiSession:
    state: SessionState
    created_at: float
    updated_at: float
    owner: str = ""

    def validate(self) -> None:
        self.state.validate()
        if self.updated_at < self.created_at:
            raise ValidationError("session updated_at precedes created_at")

    def to_json(self) -> dict:
        return {
            "state": self.state.to_json(),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "owner": self.owner,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ApiSession":
        s = cls(
            state=SessionState.from_json(payload["state"]),
            created_at=payload["created_at"],
            updated_at=payload["updated_at"],
            owner=payload.get("owner", ""),
        )
        s.validate()
        return s

    @classmethod
    def fresh(cls, state: SessionState, owner: str = "") -> "ApiSession":
        now = time.time()
        return cls(state=state, created_at=now, updated_at=now, owner=owner)


class SessionStore:
    def __init__(self, data_dir):
        self.data_dir = str(data_dir)
        os.makedirs(self.data_dir, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, session_id: str) -> str:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise ValidationError(f"bad session id {session_id!r}")
        return os.path.join(self.data_dir, f"{session_id}.json")

    def save(self, session: ApiSession) -> None:
        session.updated_at = max(time.time(), session.created_at)
        session.validate()
        path = self._path(session.state.session_id)
        tmp = path + ".tmp"
        with self._lock:
            try:
                with open(tmp, "w", encoding="utf-8") as f:
                    json.dump(session.to_json(), f)
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)

    def get(self, session_id: str) -> ApiSession | None:
        path = self._path(session_id)
        with self._lock:
            if not os.path.exists(path):
                return None
            with open(path, encoding="utf-8") as f:
                return ApiSession.from_json(json.load(f))

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(
                name[: -len(".json")]
                for name in os.listdir(self.data_dir)
                if name.endswith(".json")
            )
