"""Session state for the generate-pause-retrieve-resume loop."""

from dataclasses import dataclass, field

from ..errors import ValidationError
from ..index import Hit, SearchResult

GENERATING = "generating"
PAUSED = "paused-at-ret"
DONE = "done"

SECTIONS = ("introduction", "related_work")


@dataclass
class DecodeConfig:
    mode: str = "greedy"            # or "temperature"
    temperature: float = 1.0
    max_new_tokens: int = 64
    candidate_k: int = 5
    inject_content: bool = True
    inject_budget: int = 64         # token cap on injected title+abstract
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in ("greedy", "temperature"):
            raise ValidationError(f"decode mode must be greedy or temperature, got {self.mode!r}")
        if self.mode == "temperature" and self.temperature <= 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if self.max_new_tokens < 0 or self.candidate_k < 1 or self.inject_budget < 1:
            raise ValidationError("max_new_tokens >= 0, candidate_k >= 1, inject_budget >= 1")

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "temperature": self.temperature,
            "max_new_tokens": self.max_new_tokens,
            "candidate_k": self.candidate_k,
            "inject_content": self.inject_content,
            "inject_budget": self.inject_budget,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "DecodeConfig":
        cfg = cls(**payload)
        cfg.validate()
        return cfg


@dataclass
class GenerationEvent:
    kind: str      # token | retrieval-pause | citation-resolved | done
    payload: object

    def to_json(self) -> dict:
        return {"kind": self.kind, "payload": self.payload}


@dataclass
class SessionState:
    session_id: str
    context: list[int]
    decode: DecodeConfig
    status: str = GENERATING
    pending: SearchResult | None = None
    accepted: list[str] = field(default_factory=list)
    section: str = "introduction"
    rng_state: dict | None = None   # sampler state, serialized for replay

    def validate(self) -> None:
        if self.status not in (GENERATING, PAUSED, DONE):
            raise ValidationError(f"unknown session status {self.status!r}")
        if (self.pending is not None) != (self.status == PAUSED):
            raise ValidationError("pending candidates must be present exactly when paused")
        if self.section not in SECTIONS:
            raise ValidationError(
                f"section must be one of {list(SECTIONS)}, got {self.section!r}"
            )

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "context": list(self.context),
            "decode": self.decode.to_json(),
            "status": self.status,
            "pending": (
                None
                if self.pending is None
                else {
                    "hits": [{"ref_id": h.ref_id, "score": h.score} for h in self.pending.hits],
                    "warning": self.pending.warning,
                }
            ),
            "accepted": list(self.accepted),
            "section": self.section,
            "rng_state": self.rng_state,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "SessionState":
        pending = payload.get("pending")
        state = cls(
            session_id=payload["session_id"],
            context=list(payload["context"]),
            decode=DecodeConfig.from_json(payload["decode"]),
            status=payload["status"],
            pending=(
                None
                if pending is None
                else SearchResult(
                    hits=[Hit(h["ref_id"], h["score"]) for h in pending["hits"]],
                    warning=pending.get("warning"),
                )
            ),
            accepted=list(payload.get("accepted", [])),
            section=payload.get("section", "introduction"),
            rng_state=payload.get("rng_state"),
        )
        state.validate()
        return state
