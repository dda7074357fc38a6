"""Training examples and batch assembly with in-batch negatives.

An example is one paper rendered to token ids with a per-token loss mask,
the positions of its retrieval events, and the index ranges of injected
reference spans. Batch assembly turns each retrieval event into a query slot
whose negatives are the other citations of the same paper (hard) plus the
citations of the other papers in the batch (easy).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import ValidationError
from ..scholarlm.vocab import RET


@dataclass
class CitationEvent:
    pos: int  # index of the RET token in the example's token sequence
    ref_id: str


@dataclass
class TrainingExample:
    paper_id: str
    tokens: list[int]
    loss_mask: list[int]
    events: list[CitationEvent] = field(default_factory=list)
    spans: list[tuple[int, int]] = field(default_factory=list)  # inclusive [REF_OPEN, REF_CLOSE]

    def validate(self) -> None:
        n = len(self.tokens)
        if len(self.loss_mask) != n:
            raise ValidationError(
                f"{self.paper_id}: loss_mask length {len(self.loss_mask)} != tokens {n}"
            )
        for ev in self.events:
            if not 0 <= ev.pos < n or self.tokens[ev.pos] != RET:
                raise ValidationError(
                    f"{self.paper_id}: event position {ev.pos} does not hold the RET token"
                )
        for a, b in self.spans:
            if not 0 <= a <= b < n:
                raise ValidationError(f"{self.paper_id}: span ({a}, {b}) out of bounds")
            if any(self.loss_mask[i] for i in range(a, b + 1)):
                raise ValidationError(
                    f"{self.paper_id}: loss mask must be 0 inside an injected span"
                )

    def cited_ref_ids(self) -> list[str]:
        seen = []
        for ev in self.events:
            if ev.ref_id not in seen:
                seen.append(ev.ref_id)
        return seen

    def to_json(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "tokens": self.tokens,
            "loss_mask": self.loss_mask,
            "events": [{"pos": e.pos, "ref_id": e.ref_id} for e in self.events],
            "spans": [list(s) for s in self.spans],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "TrainingExample":
        return cls(
            paper_id=payload["paper_id"],
            tokens=list(payload["tokens"]),
            loss_mask=list(payload["loss_mask"]),
            events=[CitationEvent(e["pos"], e["ref_id"]) for e in payload["events"]],
            spans=[tuple(s) for s in payload["spans"]],
        )


def save_examples(path, examples: list[TrainingExample]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(json.dumps(ex.to_json(), ensure_ascii=False) + "\n")


def load_examples(path) -> list[TrainingExample]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(TrainingExample.from_json(json.loads(line)))
    return out


def truncate_example(ex: TrainingExample, max_len: int) -> TrainingExample:
    """Clip an over-long example at a clean boundary.

    The cut never lands inside an injected span, and never strands a RET
    whose span/cite tokens were cut away (the event would have no positive
    context to learn from).
    """
    if len(ex.tokens) <= max_len:
        return ex
    cut = max_len
    moved = True
    while moved and cut > 0:
        moved = False
        for a, b in ex.spans:
            if a < cut <= b:
                cut = a
                moved = True
        # a span is preceded by its RET and followed by the 3-token cite span;
        # cutting inside that tail strands the event
        for ev in ex.events:
            span = next(((a, b) for a, b in ex.spans if a == ev.pos + 1), None)
            tail_end = span[1] + 3 if span else ev.pos
            if ev.pos < cut <= tail_end:
                cut = ev.pos
                moved = True
    return TrainingExample(
        paper_id=ex.paper_id,
        tokens=ex.tokens[:cut],
        loss_mask=ex.loss_mask[:cut],
        events=[e for e in ex.events if e.pos < cut],
        spans=[s for s in ex.spans if s[1] < cut],
    )


@dataclass
class QuerySlot:
    example_index: int  # position within the batch
    position: int       # RET index in that example
    positive: str
    hard_negatives: list[str]
    easy_negatives: list[str]

    @property
    def negatives(self) -> list[str]:
        return self.hard_negatives + self.easy_negatives


@dataclass
class BatchPlan:
    examples: list[TrainingExample]
    slots: list[QuerySlot]
    ref_ids: list[str]   # every ref the step must embed, sorted
    single_paper: bool   # flagged: no easy negatives exist


def build_batch(examples: list[TrainingExample]) -> BatchPlan:
    """Resolve every citation event into (positive, hard negs, easy negs).

    Hard negatives are the same paper's other cited refs; easy negatives come
    from the rest of the batch. The positive is excluded from both sets and
    duplicates are dropped by ref-id.
    """
    per_paper = [ex.cited_ref_ids() for ex in examples]
    slots = []
    for i, ex in enumerate(examples):
        others_in_batch = sorted(
            {r for j, cited in enumerate(per_paper) if j != i for r in cited}
        )
        for ev in ex.events:
            hard = sorted(r for r in per_paper[i] if r != ev.ref_id)
            easy = [r for r in others_in_batch if r != ev.ref_id and r not in hard]
            slots.append(
                QuerySlot(
                    example_index=i,
                    position=ev.pos,
                    positive=ev.ref_id,
                    hard_negatives=hard,
                    easy_negatives=easy,
                )
            )
    needed = sorted({s.positive for s in slots} | {r for s in slots for r in s.negatives})
    return BatchPlan(
        examples=examples,
        slots=slots,
        ref_ids=needed,
        single_paper=len(examples) < 2,
    )
