"""Result types shared by the dense and lexical retrieval backends."""

from dataclasses import dataclass, field


@dataclass
class Hit:
    ref_id: str
    score: float


@dataclass
class SearchResult:
    hits: list[Hit] = field(default_factory=list)
    warning: str | None = None

    def ref_ids(self) -> list[str]:
        return [h.ref_id for h in self.hits]

    def __len__(self):
        return len(self.hits)


def rank_hits(ids, scores, k: int) -> list[Hit]:
    """Top-k by score descending; equal scores break by ascending ref-id."""
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    return [Hit(ids[i], float(scores[i])) for i in order[:k]]
