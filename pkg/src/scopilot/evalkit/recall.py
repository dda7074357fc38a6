"""Recall@k over masked queries and the dense-vs-lexical comparison report."""

import json

from ..errors import ContractError, EvaluationError, StaleIndexError
from ..scholarlm import BOS, RET

# headline numbers from the full-scale system, shown in report legends for
# context; nothing at desk scale is expected to reproduce them
PAPER_SCALE_LEGEND = {
    "dense_recall_at_1": 0.401,
    "dense_recall_at_10": 0.648,
}


def recall_at_k(ranked_ids, gold_ids, k: int) -> float:
    """Fraction of queries whose gold id appears in the top k of its ranking."""
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    if len(ranked_ids) != len(gold_ids):
        raise ContractError(
            f"{len(ranked_ids)} rankings vs {len(gold_ids)} gold ids"
        )
    if not gold_ids:
        raise EvaluationError("recall over an empty query set")
    hits = sum(1 for ids, gold in zip(ranked_ids, gold_ids) if gold in ids[:k])
    return hits / len(gold_ids)


class DenseRetriever:
    """Full masked context -> query embedding -> exact cosine search."""

    def __init__(self, model, index):
        self.model = model
        self.index = index
        self.checksum = index.checksum

    def rank(self, query, k: int) -> list[str]:
        ctx = query.context
        limit = self.model.config.max_context
        if len(ctx) + 1 > limit:
            # keep the most recent window; streams always start with BOS
            ctx = [BOS] + ctx[-(limit - 2):]
        q = self.model.embed_query(ctx + [RET])
        return self.index.search(q, k).ref_ids()


class LexicalRetriever:
    """Last-sentence text -> BM25. Empty sentences simply retrieve nothing."""

    def __init__(self, index):
        self.index = index
        self.checksum = ""

    def rank(self, query, k: int) -> list[str]:
        return self.index.search(query.last_sentence, k).ref_ids()


def compare_retrievers(
    queries, retrievers: dict, ks, expected_checksum: str | None = None
) -> dict:
    """Per-retriever recall@k table over one shared query set."""
    if not retrievers:
        raise EvaluationError("no retrievers to compare")
    if not queries:
        raise EvaluationError("no queries to evaluate")
    ks = sorted(set(ks))
    if expected_checksum is not None:
        for name, r in retrievers.items():
            have = getattr(r, "checksum", "")
            if have and have != expected_checksum:
                raise StaleIndexError(
                    f"retriever {name!r} was built for {have}, corpus is {expected_checksum}"
                )
    gold = [q.gold_ref_id for q in queries]
    table: dict[str, dict[int, float]] = {}
    for name, r in retrievers.items():
        rankings = [r.rank(q, max(ks)) for q in queries]
        table[name] = {k: recall_at_k(rankings, gold, k) for k in ks}
    return {
        "n_queries": len(queries),
        "ks": ks,
        "retrievers": table,
        "legend": {"paper_scale": dict(PAPER_SCALE_LEGEND)},
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_to_csv(report: dict) -> str:
    lines = ["retriever,k,recall"]
    for name in sorted(report["retrievers"]):
        for k in report["ks"]:
            lines.append(f"{name},{k},{report['retrievers'][name][k]:.6f}")
    return "\n".join(lines) + "\n"
