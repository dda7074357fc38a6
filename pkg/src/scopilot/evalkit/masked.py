"""Masked-context queries: everything strictly before a citation event.

One query per citation event. The stored context never contains the event's
RET token or anything after it, so no retriever can see the answer. Lexical
baselines additionally get only the last sentence of the context, cut at the
final ., ! or ? token.
"""

from dataclasses import dataclass

from ..scholarlm import Vocabulary

_TERMINATORS = {".", "!", "?"}


@dataclass
class MaskedQuery:
    paper_id: str
    event_index: int
    context: list[int]        # tokens strictly before the event position
    last_sentence: str
    gold_ref_id: str


def last_sentence_text(context: list[int], vocab: Vocabulary) -> str:
    start = 0
    for i, tok in enumerate(context):
        if vocab.token_of(tok) in _TERMINATORS:
            start = i + 1
    return vocab.detokenize(context[start:])


def make_masked_queries(examples, vocab: Vocabulary) -> tuple[list[MaskedQuery], int]:
    """Build one query per event; events at position 0 are skipped and counted."""
    queries: list[MaskedQuery] = []
    skipped = 0
    for ex in examples:
        for idx, ev in enumerate(ex.events):
            if ev.pos == 0:
                skipped += 1
                continue
            context = list(ex.tokens[: ev.pos])
            queries.append(
                MaskedQuery(
                    paper_id=ex.paper_id,
                    event_index=idx,
                    context=context,
                    last_sentence=last_sentence_text(context, vocab),
                    gold_ref_id=ev.ref_id,
                )
            )
    return queries, skipped
