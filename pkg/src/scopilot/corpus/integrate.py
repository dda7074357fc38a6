"""Integration: parsed papers + matched references -> training examples.

Each paper becomes one token stream: BOS, title, abstract, then the section
bodies in order. A matched cite mark expands to

    RET  REF_OPEN <cited title+abstract> REF_CLOSE  CITE_OPEN <key> CITE_CLOSE

with the injected span and the key token masked out of the generation loss.
Unmatched cite marks are dropped from the stream but counted in the stats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import IntegrationError
from ..scholarlm.vocab import (
    BOS,
    CITE_CLOSE,
    CITE_OPEN,
    EOS,
    REF_CLOSE,
    REF_OPEN,
    RET,
    Vocabulary,
    ref_key_token,
)
from ..trainer.batch import CitationEvent, TrainingExample
from .latex import CiteMark, TextChunk
from .metadata import MetadataIndex
from .papers import PaperRecord


@dataclass
class CorpusStats:
    papers_seen: int = 0
    papers_parsed: int = 0
    titles_extracted: int = 0
    titles_matched: int = 0

    @property
    def match_rate(self) -> float:
        return self.titles_matched / self.titles_extracted if self.titles_extracted else 0.0

    def mean_citations_per_paper(self) -> float:
        return self.titles_extracted / self.papers_parsed if self.papers_parsed else 0.0

    def mean_matched_per_paper(self) -> float:
        return self.titles_matched / self.papers_parsed if self.papers_parsed else 0.0

    def validate(self) -> None:
        if self.titles_matched > self.titles_extracted:
            raise IntegrationError("matched count exceeds extracted count")

    def to_json(self) -> dict:
        return {
            "papers_seen": self.papers_seen,
            "papers_parsed": self.papers_parsed,
            "titles_extracted": self.titles_extracted,
            "titles_matched": self.titles_matched,
            "mean_citations_per_paper": self.mean_citations_per_paper(),
            "mean_matched_per_paper": self.mean_matched_per_paper(),
            "match_rate": self.match_rate,
        }

    def render_report(self) -> str:
        pct = round(self.match_rate * 100)
        return (
            f"papers: {self.papers_parsed}/{self.papers_seen} parsed\n"
            f"citations: {self.titles_extracted} extracted, "
            f"{self.titles_matched} matched ({pct}%)\n"
            f"per paper: {self.mean_citations_per_paper():.2f} citations, "
            f"{self.mean_matched_per_paper():.2f} matched"
        )


def build_vocabulary(
    records: list[PaperRecord], index: MetadataIndex, min_freq: int = 2
) -> Vocabulary:
    """Vocabulary over everything the model will see: paper prose and the
    reference metadata that gets injected at citation sites."""
    texts = []
    for rec in records:
        texts.append(rec.title)
        texts.append(rec.abstract)
        for sec in rec.sections:
            for seg in sec.segments:
                if isinstance(seg, TextChunk):
                    texts.append(seg.text)
    for ref in index.refs:
        texts.append(ref.title)
        texts.append(ref.abstract)
    return Vocabulary.build(texts, index.ref_ids(), min_freq=min_freq)


def integrate(
    records: list[PaperRecord],
    index: MetadataIndex,
    vocab: Vocabulary | None = None,
    papers_seen: int | None = None,
) -> tuple[list[TrainingExample], CorpusStats, Vocabulary]:
    """Emit one example per paper (sorted by paper id) plus corpus stats."""
    if vocab is None:
        vocab = build_vocabulary(records, index)
    stats = CorpusStats(
        papers_seen=papers_seen if papers_seen is not None else len(records),
        papers_parsed=len(records),
    )
    examples = []
    for rec in sorted(records, key=lambda r: r.paper_id):
        tokens: list[int] = [BOS]
        mask: list[int] = [1]
        events: list[CitationEvent] = []
        spans: list[tuple[int, int]] = []

        def emit_text(text: str) -> None:
            ids = vocab.encode(text)
            tokens.extend(ids)
            mask.extend([1] * len(ids))

        emit_text(rec.title)
        emit_text(rec.abstract)
        for sec in rec.sections:
            for seg in sec.segments:
                if isinstance(seg, TextChunk):
                    emit_text(seg.text)
                    continue
                assert isinstance(seg, CiteMark)
                for key in seg.keys:
                    entry = rec.entry(key)
                    if entry is None:
                        raise IntegrationError(
                            f"{rec.paper_id}: cite key {key!r} missing from bibliography"
                        )
                    if entry.extracted_title is not None:
                        stats.titles_extracted += 1
                    if entry.matched_ref_id is None:
                        continue  # unmatched: dropped from the stream, counted above
                    stats.titles_matched += 1
                    ref = index.get(entry.matched_ref_id)
                    events.append(CitationEvent(pos=len(tokens), ref_id=ref.ref_id))
                    tokens.append(RET)
                    mask.append(1)
                    span_start = len(tokens)
                    injected = (
                        [REF_OPEN] + vocab.encode(ref.title) + vocab.encode(ref.abstract) + [REF_CLOSE]
                    )
                    tokens.extend(injected)
                    mask.extend([0] * len(injected))
                    spans.append((span_start, len(tokens) - 1))
                    tokens.append(CITE_OPEN)
                    mask.append(1)
                    tokens.append(vocab.id_of(ref_key_token(ref.ref_id)))
                    mask.append(0)  # the key is inserted by the orchestrator, never predicted
                    tokens.append(CITE_CLOSE)
                    mask.append(1)
        tokens.append(EOS)
        mask.append(1)
        ex = TrainingExample(
            paper_id=rec.paper_id, tokens=tokens, loss_mask=mask, events=events, spans=spans
        )
        ex.validate()
        examples.append(ex)
    stats.validate()
    return examples, stats, vocab


def save_stats(path, stats: CorpusStats) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(stats.to_json(), f, indent=2)
        f.write("\n")
