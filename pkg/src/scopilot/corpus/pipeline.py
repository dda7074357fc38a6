"""Directory-level corpus runs: .tex/.bib pairs in, training artifacts out."""

from __future__ import annotations

import json
import os

from ..errors import ParseFailure
from ..scholarlm.vocab import Vocabulary
from ..trainer.batch import TrainingExample, save_examples
from .integrate import CorpusStats, build_vocabulary, integrate, save_stats
from .metadata import MetadataIndex, load_metadata
from .papers import PaperRecord, match_records, parse_paper


def parse_directory(src_dir) -> tuple[list[PaperRecord], int, list[str]]:
    """Parse every <id>.tex/<id>.bib pair; returns (records, seen, failures)."""
    ids = sorted(
        name[:-4] for name in os.listdir(src_dir) if name.endswith(".tex")
    )
    records = []
    failures = []
    for paper_id in ids:
        tex_path = os.path.join(src_dir, paper_id + ".tex")
        bib_path = os.path.join(src_dir, paper_id + ".bib")
        with open(tex_path, encoding="utf-8") as f:
            tex = f.read()
        bib = ""
        if os.path.exists(bib_path):
            with open(bib_path, encoding="utf-8") as f:
                bib = f.read()
        try:
            records.append(parse_paper(tex, bib, paper_id=paper_id))
        except ParseFailure as exc:
            failures.append(f"{paper_id}: {exc}")
    return records, len(ids), failures


def build_corpus(
    src_dir, metadata_path, out_dir=None, min_freq: int = 2
) -> tuple[list[TrainingExample], CorpusStats, Vocabulary, MetadataIndex]:
    """The full pipeline: parse, extract, match, integrate, optionally persist."""
    index = load_metadata(metadata_path)
    records, seen, _failures = parse_directory(src_dir)
    match_records(records, index)
    vocab = build_vocabulary(records, index, min_freq=min_freq)
    examples, stats, vocab = integrate(records, index, vocab=vocab, papers_seen=seen)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        save_examples(os.path.join(out_dir, "examples.jsonl"), examples)
        save_stats(os.path.join(out_dir, "stats.json"), stats)
        with open(os.path.join(out_dir, "vocab.json"), "w", encoding="utf-8") as f:
            json.dump(vocab.to_json(), f, ensure_ascii=False)
            f.write("\n")
    return examples, stats, vocab, index
