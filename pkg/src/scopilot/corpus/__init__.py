"""Citation corpus pipeline: LaTeX/BibTeX parsing, title matching,
integration into training examples, and the synthetic-corpus generator."""

from .bibtex import BibRecord, extract_citation_title, parse_bib
from .integrate import CorpusStats, build_vocabulary, integrate, save_stats
from .latex import CiteMark, ParsedTex, Section, TextChunk, clean_text, parse_tex
from .metadata import (
    MetadataIndex,
    RefEntry,
    load_metadata,
    match_reference,
    normalize_title,
    save_metadata,
)
from .papers import BibEntry, PaperRecord, match_records, parse_paper, render_paper
from .pipeline import build_corpus, parse_directory
from .synth import GoldCite, SynthCorpus, synth_corpus, write_synth

__all__ = [
    "BibEntry",
    "BibRecord",
    "CiteMark",
    "CorpusStats",
    "GoldCite",
    "MetadataIndex",
    "PaperRecord",
    "ParsedTex",
    "RefEntry",
    "Section",
    "SynthCorpus",
    "TextChunk",
    "build_corpus",
    "build_vocabulary",
    "clean_text",
    "extract_citation_title",
    "integrate",
    "load_metadata",
    "match_records",
    "match_reference",
    "normalize_title",
    "parse_bib",
    "parse_directory",
    "parse_paper",
    "parse_tex",
    "render_paper",
    "save_metadata",
    "save_stats",
    "synth_corpus",
    "write_synth",
]
