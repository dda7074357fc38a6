"""Paper records: one parsed source document plus its bibliography."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ParseFailure
from .bibtex import extract_citation_title, parse_bib
from .latex import CiteMark, ParsedTex, Section, TextChunk, parse_tex
from .metadata import MetadataIndex, match_reference


@dataclass
class BibEntry:
    bib_key: str
    raw: str
    extracted_title: str | None = None
    matched_ref_id: str | None = None


@dataclass
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    sections: list[Section] = field(default_factory=list)
    bib_entries: list[BibEntry] = field(default_factory=list)

    def cite_keys(self) -> list[str]:
        return [k for sec in self.sections for k in sec.cite_keys()]

    def entry(self, bib_key: str) -> BibEntry | None:
        for e in self.bib_entries:
            if e.bib_key == bib_key:
                return e
        return None


def parse_paper(tex_source: str, bib_source: str, paper_id: str = "") -> PaperRecord:
    """Parse one paper. Papers without a title or with an empty bibliography
    are dropped from the corpus, reported as parse failures."""
    parsed: ParsedTex = parse_tex(tex_source)
    bib_records = parse_bib(bib_source)
    if not bib_records:
        raise ParseFailure(f"{paper_id or 'paper'}: empty bibliography")
    entries = []
    for rec in bib_records:
        try:
            title = extract_citation_title(rec.raw)
        except ParseFailure:
            title = None  # extraction failure recorded; entry stays unmatched
        entries.append(BibEntry(bib_key=rec.key, raw=rec.raw, extracted_title=title))
    return PaperRecord(
        paper_id=paper_id,
        title=parsed.title,
        abstract=parsed.abstract,
        sections=parsed.sections,
        bib_entries=entries,
    )


def match_records(records: list[PaperRecord], index: MetadataIndex) -> None:
    """Fill matched_ref_id on every entry with an extracted title. In place."""
    for rec in records:
        for entry in rec.bib_entries:
            if entry.extracted_title is not None:
                entry.matched_ref_id = match_reference(entry.extracted_title, index)


def render_paper(record: PaperRecord) -> tuple[str, str]:
    """Canonical source for a record; parse(render(parse(x))) is a fixed point."""
    lines = [f"\\title{{{record.title}}}", ""]
    if record.abstract:
        lines += ["\\begin{abstract}", record.abstract, "\\end{abstract}", ""]
    names = {"introduction": "Introduction", "related_work": "Related Work"}
    for sec in record.sections:
        lines.append(f"\\section{{{names[sec.name]}}}")
        parts = []
        for seg in sec.segments:
            if isinstance(seg, TextChunk):
                parts.append(seg.text)
            elif isinstance(seg, CiteMark):
                parts.append("\\cite{" + ",".join(seg.keys) + "}")
        lines.append(" ".join(parts))
        lines.append("")
    tex = "\n".join(lines)
    bib = "\n\n".join(e.raw for e in record.bib_entries)
    return tex, bib
