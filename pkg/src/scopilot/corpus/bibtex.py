"""BibTeX entry parsing and title extraction.

Supports @article/@inproceedings/@misc with brace- or quote-delimited field
values (bare numbers allowed, nested braces respected). Title extraction is
a deterministic field read: at this scale the bibliography format is under
our control, so no statistical extraction is needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ParseFailure

_ENTRY_HEAD_RE = re.compile(r"@([a-zA-Z]+)\s*\{\s*([^,\s]+)\s*,")
_FIELD_NAME_RE = re.compile(r"([a-zA-Z][a-zA-Z0-9_-]*)\s*=\s*")

SUPPORTED_KINDS = {"article", "inproceedings", "misc"}


@dataclass
class BibRecord:
    key: str
    kind: str
    raw: str
    fields: dict[str, str] = field(default_factory=dict)


def _read_value(text: str, start: int) -> tuple[str, int]:
    """Read one field value starting at `start`; returns (value, next index)."""
    if start >= len(text):
        raise ParseFailure("truncated BibTeX field value")
    c = text[start]
    if c == "{":
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    return text[start + 1 : i], i + 1
        raise ParseFailure("unbalanced braces in BibTeX value")
    if c == '"':
        i = text.find('"', start + 1)
        if i < 0:
            raise ParseFailure("unterminated quoted BibTeX value")
        return text[start + 1 : i], i + 1
    # bare token (e.g. year = 2024)
    m = re.match(r"[^,}\s]+", text[start:])
    if not m:
        raise ParseFailure(f"cannot read BibTeX value at offset {start}")
    return m.group(0), start + m.end()


def _entry_end(text: str, body_start: int) -> int:
    """Index just past the closing brace of the entry opened before body_start."""
    depth = 1
    for i in range(body_start, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    raise ParseFailure("unterminated BibTeX entry")


def parse_bib(source: str) -> list[BibRecord]:
    records = []
    for head in _ENTRY_HEAD_RE.finditer(source):
        kind = head.group(1).lower()
        key = head.group(2)
        body_start = head.end()
        end = _entry_end(source, body_start)
        body = source[body_start : end - 1]
        fields: dict[str, str] = {}
        pos = 0
        while True:
            m = _FIELD_NAME_RE.search(body, pos)
            if not m:
                break
            value, pos = _read_value(body, m.end())
            fields[m.group(1).lower()] = value
        records.append(BibRecord(key=key, kind=kind, raw=source[head.start() : end], fields=fields))
    return records


def extract_citation_title(entry_text: str) -> str:
    """The title field's value, braces stripped, whitespace collapsed."""
    records = parse_bib(entry_text)
    if not records:
        raise ParseFailure("no BibTeX entry found in text")
    fields = records[0].fields
    if "title" not in fields:
        raise ParseFailure(f"entry {records[0].key!r} has no title field")
    title = fields["title"].replace("{", "").replace("}", "")
    title = re.sub(r"\s+", " ", title).strip()
    if not title:
        raise ParseFailure(f"entry {records[0].key!r} has an empty title")
    return title
