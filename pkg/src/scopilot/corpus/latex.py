"""Parser for the supported LaTeX subset.

Recognized: \\title{...} with nested braces, the abstract environment,
\\section{Introduction} and \\section{Related Work} bodies, and \\cite{k1,k2}
marks. Comments run from an unescaped % to end of line. Unknown commands are
stripped to their argument text; commands without arguments vanish. This is
deliberately not a LaTeX grammar; it is the subset the corpus promises.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ParseFailure

_SECTION_NAMES = {"introduction": "introduction", "related work": "related_work"}

_CITE_RE = re.compile(r"\\cite\{([^}]*)\}")
_COMMENT_RE = re.compile(r"(?<!\\)%.*")
_COMMAND_WITH_ARG_RE = re.compile(r"\\[a-zA-Z]+\*?\s*\{([^{}]*)\}")
_BARE_COMMAND_RE = re.compile(r"\\[a-zA-Z]+\*?")


@dataclass
class CiteMark:
    keys: list[str]


@dataclass
class TextChunk:
    text: str


@dataclass
class Section:
    name: str  # "introduction" | "related_work"
    segments: list = field(default_factory=list)  # TextChunk | CiteMark

    def cite_keys(self) -> list[str]:
        return [k for seg in self.segments if isinstance(seg, CiteMark) for k in seg.keys]


@dataclass
class ParsedTex:
    title: str
    abstract: str
    sections: list[Section]


def strip_comments(source: str) -> str:
    return "\n".join(_COMMENT_RE.sub("", line) for line in source.split("\n"))


def _balanced_arg(source: str, open_idx: int) -> tuple[str, int]:
    """Return (content, index after closing brace) for the brace at open_idx."""
    depth = 0
    for i in range(open_idx, len(source)):
        c = source[i]
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return source[open_idx + 1 : i], i + 1
    raise ParseFailure("unbalanced braces in source")


def _find_command_arg(source: str, command: str) -> str | None:
    m = re.search(r"\\" + command + r"\s*\{", source)
    if not m:
        return None
    content, _ = _balanced_arg(source, m.end() - 1)
    return content


def clean_text(text: str) -> str:
    """Strip commands to their arguments, drop braces, collapse whitespace."""
    prev = None
    while prev != text:
        prev = text
        text = _COMMAND_WITH_ARG_RE.sub(r"\1", text)
    text = _BARE_COMMAND_RE.sub(" ", text)
    text = text.replace("{", "").replace("}", "")
    text = text.replace("~", " ")
    return re.sub(r"\s+", " ", text).strip()


def _segment_body(body: str) -> list:
    """Split a section body into text chunks and cite marks, in order."""
    segments = []
    cursor = 0
    for m in _CITE_RE.finditer(body):
        before = clean_text(body[cursor : m.start()])
        if before:
            segments.append(TextChunk(before))
        keys = [k.strip() for k in m.group(1).split(",") if k.strip()]
        segments.append(CiteMark(keys))
        cursor = m.end()
    tail = clean_text(body[cursor:])
    if tail:
        segments.append(TextChunk(tail))
    return segments


def parse_tex(source: str) -> ParsedTex:
    src = strip_comments(source)

    raw_title = _find_command_arg(src, "title")
    if raw_title is None or not clean_text(raw_title):
        raise ParseFailure("source has no \\title")
    title = clean_text(raw_title)

    abstract = ""
    m = re.search(r"\\begin\{abstract\}(.*?)\\end\{abstract\}", src, re.DOTALL)
    if m:
        abstract = clean_text(m.group(1))

    sections: list[Section] = []
    sec_heads = list(re.finditer(r"\\section\*?\s*\{", src))
    for i, head in enumerate(sec_heads):
        name_raw, body_start = _balanced_arg(src, head.end() - 1)
        name = clean_text(name_raw).lower()
        if name not in _SECTION_NAMES:
            continue
        body_end = sec_heads[i + 1].start() if i + 1 < len(sec_heads) else len(src)
        end_doc = src.find(r"\end{document}", body_start)
        if 0 <= end_doc < body_end:
            body_end = end_doc
        sections.append(
            Section(
                name=_SECTION_NAMES[name],
                segments=_segment_body(src[body_start:body_end]),
            )
        )
    return ParsedTex(title=title, abstract=abstract, sections=sections)
