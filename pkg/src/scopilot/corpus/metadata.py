"""Reference metadata: the citable universe and title-based lookup.

The index enforces unique ref-ids and answers "which reference has exactly
this title" under a fixed normalization (lowercase, punctuation to spaces,
collapsed whitespace). Ambiguity is treated as absence: a title shared by two
references matches neither.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import ValidationError

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


@dataclass
class RefEntry:
    ref_id: str
    title: str
    abstract: str = ""
    year: int | None = None

    def to_json(self) -> dict:
        out = {"ref_id": self.ref_id, "title": self.title, "abstract": self.abstract}
        if self.year is not None:
            out["year"] = self.year
        return out

    @classmethod
    def from_json(cls, payload: dict) -> "RefEntry":
        return cls(
            ref_id=payload["ref_id"],
            title=payload["title"],
            abstract=payload.get("abstract", ""),
            year=payload.get("year"),
        )


def normalize_title(title: str) -> str:
    """Lowercase, non-alphanumerics to spaces, runs collapsed, trimmed."""
    return _NON_ALNUM.sub(" ", title.lower()).strip()


class MetadataIndex:
    def __init__(self, refs: list[RefEntry]):
        self.refs = list(refs)
        self.by_id: dict[str, RefEntry] = {}
        for r in self.refs:
            if r.ref_id in self.by_id:
                raise ValidationError(f"duplicate ref_id in metadata: {r.ref_id!r}")
            self.by_id[r.ref_id] = r
        # normalized title -> ref_id, with collisions poisoned to None
        self._by_title: dict[str, str | None] = {}
        for r in self.refs:
            key = normalize_title(r.title)
            if key in self._by_title:
                self._by_title[key] = None
            else:
                self._by_title[key] = r.ref_id

    def __len__(self):
        return len(self.refs)

    def __contains__(self, ref_id: str):
        return ref_id in self.by_id

    def get(self, ref_id: str) -> RefEntry:
        try:
            return self.by_id[ref_id]
        except KeyError:
            raise ValidationError(f"unknown ref_id: {ref_id!r}") from None

    def match_title(self, title: str) -> str | None:
        """Exact match under normalization; ambiguous or absent -> None."""
        return self._by_title.get(normalize_title(title))

    def ref_ids(self) -> list[str]:
        return sorted(self.by_id)


def match_reference(extracted_title: str, index: MetadataIndex) -> str | None:
    return index.match_title(extracted_title)


def load_metadata(path) -> MetadataIndex:
    refs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                refs.append(RefEntry.from_json(json.loads(line)))
    return MetadataIndex(refs)


def save_metadata(path, refs: list[RefEntry]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in refs:
            f.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
