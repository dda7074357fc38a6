"""Word-level vocabulary with control tokens for retrieval and citation.

Tokenization is deterministic: lowercase, alphanumeric runs are words, every
other non-space character is its own token. The vocabulary is built from a
corpus with a minimum frequency cut; rarer words map to UNK. Control tokens
hold fixed ids 0-8 so masks and the decoding loop can test ids directly, and
each reference key gets a single dedicated token so a citation is atomic.
"""

from __future__ import annotations

import re

from ..errors import ValidationError

BOS, EOS, PAD, UNK, RET, CITE_OPEN, CITE_CLOSE, REF_OPEN, REF_CLOSE = range(9)

SPECIAL_TOKENS = (
    "[BOS]",
    "[EOS]",
    "[PAD]",
    "[UNK]",
    "[RET]",
    "[CITE]",
    "[/CITE]",
    "[REF]",
    "[/REF]",
)

_WORD_RE = re.compile(r"[a-z0-9]+|[^\sa-z0-9]")
_REF_KEY_RE = re.compile(r"^<key:(.+)>$")

# punctuation renders attached to the preceding word
_NO_SPACE_BEFORE = set(".,;:!?)]}%'\"")
_NO_SPACE_AFTER = set("([{$\"'")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase words and single-character punctuation."""
    return _WORD_RE.findall(text.lower())


def spacing_prefix(prev: str | None, token: str) -> str:
    """The separator detokenization puts before `token` given its predecessor."""
    if prev is None or token in _NO_SPACE_BEFORE or prev in _NO_SPACE_AFTER:
        return ""
    return " "


def ref_key_token(ref_id: str) -> str:
    return f"<key:{ref_id}>"


def ref_id_of(token: str) -> str | None:
    m = _REF_KEY_RE.match(token)
    return m.group(1) if m else None


class Vocabulary:
    """Bijection between token strings and contiguous ids.

    Layout: specials at 0-8, then one key token per reference id (sorted),
    then corpus words ordered by descending frequency with alphabetical ties.
    """

    def __init__(self, tokens: list[str]):
        if tuple(tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ValidationError("vocabulary must start with the 9 reserved control tokens")
        self._tokens = list(tokens)
        self._ids = {t: i for i, t in enumerate(self._tokens)}
        if len(self._ids) != len(self._tokens):
            raise ValidationError("vocabulary contains duplicate tokens")

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, texts, ref_ids, min_freq: int = 2) -> "Vocabulary":
        """Count words across texts and keep those seen at least min_freq times."""
        counts: dict[str, int] = {}
        for text in texts:
            for tok in tokenize(text):
                counts[tok] = counts.get(tok, 0) + 1
        words = sorted(
            (t for t, c in counts.items() if c >= min_freq),
            key=lambda t: (-counts[t], t),
        )
        keys = [ref_key_token(r) for r in sorted(set(ref_ids))]
        return cls(list(SPECIAL_TOKENS) + keys + words)

    # -- mapping -----------------------------------------------------------

    def __len__(self):
        return len(self._tokens)

    def __contains__(self, token: str):
        return token in self._ids

    def id_of(self, token: str) -> int:
        """Exact lookup; raises on unknown tokens (use encode for UNK fallback)."""
        try:
            return self._ids[token]
        except KeyError:
            raise ValidationError(f"token not in vocabulary: {token!r}") from None

    def token_of(self, idx: int) -> str:
        return self._tokens[idx]

    def encode(self, text: str) -> list[int]:
        """Tokenize prose; out-of-vocabulary words become UNK."""
        return [self._ids.get(t, UNK) for t in tokenize(text)]

    def encode_stream(self, tokens: list[str]) -> list[int]:
        """Map an already-tokenized stream (may contain control/key tokens).

        Control and key tokens must exist exactly; ordinary words fall back
        to UNK like encode().
        """
        out = []
        for t in tokens:
            i = self._ids.get(t)
            if i is None:
                if t in SPECIAL_TOKENS or ref_id_of(t) is not None:
                    raise ValidationError(f"control token not in vocabulary: {t!r}")
                i = UNK
            out.append(i)
        return out

    def decode(self, ids) -> list[str]:
        return [self._tokens[i] for i in ids]

    def ref_key_ids(self) -> list[int]:
        return [i for i, t in enumerate(self._tokens) if ref_id_of(t) is not None]

    # -- rendering ---------------------------------------------------------

    def detokenize(self, ids) -> str:
        """Render word/punctuation ids back to readable text.

        Control tokens are skipped; key tokens render as their ref-id. Spacing
        is heuristic: no space before closing punctuation, none after opening
        brackets.
        """
        pieces: list[str] = []
        prev = None
        for i in ids:
            tok = self._tokens[i]
            if tok in SPECIAL_TOKENS:
                continue
            rid = ref_id_of(tok)
            if rid is not None:
                tok = rid
            pieces.append(spacing_prefix(prev, tok) + tok)
            prev = tok
        return "".join(pieces)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"tokens": self._tokens}

    @classmethod
    def from_json(cls, payload: dict) -> "Vocabulary":
        return cls(payload["tokens"])
