"""Okapi BM25 over tokenized reference titles and abstracts."""

import math

from ..errors import ValidationError
from ..scholarlm import tokenize
from .base import SearchResult, rank_hits

K1 = 1.2
B = 0.75


class Bm25Index:
    """Term statistics for a fixed document set; immutable after build."""

    def __init__(self, ref_ids, term_freqs, doc_lens, idf, avgdl):
        self.ref_ids = ref_ids
        self.term_freqs = term_freqs  # per doc: term -> count
        self.doc_lens = doc_lens
        self.idf = idf
        self.avgdl = avgdl

    def __len__(self):
        return len(self.ref_ids)

    @classmethod
    def build(cls, docs) -> "Bm25Index":
        """docs: iterable of (ref_id, token list)."""
        docs = sorted(docs, key=lambda d: d[0])
        if not docs:
            raise ValidationError("cannot build BM25 over an empty corpus")
        seen = set()
        for rid, _ in docs:
            if rid in seen:
                raise ValidationError(f"duplicate ref_id in BM25 build: {rid!r}")
            seen.add(rid)
        term_freqs = []
        df: dict[str, int] = {}
        for _, toks in docs:
            tf: dict[str, int] = {}
            for t in toks:
                tf[t] = tf.get(t, 0) + 1
            term_freqs.append(tf)
            for t in tf:
                df[t] = df.get(t, 0) + 1
        n = len(docs)
        idf = {t: math.log((n - c + 0.5) / (c + 0.5) + 1.0) for t, c in df.items()}
        doc_lens = [len(toks) for _, toks in docs]
        avgdl = sum(doc_lens) / n
        return cls([rid for rid, _ in docs], term_freqs, doc_lens, idf, avgdl)

    def search(self, query, k: int) -> SearchResult:
        """query: raw text or a token list; empty terms -> flagged empty result."""
        terms = tokenize(query) if isinstance(query, str) else list(query)
        if not terms:
            return SearchResult(hits=[], warning="empty query")
        scores = []
        for tf, dl in zip(self.term_freqs, self.doc_lens):
            norm = K1 * (1.0 - B + B * dl / self.avgdl)
            s = 0.0
            for t in terms:
                c = tf.get(t, 0)
                if c:
                    s += self.idf[t] * c * (K1 + 1.0) / (c + norm)
            scores.append(s)
        return SearchResult(hits=rank_hits(self.ref_ids, scores, k))


def bm25_from_metadata(refs) -> Bm25Index:
    """Index every reference's title + abstract tokens."""
    return Bm25Index.build(
        (rid, tokenize(refs.get(rid).title) + tokenize(refs.get(rid).abstract))
        for rid in refs.ref_ids()
    )
