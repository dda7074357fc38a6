"""Retrieval backends: exact dense cosine search and an Okapi BM25 baseline."""

from .base import Hit, SearchResult, rank_hits
from .bm25 import B, K1, Bm25Index, bm25_from_metadata
from .dense import (
    INDEX_VERSION,
    DenseIndex,
    build_checksum,
    build_dense_index,
    file_digest,
)

__all__ = [
    "B",
    "Bm25Index",
    "DenseIndex",
    "Hit",
    "INDEX_VERSION",
    "K1",
    "SearchResult",
    "bm25_from_metadata",
    "build_checksum",
    "build_dense_index",
    "file_digest",
    "rank_hits",
]
