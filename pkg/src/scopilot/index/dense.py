"""Exact cosine top-k retrieval over reference embeddings.

The corpus stays small enough that a full scan is both the implementation
and the correctness oracle; anything approximate would only add ways to be
wrong. Rows are unit vectors, so the scan is one matrix-vector product.
"""

import hashlib

import numpy as np

from ..errors import ContractError, ValidationError
from ..nncore import read_container, write_container
from .base import Hit, SearchResult, rank_hits

INDEX_VERSION = "scopilot-idx-v1"

_UNIT_TOL = 1e-5


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def build_checksum(checkpoint_id: str, metadata_id: str) -> str:
    """Identity of the (weights, metadata) pair an index was built from."""
    return hashlib.sha256(f"{checkpoint_id}\n{metadata_id}".encode()).hexdigest()[:16]


class DenseIndex:
    def __init__(self, ref_ids: list[str], matrix: np.ndarray, checksum: str = ""):
        if matrix.ndim != 2 or matrix.shape[0] != len(ref_ids):
            raise ValidationError("index matrix shape does not match the ref-id table")
        self.ref_ids = list(ref_ids)
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self.checksum = checksum

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.ref_ids)

    @classmethod
    def build(cls, embeddings, checksum: str = "") -> "DenseIndex":
        """Stack RefEmbeddings into an index; duplicate ref-ids are an error."""
        embeddings = list(embeddings)
        if not embeddings:
            raise ValidationError("cannot build an index from zero embeddings")
        dims = {e.vector.shape for e in embeddings}
        if len(dims) != 1 or len(dims.pop()) != 1:
            raise ValidationError("embeddings must share one 1-D dimension")
        seen = set()
        for e in embeddings:
            if e.ref_id in seen:
                raise ValidationError(f"duplicate ref_id in index build: {e.ref_id!r}")
            seen.add(e.ref_id)
        embeddings = sorted(embeddings, key=lambda e: e.ref_id)
        matrix = np.stack([e.vector for e in embeddings]).astype(np.float32)
        norms = np.linalg.norm(matrix, axis=1)
        bad = np.where(np.abs(norms - 1.0) > _UNIT_TOL)[0]
        if bad.size:
            raise ValidationError(
                f"row for {embeddings[bad[0]].ref_id!r} is not unit-norm "
                f"(|v| = {norms[bad[0]]:.6f})"
            )
        return cls([e.ref_id for e in embeddings], matrix, checksum)

    def search(self, query, k: int) -> SearchResult:
        """Exact top-k by cosine; ties broken by ascending ref-id."""
        if k < 1:
            raise ContractError(f"k must be >= 1, got {k}")
        vec = np.asarray(getattr(query, "vector", query), dtype=np.float32)
        if vec.shape != (self.dim,):
            raise ContractError(
                f"query dimension {vec.shape} does not match index dimension ({self.dim},)"
            )
        scores = self.matrix @ vec
        return SearchResult(hits=rank_hits(self.ref_ids, scores, k))

    def save(self, path) -> None:
        write_container(
            path,
            INDEX_VERSION,
            {"rows": self.matrix},
            meta={
                "dim": self.dim,
                "count": len(self.ref_ids),
                "checksum": self.checksum,
                "ref_ids": self.ref_ids,
            },
        )

    @classmethod
    def load(cls, path) -> "DenseIndex":
        meta, arrays = read_container(path, expect_version=INDEX_VERSION)
        idx = cls(meta["ref_ids"], arrays["rows"], meta["checksum"])
        if idx.dim != meta["dim"] or len(idx) != meta["count"]:
            raise ValidationError(f"index header disagrees with stored rows in {path}")
        return idx


def build_dense_index(model, refs, checksum: str = "") -> DenseIndex:
    """Embed every reference with the given model and index the results."""
    embs = [model.embed_reference(refs.get(rid)) for rid in refs.ref_ids()]
    return DenseIndex.build(embs, checksum=checksum)
