"""Shared generator/retriever model, its vocabulary, and checkpoints."""

from .checkpoint import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from .model import (
    ModelConfig,
    QueryEmbedding,
    RefEmbedding,
    ScholarLM,
    reference_token_ids,
)
from .vocab import (
    BOS,
    CITE_CLOSE,
    CITE_OPEN,
    EOS,
    PAD,
    REF_CLOSE,
    REF_OPEN,
    RET,
    SPECIAL_TOKENS,
    UNK,
    Vocabulary,
    ref_id_of,
    ref_key_token,
    spacing_prefix,
    tokenize,
)

__all__ = [
    "BOS",
    "CHECKPOINT_VERSION",
    "CITE_CLOSE",
    "CITE_OPEN",
    "EOS",
    "ModelConfig",
    "PAD",
    "QueryEmbedding",
    "REF_CLOSE",
    "REF_OPEN",
    "RET",
    "RefEmbedding",
    "SPECIAL_TOKENS",
    "ScholarLM",
    "UNK",
    "Vocabulary",
    "load_checkpoint",
    "ref_id_of",
    "ref_key_token",
    "reference_token_ids",
    "spacing_prefix",
    "save_checkpoint",
    "tokenize",
]
