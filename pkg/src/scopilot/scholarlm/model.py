"""Decoder-only transformer that serves as generator and retriever at once.

forward() produces next-token logits and final hidden states from one causal
pass. Query vectors are read at [RET] positions and reference vectors at the
[/REF] position of an encoded metadata span, both from the same weights, so
training the contrastive objective shapes the generator and vice versa.

Architecture: learned absolute positions, pre-norm blocks, multi-head causal
attention, GELU feed-forward, final layer norm, untied output head with bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContextOverflowError, ContractError, ValidationError
from ..nncore import tensor as T
from .vocab import REF_CLOSE, REF_OPEN, RET, Vocabulary


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    max_context: int = 256
    d_ff: int = 256

    def validate(self) -> None:
        if self.d_model % self.n_heads != 0:
            raise ValidationError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if self.max_context < 32:
            raise ValidationError(f"max_context must be >= 32, got {self.max_context}")

    def to_json(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "d_model": self.d_model,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "max_context": self.max_context,
            "d_ff": self.d_ff,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ModelConfig":
        return cls(**payload)


@dataclass
class QueryEmbedding:
    vector: np.ndarray
    source_position: int


@dataclass
class RefEmbedding:
    ref_id: str
    vector: np.ndarray


def reference_token_ids(vocab: Vocabulary, title: str, abstract: str) -> list[int]:
    """Token ids for a reference span: [REF] title abstract [/REF]."""
    if not title.strip():
        raise ValidationError("reference has an empty title")
    return [REF_OPEN] + vocab.encode(title) + vocab.encode(abstract) + [REF_CLOSE]


class ScholarLM:
    """The shared model. Weights live in named float32 parameters; a float64
    clone (astype64) exists only to make finite-difference checks meaningful."""

    def __init__(self, config: ModelConfig, vocab: Vocabulary, seed: int = 0, dtype=np.float32):
        config.validate()
        if config.vocab_size != len(vocab):
            raise ValidationError(
                f"config vocab_size {config.vocab_size} != vocabulary size {len(vocab)}"
            )
        self.config = config
        self.vocab = vocab
        self.dtype = dtype
        self._params: dict[str, T.Tensor] = {}
        self._init_params(seed)

    # -- parameters ----------------------------------------------------------

    def _add(self, name: str, data) -> None:
        self._params[name] = T.parameter(data, name, dtype=self.dtype)

    def _init_params(self, seed: int) -> None:
        cfg = self.config
        rng = np.random.default_rng(seed)
        std = 0.02

        def init(*shape):
            return rng.normal(0.0, std, size=shape)

        self._add("tok_embed", init(cfg.vocab_size, cfg.d_model))
        self._add("pos_embed", init(cfg.max_context, cfg.d_model))
        for i in range(cfg.n_layers):
            p = f"layer{i}."
            self._add(p + "ln1_g", np.ones(cfg.d_model))
            self._add(p + "ln1_b", np.zeros(cfg.d_model))
            for nm in ("q", "k", "v", "o"):
                self._add(p + f"w_{nm}", init(cfg.d_model, cfg.d_model))
                self._add(p + f"b_{nm}", np.zeros(cfg.d_model))
            self._add(p + "ln2_g", np.ones(cfg.d_model))
            self._add(p + "ln2_b", np.zeros(cfg.d_model))
            self._add(p + "w_ff1", init(cfg.d_model, cfg.d_ff))
            self._add(p + "b_ff1", np.zeros(cfg.d_ff))
            self._add(p + "w_ff2", init(cfg.d_ff, cfg.d_model))
            self._add(p + "b_ff2", np.zeros(cfg.d_model))
        self._add("lnf_g", np.ones(cfg.d_model))
        self._add("lnf_b", np.zeros(cfg.d_model))
        self._add("w_out", init(cfg.d_model, cfg.vocab_size))
        self._add("b_out", np.zeros(cfg.vocab_size))

    def params(self) -> list[T.Tensor]:
        return list(self._params.values())

    def param(self, name: str) -> T.Tensor:
        return self._params[name]

    def num_params(self) -> int:
        return sum(p.data.size for p in self._params.values())

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.zero_grad()

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self._params.items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        if set(arrays) != set(self._params):
            missing = set(self._params) - set(arrays)
            extra = set(arrays) - set(self._params)
            raise ValidationError(f"parameter set mismatch: missing={missing}, extra={extra}")
        for name, arr in arrays.items():
            p = self._params[name]
            if tuple(arr.shape) != tuple(p.data.shape):
                raise ValidationError(
                    f"shape mismatch for {name}: {arr.shape} vs {p.data.shape}"
                )
            p.data = np.ascontiguousarray(arr, dtype=self.dtype)

    def astype64(self) -> "ScholarLM":
        """A float64 copy sharing nothing; used by gradient checks."""
        clone = ScholarLM(self.config, self.vocab, dtype=np.float64)
        clone.load_state_arrays({n: p.data.astype(np.float64) for n, p in self._params.items()})
        return clone

    # -- forward -------------------------------------------------------------

    def forward(self, tokens, need_logits: bool = True) -> tuple[T.Tensor | None, T.Tensor]:
        """One causal pass. Returns (logits (T, V), final hidden states (T, d)).

        Builds the autodiff graph; inference callers just read .data.
        need_logits=False skips the output head (embedding-only passes).
        """
        ids = np.asarray(tokens, dtype=np.intp)
        if ids.ndim != 1 or ids.size < 1:
            raise ContractError(f"forward expects a non-empty 1-D id sequence")
        n = int(ids.size)
        cfg = self.config
        if n > cfg.max_context:
            raise ContextOverflowError(n, cfg.max_context)

        P = self._params
        x = T.add(T.embedding(P["tok_embed"], ids), T.embedding(P["pos_embed"], np.arange(n)))
        head_dim = cfg.d_model // cfg.n_heads
        inv_sqrt = 1.0 / math.sqrt(head_dim)

        for i in range(cfg.n_layers):
            p = f"layer{i}."
            h = T.layer_norm(x, P[p + "ln1_g"], P[p + "ln1_b"])
            q = T.bias_add(T.matmul(h, P[p + "w_q"]), P[p + "b_q"])
            k = T.bias_add(T.matmul(h, P[p + "w_k"]), P[p + "b_k"])
            v = T.bias_add(T.matmul(h, P[p + "w_v"]), P[p + "b_v"])
            heads = []
            for hd in range(cfg.n_heads):
                c0, c1 = hd * head_dim, (hd + 1) * head_dim
                qh = T.slice_cols(q, c0, c1)
                kh = T.slice_cols(k, c0, c1)
                vh = T.slice_cols(v, c0, c1)
                scores = T.scale(T.matmul(qh, T.transpose(kh)), inv_sqrt)
                probs = T.softmax_rows(scores, causal=True)
                heads.append(T.matmul(probs, vh))
            attn = T.bias_add(T.matmul(T.concat_cols(heads), P[p + "w_o"]), P[p + "b_o"])
            x = T.add(x, attn)

            h = T.layer_norm(x, P[p + "ln2_g"], P[p + "ln2_b"])
            ff = T.bias_add(T.matmul(h, P[p + "w_ff1"]), P[p + "b_ff1"])
            ff = T.bias_add(T.matmul(T.gelu(ff), P[p + "w_ff2"]), P[p + "b_ff2"])
            x = T.add(x, ff)

        hidden = T.layer_norm(x, P["lnf_g"], P["lnf_b"])
        if not need_logits:
            return None, hidden
        logits = T.bias_add(T.matmul(hidden, P["w_out"]), P["b_out"])
        return logits, hidden

    # -- embeddings ------------------------------------------------------------

    def embed_query(self, tokens) -> QueryEmbedding:
        """Unit vector read at the trailing [RET] position."""
        ids = list(tokens)
        if not ids or ids[-1] != RET:
            raise ContractError("embed_query requires the sequence to end with the RET token")
        _, hidden = self.forward(ids)
        pos = len(ids) - 1
        vec = hidden.data[pos]
        vec = vec / max(float(np.linalg.norm(vec)), 1e-12)
        return QueryEmbedding(vector=vec.astype(self.dtype), source_position=pos)

    def embed_reference(self, ref) -> RefEmbedding:
        """Unit vector read at [/REF] after encoding the ref's title+abstract."""
        ids = reference_token_ids(self.vocab, ref.title, ref.abstract)
        if len(ids) > self.config.max_context:
            ids = ids[: self.config.max_context - 1] + [REF_CLOSE]
        _, hidden = self.forward(ids, need_logits=False)
        vec = hidden.data[len(ids) - 1]
        vec = vec / max(float(np.linalg.norm(vec)), 1e-12)
        return RefEmbedding(ref_id=ref.ref_id, vector=vec.astype(self.dtype))
