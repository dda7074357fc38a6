"""Model checkpoints: config + vocabulary in the JSON header, weights in the
tensor blob. Training state rides along under reserved key prefixes so a
resumed run sees exactly what the interrupted one saw."""

from __future__ import annotations

from ..errors import ValidationError
from ..nncore import read_container, write_container
from .model import ModelConfig, ScholarLM
from .vocab import Vocabulary

CHECKPOINT_VERSION = "scopilot-ckpt-v1"

_OPT_PREFIX = "opt."


def save_checkpoint(path, model: ScholarLM, train_meta: dict | None = None,
                    opt_arrays: dict | None = None) -> None:
    arrays = dict(model.state_arrays())
    for name, arr in (opt_arrays or {}).items():
        arrays[_OPT_PREFIX + name] = arr
    meta = {
        "config": model.config.to_json(),
        "vocab": model.vocab.to_json(),
        "train": train_meta or {},
    }
    write_container(path, CHECKPOINT_VERSION, arrays, meta=meta)


def load_checkpoint(path) -> tuple[ScholarLM, dict, dict]:
    """Returns (model, train-meta, optimizer arrays)."""
    meta, arrays = read_container(path, expect_version=CHECKPOINT_VERSION)
    if "config" not in meta or "vocab" not in meta:
        raise ValidationError("checkpoint header missing config or vocabulary")
    config = ModelConfig.from_json(meta["config"])
    vocab = Vocabulary.from_json(meta["vocab"])
    model = ScholarLM(config, vocab)
    weights = {n: a for n, a in arrays.items() if not n.startswith(_OPT_PREFIX)}
    opt = {n[len(_OPT_PREFIX):]: a for n, a in arrays.items() if n.startswith(_OPT_PREFIX)}
    model.load_state_arrays(weights)
    return model, meta.get("train", {}), opt
