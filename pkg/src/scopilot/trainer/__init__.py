"""Joint generation+retrieval training: batches, losses, loop, checkpoints."""

from .batch import (
    BatchPlan,
    CitationEvent,
    QuerySlot,
    TrainingExample,
    build_batch,
    load_examples,
    save_examples,
    truncate_example,
)
from .losses import contrastive_loss, ntp_loss
from .loop import StepMetrics, TrainConfig, resume, split_examples, train, train_step

__all__ = [
    "BatchPlan",
    "CitationEvent",
    "QuerySlot",
    "StepMetrics",
    "TrainConfig",
    "TrainingExample",
    "build_batch",
    "contrastive_loss",
    "load_examples",
    "ntp_loss",
    "resume",
    "save_examples",
    "split_examples",
    "train",
    "train_step",
    "truncate_example",
]
