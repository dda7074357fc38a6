"""Joint training loop: one optimizer over both objectives.

Each step forwards every paper in the batch once; query vectors are read off
that same pass at the RET positions, reference embeddings are recomputed
in-graph with the current weights, and gradients flow through both sides of
the contrastive similarity as well as the language-model head.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateBatchError, NonFiniteError, ValidationError
from ..nncore import OptState, adam_step, clip_global_norm
from ..nncore import tensor as T
from ..scholarlm import ScholarLM, reference_token_ids, save_checkpoint
from ..scholarlm.vocab import PAD, REF_CLOSE
from .batch import BatchPlan, TrainingExample, build_batch, truncate_example
from .losses import contrastive_loss


@dataclass
class TrainConfig:
    lam: float = 1.0          # weight on the retrieval loss
    tau: float = 1.0          # contrastive temperature
    lr: float = 3e-4
    batch_size: int = 8       # papers per step
    epochs: int = 10
    seed: int = 0
    clip_norm: float = 1.0

    def validate(self) -> None:
        if self.lam < 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")
        if self.tau <= 0:
            raise ValidationError(f"tau must be > 0, got {self.tau}")
        if self.lr <= 0:
            raise ValidationError(f"learning rate must be > 0, got {self.lr}")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValidationError("batch_size must be >= 1 and epochs >= 0")

    def to_json(self) -> dict:
        return {
            "lam": self.lam, "tau": self.tau, "lr": self.lr,
            "batch_size": self.batch_size, "epochs": self.epochs,
            "seed": self.seed, "clip_norm": self.clip_norm,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "TrainConfig":
        return cls(**payload)


@dataclass
class StepMetrics:
    step: int
    l_g: float
    l_r: float
    l_total: float
    grad_norm: float
    tokens_seen: int
    queries_seen: int

    def log_record(self) -> dict:
        return {
            "step": self.step,
            "L_g": self.l_g,
            "L_r": self.l_r,
            "L_total": self.l_total,
            "grad_norm": self.grad_norm,
        }


def split_examples(
    examples: list[TrainingExample], holdout_fraction: float = 0.2, seed: int = 0
) -> tuple[list[TrainingExample], list[TrainingExample]]:
    """Deterministic train/held-out split by paper id."""
    by_id = sorted(examples, key=lambda e: e.paper_id)
    order = np.random.default_rng(seed).permutation(len(by_id))
    n_hold = int(round(len(by_id) * holdout_fraction))
    hold_idx = set(order[:n_hold].tolist())
    train = [by_id[i] for i in range(len(by_id)) if i not in hold_idx]
    hold = [by_id[i] for i in range(len(by_id)) if i in hold_idx]
    return train, hold


def _embed_refs_in_graph(model: ScholarLM, refs, ref_ids: list[str]) -> dict[str, T.Tensor]:
    """Forward each needed reference with current weights; (1, d) unit rows."""
    out = {}
    max_ctx = model.config.max_context
    for rid in ref_ids:
        ref = refs.get(rid)
        ids = reference_token_ids(model.vocab, ref.title, ref.abstract)
        if len(ids) > max_ctx:
            ids = ids[: max_ctx - 1] + [REF_CLOSE]
        _, hidden = model.forward(ids, need_logits=False)
        out[rid] = T.l2_normalize_rows(T.take_rows(hidden, [len(ids) - 1]))
    return out


def train_step(
    model: ScholarLM, plan: BatchPlan, refs, config: TrainConfig, opt: OptState, step: int
) -> StepMetrics:
    """One optimization step over a prepared batch plan."""
    model.zero_grads()

    ce_sums: list[T.Tensor] = []
    total_targets = 0
    queries: list[tuple[int, T.Tensor]] = []  # slot index -> query row (1, d)
    hiddens: list[T.Tensor] = []
    for ex in plan.examples:
        logits, hidden = model.forward(ex.tokens)
        hiddens.append(hidden)
        targets = np.array(ex.tokens[1:] + [PAD], dtype=np.intp)
        mask = np.array(ex.loss_mask[1:] + [0], dtype=np.int8)
        ce, count = T.masked_cross_entropy_sum(logits, targets, mask)
        ce_sums.append(ce)
        total_targets += count
    if total_targets == 0:
        raise DegenerateBatchError(
            f"step {step}: no unmasked target positions in batch "
            f"{[ex.paper_id for ex in plan.examples]}"
        )
    l_g = ce_sums[0]
    for ce in ce_sums[1:]:
        l_g = T.add(l_g, ce)
    l_g = T.scale(l_g, 1.0 / total_targets)

    ref_embs = _embed_refs_in_graph(model, refs, plan.ref_ids) if plan.slots else {}
    slot_losses = []
    for slot in plan.slots:
        q = T.l2_normalize_rows(T.take_rows(hiddens[slot.example_index], [slot.position]))
        slot_losses.append(
            contrastive_loss(
                q, ref_embs[slot.positive], [ref_embs[r] for r in slot.negatives], config.tau
            )
        )
    l_r = T.mean_scalars(slot_losses) if slot_losses else T.constant(0.0, dtype=np.float32)

    # with lam = 0 the retrieval term is reported but kept out of the graph,
    # so the step is bit-identical to a pure language-modeling step
    if config.lam > 0 and slot_losses:
        l_total = T.add(l_g, T.scale(l_r, config.lam))
    else:
        l_total = l_g

    if not np.isfinite(l_total.item()):
        raise NonFiniteError(
            f"step {step}: non-finite loss on batch {[ex.paper_id for ex in plan.examples]}"
        )

    T.backward(l_total)
    params = model.params()
    grad_norm = clip_global_norm(params, config.clip_norm)
    adam_step(params, opt)

    return StepMetrics(
        step=step,
        l_g=float(l_g.item()),
        l_r=float(l_r.item()),
        l_total=float(l_g.item() + config.lam * l_r.item()),
        grad_norm=grad_norm,
        tokens_seen=total_targets,
        queries_seen=len(plan.slots),
    )


class _MetricsLog:
    def __init__(self, path):
        self._f = open(path, "a", encoding="utf-8") if path else None

    def write(self, m: StepMetrics) -> None:
        if self._f:
            self._f.write(json.dumps(m.log_record()) + "\n")
            self._f.flush()

    def close(self) -> None:
        if self._f:
            self._f.close()


def train(
    model: ScholarLM,
    examples: list[TrainingExample],
    refs,
    config: TrainConfig,
    *,
    log_path=None,
    ckpt_path=None,
    start_epoch: int = 0,
    start_step: int = 0,
    opt: OptState | None = None,
    rng_state: dict | None = None,
    progress=None,
) -> list[StepMetrics]:
    """Run (or continue) training; returns the metrics of every step taken.

    Deterministic given the seed: epoch shuffles come from one generator whose
    state is checkpointed, so a resumed run replays the exact batch order an
    uninterrupted run would have seen.
    """
    config.validate()
    if not examples:
        raise ValidationError("train called with no examples")
    examples = [truncate_example(ex, model.config.max_context) for ex in examples]
    for ex in examples:
        ex.validate()
        for ev in ex.events:
            refs.get(ev.ref_id)  # raises on unknown positive

    opt = opt or OptState(lr=config.lr)
    rng = np.random.default_rng(config.seed)
    if rng_state is not None:
        rng.bit_generator.state = rng_state

    log = _MetricsLog(log_path)
    metrics: list[StepMetrics] = []
    step = start_step
    try:
        for epoch in range(start_epoch, config.epochs):
            order = rng.permutation(len(examples))
            for lo in range(0, len(examples), config.batch_size):
                batch = [examples[i] for i in order[lo : lo + config.batch_size]]
                plan = build_batch(batch)
                m = train_step(model, plan, refs, config, opt, step)
                metrics.append(m)
                log.write(m)
                step += 1
            if progress is not None:
                progress(epoch, metrics)
            if ckpt_path:
                save_checkpoint(
                    ckpt_path,
                    model,
                    train_meta={
                        "epoch": epoch + 1,
                        "step": step,
                        "rng_state": _jsonable_rng_state(rng),
                        "opt": {
                            "lr": opt.lr, "beta1": opt.beta1, "beta2": opt.beta2,
                            "eps": opt.eps, "weight_decay": opt.weight_decay,
                            "step_count": opt.step_count,
                        },
                        "config": config.to_json(),
                    },
                    opt_arrays={
                        **{f"m.{k}": v for k, v in opt.m.items()},
                        **{f"v.{k}": v for k, v in opt.v.items()},
                    },
                )
    finally:
        log.close()
    return metrics


def _jsonable_rng_state(rng: np.random.Generator) -> dict:
    state = rng.bit_generator.state
    return json.loads(json.dumps(state))


def resume(
    ckpt_path, examples: list[TrainingExample], refs, config: TrainConfig, *, log_path=None
) -> tuple[ScholarLM, list[StepMetrics]]:
    """Pick up a checkpointed run and train to config.epochs."""
    from ..scholarlm import load_checkpoint

    model, train_meta, opt_arrays = load_checkpoint(ckpt_path)
    if not train_meta:
        raise ValidationError(f"checkpoint {ckpt_path} carries no training state")
    saved = train_meta["opt"]
    opt = OptState(
        lr=saved["lr"], beta1=saved["beta1"], beta2=saved["beta2"],
        eps=saved["eps"], weight_decay=saved["weight_decay"],
        step_count=saved["step_count"],
    )
    for name, arr in opt_arrays.items():
        kind, param = name.split(".", 1)
        (opt.m if kind == "m" else opt.v)[param] = arr.copy()
    ms = train(
        model, examples, refs, config,
        log_path=log_path, ckpt_path=ckpt_path,
        start_epoch=train_meta["epoch"], start_step=train_meta["step"],
        opt=opt, rng_state=train_meta["rng_state"],
    )
    return model, ms
