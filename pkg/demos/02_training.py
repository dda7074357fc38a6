"""Train the joint generation + retrieval objective on a desk-size corpus.

Watches L_g (next-token) and L_r (contrastive retrieval) fall together, then
round-trips the checkpoint and shows the resumed run picking up exactly where
it stopped.
"""
import os
import tempfile

from scopilot.corpus import build_corpus, synth_corpus, write_synth
from scopilot.scholarlm import ModelConfig, ScholarLM, load_checkpoint
from scopilot.trainer import TrainConfig, resume, train

work = tempfile.mkdtemp(prefix="scopilot-demo-")
write_synth(work, synth_corpus(seed=11, n_papers=20, n_refs=30, mode="synonym"))
examples, _, vocab, refs = build_corpus(work, os.path.join(work, "metadata.jsonl"))

model = ScholarLM(
    ModelConfig(vocab_size=len(vocab), d_model=32, n_layers=2, n_heads=4,
                max_context=256, d_ff=64),
    vocab, seed=0,
)
print(f"model: {model.num_params()} parameters")

config = TrainConfig(lam=1.0, tau=0.05, lr=3e-3, batch_size=10, epochs=6, seed=0)
ckpt = os.path.join(work, "model.ckpt")


def show(epoch, metrics):
    m = metrics[-1]
    print(f"epoch {epoch}:  L_g {m.l_g:.3f}  L_r {m.l_r:.3f}  L_total {m.l_total:.3f}")


train(model, examples, refs, config, ckpt_path=ckpt, progress=show)

# the checkpoint carries weights, optimizer state, and the shuffle rng,
# so resuming to a higher epoch count replays what an unbroken run would do
print("\nresuming from the checkpoint for two more epochs")
config.epochs = 8
model2, more = resume(ckpt, examples, refs, config)
for m in more:
    print(f"step {m.step}:  L_total {m.l_total:.3f}")

reloaded, meta, _ = load_checkpoint(ckpt)
print(f"\ncheckpoint now at epoch {meta['epoch']}, step {meta['step']}")
