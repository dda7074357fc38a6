"""A scripted interactive writing session.

Generates a few tokens, forces a retrieval pause, inspects the candidate
panel, accepts a suggestion, and exports the result as .tex plus .bib.
"""
import os
import tempfile

from scopilot.corpus import build_corpus, synth_corpus, write_synth
from scopilot.index import build_dense_index
from scopilot.orchestrator import DecodeConfig, Orchestrator
from scopilot.scholarlm import ModelConfig, ScholarLM
from scopilot.trainer import TrainConfig, train

work = tempfile.mkdtemp(prefix="scopilot-demo-")
write_synth(work, synth_corpus(seed=3, n_papers=20, n_refs=30, mode="keyword"))
examples, _, vocab, refs = build_corpus(work, os.path.join(work, "metadata.jsonl"))

model = ScholarLM(
    ModelConfig(vocab_size=len(vocab), d_model=32, n_layers=2, n_heads=4,
                max_context=256, d_ff=64),
    vocab, seed=0,
)
train(model, examples, refs,
      TrainConfig(lam=1.0, tau=0.05, lr=3e-3, batch_size=10, epochs=10, seed=0))

orch = Orchestrator(model, refs, build_dense_index(model, refs, checksum="demo"))
session = orch.new_session(
    "a study of methods",
    decode=DecodeConfig(max_new_tokens=30, candidate_k=3),
)

print("generating:")
for ev in orch.step(session, 8):
    if ev.kind == "token":
        print(ev.payload["text"], end="", flush=True)
    elif ev.kind == "retrieval-pause":
        print("\n(the model asked for a citation on its own)", end="")
print()

# if the model did not pause by itself, ask for a citation right here
if session.status != "paused-at-ret":
    orch.resolve_citation(session, "trigger")
    print("(citation requested manually)")
print(f"\nsession status: {session.status}")
print("candidates:")
for i, c in enumerate(session.pending.hits):
    ref = refs.get(c.ref_id)
    print(f"  [{i}] {c.ref_id}  score {c.score:.3f}  {ref.title}")

chosen = session.pending.hits[0].ref_id
event = orch.resolve_citation(session, "accept", chosen)
print(f"\naccepted {event.payload['ref_id']}; the reference content is now in")
print("the context (invisible in exports) and generation continues:")
for ev in orch.step(session, 8):
    if ev.kind == "token":
        print(ev.payload["text"], end="", flush=True)
print()

print("\n--- export: tex ---")
print(orch.export(session, "tex"))
print("--- export: bib ---")
print(orch.export(session, "bib"))
