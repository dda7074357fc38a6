"""Command-line front end for the whole pipeline.

Exit codes: 0 success, 1 domain failure (bad data, missing refs, transport),
2 usage error (unknown command, bad flags). Every subcommand is reproducible
given --seed and fixed inputs.
"""

import argparse
import json
import os
import sys

from .corpus import (
    build_corpus,
    load_metadata,
    synth_corpus,
    write_synth,
)
from .errors import ScopilotError, UsageError
from .evalkit import (
    DenseRetriever,
    JudgeConfig,
    LexicalRetriever,
    compare_retrievers,
    judge as judge_call,
    make_masked_queries,
    report_to_csv,
    report_to_json,
)
from .index import DenseIndex, bm25_from_metadata, build_checksum, build_dense_index, file_digest
from .orchestrator import DecodeConfig, Orchestrator
from .scholarlm import ModelConfig, ScholarLM, Vocabulary, load_checkpoint
from .trainer import TrainConfig, load_examples, resume as resume_train, split_examples, train

DESK_MODEL = {"d_model": 64, "n_layers": 2, "n_heads": 4, "max_context": 256, "d_ff": 256}


def _load_profile(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _load_vocab(path: str) -> Vocabulary:
    with open(path, encoding="utf-8") as f:
        return Vocabulary.from_json(json.load(f))


def _model_from_profile(profile: dict, vocab: Vocabulary, seed: int) -> ScholarLM:
    fields = DESK_MODEL | profile.get("model", {})
    cfg = ModelConfig(vocab_size=len(vocab), **fields)
    return ScholarLM(cfg, vocab, seed=seed)


def _train_config(profile: dict, args) -> TrainConfig:
    fields = dict(profile.get("train", {}))
    for name in ("lam", "tau", "lr", "batch_size", "epochs", "seed", "clip_norm"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    cfg = TrainConfig(**fields)
    cfg.validate()
    return cfg


def _split(examples, args):
    if args.split == "all":
        return examples
    train_part, hold = split_examples(
        examples, holdout_fraction=args.holdout_fraction, seed=args.split_seed
    )
    return hold if args.split == "holdout" else train_part


# -- subcommand bodies ---------------------------------------------------------

def cmd_corpus_synth(args) -> int:
    corpus = synth_corpus(
        seed=args.seed, n_papers=args.papers, n_refs=args.refs,
        mode=args.mode, cites_per_paper=args.cites_per_paper,
    )
    write_synth(args.out, corpus)
    print(f"wrote {len(corpus.papers)} papers, {len(corpus.refs)} refs to {args.out}")
    return 0


def cmd_corpus_build(args) -> int:
    examples, stats, vocab, _ = build_corpus(
        args.src, args.metadata, out_dir=args.out, min_freq=args.min_freq
    )
    print(stats.render_report())
    print(f"examples: {len(examples)}, vocabulary: {len(vocab)} tokens -> {args.out}")
    return 0


def cmd_train(args) -> int:
    profile = _load_profile(args.config)
    refs = load_metadata(args.metadata)
    examples = load_examples(args.examples)
    config = _train_config(profile, args)
    if args.resume:
        model, metrics = resume_train(
            args.out, examples, refs, config, log_path=args.log
        )
    else:
        if not args.vocab:
            raise UsageError("--vocab is required unless --resume is set")
        vocab = _load_vocab(args.vocab)
        model = _model_from_profile(profile, vocab, seed=config.seed)

        def progress(epoch, ms):
            print(f"epoch {epoch}: L_total {ms[-1].l_total:.4f} "
                  f"L_g {ms[-1].l_g:.4f} L_r {ms[-1].l_r:.4f}")

        metrics = train(
            model, examples, refs, config,
            log_path=args.log, ckpt_path=args.out, progress=progress,
        )
    print(f"{len(metrics)} steps -> {args.out}")
    return 0


def cmd_index_build(args) -> int:
    model, _, _ = load_checkpoint(args.ckpt)
    refs = load_metadata(args.metadata)
    checksum = build_checksum(file_digest(args.ckpt), file_digest(args.metadata))
    index = build_dense_index(model, refs, checksum=checksum)
    index.save(args.out)
    print(f"indexed {len(index)} references (dim {index.dim}) -> {args.out}")
    return 0


def cmd_eval_recall(args) -> int:
    model, _, _ = load_checkpoint(args.ckpt)
    refs = load_metadata(args.metadata)
    examples = _split(load_examples(args.examples), args)
    queries, skipped = make_masked_queries(examples, model.vocab)
    index = DenseIndex.load(args.index)
    expected = build_checksum(file_digest(args.ckpt), file_digest(args.metadata))
    retrievers = {
        "dense": DenseRetriever(model, index),
        "bm25": LexicalRetriever(bm25_from_metadata(refs)),
    }
    ks = [int(k) for k in args.k.split(",")]
    report = compare_retrievers(queries, retrievers, ks, expected_checksum=expected)
    report["skipped_events"] = skipped
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as f:
            f.write(report_to_json(report))
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8") as f:
            f.write(report_to_csv(report))
    print(report_to_csv(report), end="")
    return 0


def _load_orchestrator(args) -> Orchestrator:
    model, _, _ = load_checkpoint(args.ckpt)
    refs = load_metadata(args.metadata)
    index = DenseIndex.load(args.index)
    return Orchestrator(model, refs, index)


def cmd_generate(args) -> int:
    orch = _load_orchestrator(args)
    decode = DecodeConfig(
        mode="temperature" if args.temperature else "greedy",
        temperature=args.temperature or 1.0,
        max_new_tokens=args.max_new_tokens,
        candidate_k=args.k,
        inject_content=not args.no_inject,
        seed=args.seed,
    )
    session = orch.new_session(args.title, abstract=args.abstract, decode=decode)
    if args.auto:
        events = orch.run_auto(session)
        for ev in events:
            if ev.kind == "token":
                print(ev.payload["text"], end="")
            elif ev.kind == "citation-resolved":
                print(f"\\cite{{{ev.payload['ref_id']}}}", end="")
        print()
    else:
        _interactive_loop(orch, session)
    if args.export_tex:
        with open(args.export_tex, "w", encoding="utf-8") as f:
            f.write(orch.export(session, "tex") + "\n")
    if args.export_bib:
        with open(args.export_bib, "w", encoding="utf-8") as f:
            f.write(orch.export(session, "bib"))
    print(f"accepted citations: {session.accepted}")
    return 0


def _interactive_loop(orch: Orchestrator, session) -> None:
    """Terminal pause/accept loop: number accepts, s skips, t triggers, q quits."""
    while True:
        for ev in orch.step(session):
            if ev.kind == "token":
                print(ev.payload["text"], end="", flush=True)
            elif ev.kind == "done":
                print(f"\n[stopped: {ev.payload['stop']}]")
                return
            elif ev.kind == "retrieval-pause":
                print("\n-- citation needed --")
                for i, c in enumerate(ev.payload["candidates"]):
                    print(f"  [{i}] {c['ref_id']}: {c['title']} ({c['score']:.3f})")
        choice = input("accept #, (s)kip, (q)uit: ").strip().lower()
        if choice == "q":
            return
        if choice == "s":
            orch.resolve_citation(session, "skip")
        elif choice.isdigit() and int(choice) < len(session.pending.hits):
            rid = session.pending.hits[int(choice)].ref_id
            orch.resolve_citation(session, "accept", rid)
        else:
            print("unrecognized choice, skipping")
            orch.resolve_citation(session, "skip")


def cmd_judge(args) -> int:
    config = JudgeConfig(
        endpoint=args.endpoint, model=args.model,
        credential_env=args.credential_env, cache_dir=args.cache_dir,
    )
    with open(args.ground_truth, encoding="utf-8") as f:
        ground = f.read()
    with open(args.generated, encoding="utf-8") as f:
        generated = f.read()
    scores = judge_call(args.title, args.abstract, ground, generated, config)
    print(json.dumps(scores.to_json(), indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    app = build_service_app(args.ckpt, args.metadata, args.index, args.data_dir, args.cap)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_service_app(ckpt, metadata, index_path, data_dir, cap: int = 2):
    from .service import SessionStore, create_app

    model, _, _ = load_checkpoint(ckpt)
    refs = load_metadata(metadata)
    index = DenseIndex.load(index_path)
    return create_app(Orchestrator(model, refs, index), SessionStore(data_dir), cap)


# -- parser ---------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scopilot", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="dataset pipeline").add_subparsers(
        dest="subcommand", required=True
    )
    synth = corpus.add_parser("synth", help="generate a synthetic citation corpus")
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--papers", type=int, required=True)
    synth.add_argument("--refs", type=int, required=True)
    synth.add_argument("--mode", choices=["keyword", "synonym"], required=True)
    synth.add_argument("--cites-per-paper", type=int, default=8)
    synth.add_argument("--out", required=True)
    synth.set_defaults(run=cmd_corpus_synth)

    build = corpus.add_parser("build", help="parse sources into training examples")
    build.add_argument("--src", required=True)
    build.add_argument("--metadata", required=True)
    build.add_argument("--out", required=True)
    build.add_argument("--min-freq", type=int, default=2)
    build.set_defaults(run=cmd_corpus_build)

    tr = sub.add_parser("train", help="train the joint generation/retrieval model")
    tr.add_argument("--examples", required=True)
    tr.add_argument("--metadata", required=True)
    tr.add_argument("--vocab")
    tr.add_argument("--out", required=True)
    tr.add_argument("--config", help="JSON profile with model/train sections")
    tr.add_argument("--log")
    tr.add_argument("--resume", action="store_true")
    for name, typ in (
        ("lam", float), ("tau", float), ("lr", float),
        ("batch-size", int), ("epochs", int), ("seed", int), ("clip-norm", float),
    ):
        tr.add_argument(f"--{name}", type=typ, default=None)
    tr.set_defaults(run=cmd_train)

    index = sub.add_parser("index", help="retrieval indexes").add_subparsers(
        dest="subcommand", required=True
    )
    ib = index.add_parser("build", help="embed references into a dense index")
    ib.add_argument("--ckpt", required=True)
    ib.add_argument("--metadata", required=True)
    ib.add_argument("--out", required=True)
    ib.set_defaults(run=cmd_index_build)

    ev = sub.add_parser("eval", help="evaluation").add_subparsers(
        dest="subcommand", required=True
    )
    rec = ev.add_parser("recall", help="recall@k over masked citation events")
    rec.add_argument("--ckpt", required=True)
    rec.add_argument("--metadata", required=True)
    rec.add_argument("--examples", required=True)
    rec.add_argument("--index", required=True)
    rec.add_argument("--k", default="1,3,5,10")
    rec.add_argument("--split", choices=["all", "train", "holdout"], default="all")
    rec.add_argument("--holdout-fraction", type=float, default=0.2)
    rec.add_argument("--split-seed", type=int, default=0)
    rec.add_argument("--out-json")
    rec.add_argument("--out-csv")
    rec.set_defaults(run=cmd_eval_recall)

    gen = sub.add_parser("generate", help="draft a section with citations")
    gen.add_argument("--ckpt", required=True)
    gen.add_argument("--metadata", required=True)
    gen.add_argument("--index", required=True)
    gen.add_argument("--title", required=True)
    gen.add_argument("--abstract", default="")
    mode = gen.add_mutually_exclusive_group()
    mode.add_argument("--auto", action="store_true", help="accept top-1 at every pause")
    mode.add_argument("--interactive", action="store_true")
    gen.add_argument("--max-new-tokens", type=int, default=64)
    gen.add_argument("--k", type=int, default=5)
    gen.add_argument("--temperature", type=float, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--no-inject", action="store_true",
                     help="skip injecting reference content after accepts")
    gen.add_argument("--export-tex")
    gen.add_argument("--export-bib")
    gen.set_defaults(run=cmd_generate)

    jd = sub.add_parser("judge", help="score generated text against ground truth")
    jd.add_argument("--endpoint", required=True)
    jd.add_argument("--model", required=True)
    jd.add_argument("--title", required=True)
    jd.add_argument("--abstract", required=True)
    jd.add_argument("--ground-truth", required=True, help="path to reference text")
    jd.add_argument("--generated", required=True, help="path to generated text")
    jd.add_argument("--credential-env", default="SCOPILOT_JUDGE_KEY")
    jd.add_argument("--cache-dir")
    jd.set_defaults(run=cmd_judge)

    sv = sub.add_parser("serve", help="run the HTTP writing service")
    sv.add_argument("--ckpt", required=True)
    sv.add_argument("--metadata", required=True)
    sv.add_argument("--index", required=True)
    sv.add_argument("--data-dir", required=True)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--cap", type=int, default=2)
    sv.set_defaults(run=cmd_serve)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ScopilotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
