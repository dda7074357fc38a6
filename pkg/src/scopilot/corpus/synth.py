"""Synthetic corpus with known ground-truth citation structure.

Every reference owns a unique two-word keyphrase that appears verbatim in its
title and abstract. In keyword mode, citing sentences use that keyphrase, so
lexical retrieval is easy. In synonym mode, a seeded bijection gives each
reference a distinct two-word *context* keyphrase drawn from a disjoint word
pool; citing sentences use only the context phrase. The citing text then
shares zero keyphrase tokens with the cited title, which silences BM25 while
leaving a clean learnable mapping for the dense retriever.

Output is ordinary pipeline input: one .tex/.bib pair per paper plus a
metadata index, so the parser/matcher/integrator run unmodified, and a gold
map records the true (paper, event, ref) triples for evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import GenerationError, ValidationError
from .metadata import RefEntry, save_metadata

_PREFIXES_A = ["zor", "vel", "mun", "kel", "dov", "gar", "bil", "tor", "pax", "sen",
               "lum", "fer", "wex", "hob", "ruv", "nim", "cav", "yol", "quz", "jad"]
_PREFIXES_B = ["ash", "ilk", "oth", "ume", "eff", "urn", "ix", "ozz", "ebb", "arn",
               "ite", "ulf", "oam", "ei", "aug", "ist", "oco", "ya", "uzz", "eon"]
_SUFFIXES = ["ath", "eko", "ilo", "una", "ora", "eme", "ixi", "avu", "ogo", "ydo",
             "ane", "ete", "ibo", "oku", "uru", "aza", "eze", "izi", "ovo", "uxu",
             "ali", "eni", "iri", "osi", "uti", "ade", "ese", "ife", "oge", "uke",
             "ama", "ena", "ina", "ona", "upa", "aro", "ero", "iro", "oso", "ugo",
             "aki", "emi", "ipi", "oni", "uvi", "alo", "edo", "imo", "oto", "uzo"]

# sentence scaffolding; word-disjoint from reference-title scaffolding so the
# synonym-mode overlap guarantee is easy to audit
_CITE_TEMPLATE = "advances in {kp0} {kp1} inspire us"
_REF_TITLE_TEMPLATE = "study of {kp0} {kp1} methods"
_REF_ABSTRACT_TEMPLATE = "we explore {kp0} {kp1} further ."
_PAPER_TITLE = "notes on citation drafting"
_PAPER_ABSTRACT = "this draft examines how scholars cite ."


def _word_pool(prefixes: list[str]) -> list[str]:
    return [p + s for p in prefixes for s in _SUFFIXES]


@dataclass
class GoldCite:
    paper_id: str
    event_index: int  # order of the event within its paper
    ref_id: str

    def to_json(self) -> dict:
        return {"paper_id": self.paper_id, "event_index": self.event_index, "ref_id": self.ref_id}


@dataclass
class SynthCorpus:
    papers: list[tuple[str, str, str]]  # (paper_id, tex source, bib source)
    refs: list[RefEntry]
    gold: list[GoldCite]


def synth_corpus(
    seed: int, n_papers: int, n_refs: int, mode: str, cites_per_paper: int = 8
) -> SynthCorpus:
    if mode not in ("keyword", "synonym"):
        raise ValidationError(f"mode must be keyword or synonym, got {mode!r}")
    if n_papers < 10 or n_refs < 10:
        raise ValidationError("need n_papers >= 10 and n_refs >= 10")
    pool_a = _word_pool(_PREFIXES_A)
    pool_b = _word_pool(_PREFIXES_B)
    if len(set(pool_a) | set(pool_b)) != len(pool_a) + len(pool_b):
        raise GenerationError("keyphrase word pools collide")
    if 2 * n_refs > len(pool_a):
        raise GenerationError(
            f"n_refs {n_refs} exceeds keyphrase capacity {len(pool_a) // 2}"
        )

    rng = np.random.default_rng(seed)

    ref_phrases = [(pool_a[2 * i], pool_a[2 * i + 1]) for i in range(n_refs)]
    sigma = rng.permutation(n_refs)
    ctx_phrases = [(pool_b[2 * int(sigma[i])], pool_b[2 * int(sigma[i]) + 1]) for i in range(n_refs)]

    refs = []
    for i in range(n_refs):
        kp0, kp1 = ref_phrases[i]
        refs.append(
            RefEntry(
                ref_id=f"r{i:03d}",
                title=_REF_TITLE_TEMPLATE.format(kp0=kp0, kp1=kp1),
                abstract=_REF_ABSTRACT_TEMPLATE.format(kp0=kp0, kp1=kp1),
                year=2000 + (i % 25),
            )
        )

    # coverage multiset: spread citations as evenly as possible over refs,
    # then shuffle and deal cites_per_paper to each paper
    total = n_papers * cites_per_paper
    base, extra = divmod(total, n_refs)
    counts = np.full(n_refs, base, dtype=int)
    bump = rng.permutation(n_refs)[:extra]
    counts[bump] += 1
    multiset = np.repeat(np.arange(n_refs), counts)
    rng.shuffle(multiset)

    papers = []
    gold = []
    for p in range(n_papers):
        paper_id = f"p{p:03d}"
        cited = multiset[p * cites_per_paper : (p + 1) * cites_per_paper]
        sentences = []
        for event_index, ref_idx in enumerate(cited):
            ref_idx = int(ref_idx)
            kp = ref_phrases[ref_idx] if mode == "keyword" else ctx_phrases[ref_idx]
            sentence = _CITE_TEMPLATE.format(kp0=kp[0], kp1=kp[1])
            sentences.append(f"{sentence} \\cite{{{refs[ref_idx].ref_id}}}.")
            gold.append(GoldCite(paper_id, event_index, refs[ref_idx].ref_id))
        half = len(sentences) // 2
        tex = "\n".join(
            [
                f"\\title{{{_PAPER_TITLE}}}",
                "\\begin{abstract}",
                _PAPER_ABSTRACT,
                "\\end{abstract}",
                "\\section{Introduction}",
                " ".join(sentences[:half]),
                "\\section{Related Work}",
                " ".join(sentences[half:]),
            ]
        )
        bib_keys = sorted({int(r) for r in cited})
        bib = "\n\n".join(
            f"@article{{{refs[r].ref_id},\n"
            f"  title = {{{refs[r].title}}},\n"
            f"  year = {{{refs[r].year}}}\n"
            f"}}"
            for r in bib_keys
        )
        papers.append((paper_id, tex, bib))

    return SynthCorpus(papers=papers, refs=refs, gold=gold)


def write_synth(out_dir, corpus: SynthCorpus) -> None:
    import os

    os.makedirs(out_dir, exist_ok=True)
    for paper_id, tex, bib in corpus.papers:
        with open(os.path.join(out_dir, f"{paper_id}.tex"), "w", encoding="utf-8") as f:
            f.write(tex + "\n")
        with open(os.path.join(out_dir, f"{paper_id}.bib"), "w", encoding="utf-8") as f:
            f.write(bib + "\n")
    save_metadata(os.path.join(out_dir, "metadata.jsonl"), corpus.refs)
    with open(os.path.join(out_dir, "gold.jsonl"), "w", encoding="utf-8") as f:
        for g in corpus.gold:
            f.write(json.dumps(g.to_json()) + "\n")
