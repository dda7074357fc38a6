"""The interleaved writing loop: decode, pause on RET, retrieve, inject, resume.

The engine owns no session storage; it mutates SessionState values handed to
it and reports what happened as GenerationEvents. The cite key and all
injection framing tokens are written by this engine, never sampled.
"""

import uuid

import numpy as np

from ..errors import (
    CandidateError,
    ContextOverflowError,
    ContractError,
    UsageError,
    ValidationError,
)
from ..index import DenseIndex
from ..scholarlm import (
    BOS,
    CITE_CLOSE,
    CITE_OPEN,
    EOS,
    PAD,
    REF_CLOSE,
    REF_OPEN,
    RET,
    UNK,
    ScholarLM,
    ref_id_of,
    ref_key_token,
    spacing_prefix,
)
from .session import DONE, GENERATING, PAUSED, DecodeConfig, GenerationEvent, SessionState

_NEVER_SAMPLED = (BOS, PAD, UNK, CITE_OPEN, CITE_CLOSE, REF_OPEN, REF_CLOSE)


class Orchestrator:
    def __init__(self, model: ScholarLM, refs, index: DenseIndex):
        self.model = model
        self.refs = refs
        self.index = index
        self._sample_mask = self._build_sample_mask()

    def _build_sample_mask(self) -> np.ndarray:
        """-inf over ids the sampler must never pick: structure is ours to emit."""
        mask = np.zeros(len(self.model.vocab), dtype=np.float32)
        blocked = set(_NEVER_SAMPLED) | set(self.model.vocab.ref_key_ids())
        for i in blocked:
            mask[i] = -np.inf
        return mask

    # -- session lifecycle ---------------------------------------------------

    def new_session(
        self,
        title: str,
        abstract: str = "",
        section: str = "introduction",
        decode: DecodeConfig | None = None,
        session_id: str | None = None,
    ) -> SessionState:
        if not title.strip():
            raise ValidationError("session title must be non-empty")
        decode = decode or DecodeConfig()
        decode.validate()
        context = [BOS] + self.model.vocab.encode(title)
        if abstract.strip():
            context += self.model.vocab.encode(abstract)
        state = SessionState(
            session_id=session_id or uuid.uuid4().hex[:12],
            context=context,
            decode=decode,
            section=section,
        )
        state.validate()
        return state

    # -- decoding --------------------------------------------------------------

    def _sample(self, session: SessionState) -> int:
        logits, _ = self.model.forward(session.context)
        row = logits.data[-1].astype(np.float64) + self._sample_mask
        if session.decode.mode == "greedy":
            return int(np.argmax(row))
        rng = np.random.default_rng(session.decode.seed)
        if session.rng_state is not None:
            rng.bit_generator.state = session.rng_state
        z = row / session.decode.temperature
        z -= z.max()
        p = np.exp(z)
        p /= p.sum()
        tok = int(rng.choice(len(p), p=p))
        session.rng_state = rng.bit_generator.state
        return tok

    def step(self, session: SessionState, max_new_tokens: int | None = None):
        """Decode until pause, stop, or budget; yields GenerationEvents.

        The stream always ends with exactly one retrieval-pause or done event.
        """
        if session.status == PAUSED:
            raise ContractError("session is paused at a retrieval point; resolve it first")
        budget = session.decode.max_new_tokens if max_new_tokens is None else max_new_tokens
        if session.status == DONE:
            reason = "eos" if session.context and session.context[-1] == EOS else "context-limit"
            yield GenerationEvent("done", {"stop": reason})
            return
        prev = self._last_visible_surface(session)
        for _ in range(budget):
            if len(session.context) >= self.model.config.max_context:
                session.status = DONE
                yield GenerationEvent("done", {"stop": "context-limit"})
                return
            tok = self._sample(session)
            session.context.append(tok)
            if tok == RET:
                yield self._pause(session)
                return
            if tok == EOS:
                session.status = DONE
                yield GenerationEvent("done", {"stop": "eos"})
                return
            surface = self.model.vocab.token_of(tok)
            yield GenerationEvent(
                "token", {"id": tok, "text": spacing_prefix(prev, surface) + surface}
            )
            prev = surface
        session.status = GENERATING
        yield GenerationEvent("done", {"stop": "budget"})

    def _last_visible_surface(self, session: SessionState) -> str | None:
        """Previous word for spacing, skipping structure and injected spans."""
        depth = 0
        for tok in reversed(session.context):
            if tok == REF_CLOSE:
                depth += 1
            elif tok == REF_OPEN:
                depth -= 1
            elif depth == 0:
                surface = self.model.vocab.token_of(tok)
                rid = ref_id_of(surface)
                if rid is not None:
                    return rid
                if tok not in (BOS, EOS, PAD, RET, CITE_OPEN, CITE_CLOSE):
                    return surface
        return None

    def _pause(self, session: SessionState) -> GenerationEvent:
        q = self.model.embed_query(session.context)
        result = self.index.search(q, session.decode.candidate_k)
        session.pending = result
        session.status = PAUSED
        return GenerationEvent("retrieval-pause", {"candidates": self.describe_candidates(result)})

    def describe_candidates(self, result) -> list[dict]:
        out = []
        for h in result.hits:
            ref = self.refs.get(h.ref_id)
            out.append(
                {
                    "ref_id": h.ref_id,
                    "score": h.score,
                    "title": ref.title,
                    "abstract": ref.abstract,
                }
            )
        return out

    # -- citation resolution ---------------------------------------------------

    def resolve_citation(
        self, session: SessionState, action: str, ref_id: str | None = None
    ) -> GenerationEvent:
        if action == "accept":
            self._require_paused(session, action)
            if ref_id not in {h.ref_id for h in session.pending.hits}:
                raise CandidateError(
                    f"{ref_id!r} is not among the pending candidates; "
                    "use accept_external to cite outside the retrieved list"
                )
            return self._inject(session, ref_id)
        if action == "skip":
            self._require_paused(session, action)
            assert session.context and session.context[-1] == RET
            session.context.pop()
            session.pending = None
            session.status = GENERATING
            return GenerationEvent("citation-resolved", {"action": "skip", "ref_id": None})
        if action == "trigger":
            if session.status == PAUSED:
                raise ContractError("cannot trigger a citation while already paused")
            if len(session.context) + 1 > self.model.config.max_context:
                raise ContextOverflowError(len(session.context) + 1, self.model.config.max_context)
            session.context.append(RET)
            session.status = GENERATING
            return self._pause(session)
        raise UsageError(f"unknown citation action {action!r}")

    def accept_external(self, session: SessionState, ref_id: str) -> GenerationEvent:
        """Cite a reference the retriever did not surface; must exist in metadata."""
        self._require_paused(session, "accept_external")
        if ref_id not in self.refs:
            raise CandidateError(f"unknown ref_id {ref_id!r}")
        return self._inject(session, ref_id)

    def _require_paused(self, session: SessionState, action: str) -> None:
        if session.status != PAUSED:
            raise ContractError(f"{action} requires a paused session, status is {session.status}")

    def _inject(self, session: SessionState, ref_id: str) -> GenerationEvent:
        ref = self.refs.get(ref_id)
        vocab = self.model.vocab
        if session.decode.inject_content:
            content = vocab.encode(ref.title) + vocab.encode(ref.abstract)
            content = content[: session.decode.inject_budget]
            session.context += [REF_OPEN] + content + [REF_CLOSE]
        session.context += [CITE_OPEN, vocab.id_of(ref_key_token(ref_id)), CITE_CLOSE]
        session.accepted.append(ref_id)
        session.pending = None
        session.status = GENERATING
        return GenerationEvent("citation-resolved", {"action": "accept", "ref_id": ref_id})

    # -- auto mode ---------------------------------------------------------------

    def run_auto(
        self, session: SessionState, total_new_tokens: int | None = None
    ) -> list[GenerationEvent]:
        """Step and accept the top candidate at every pause until done.

        Injected and cite tokens count against the budget, so the loop always
        terminates even for a model that emits RET forever.
        """
        remaining = (
            session.decode.max_new_tokens if total_new_tokens is None else total_new_tokens
        )
        events: list[GenerationEvent] = []
        while True:
            before = len(session.context)
            step_events = list(self.step(session, max_new_tokens=max(remaining, 0)))
            events.extend(step_events)
            remaining -= len(session.context) - before
            last = step_events[-1]
            if last.kind == "done":
                return events
            assert last.kind == "retrieval-pause"
            top = session.pending.hits[0].ref_id
            before = len(session.context)
            events.append(self.resolve_citation(session, "accept", top))
            remaining -= len(session.context) - before

    # -- export ---------------------------------------------------------------

    def export(self, session: SessionState, fmt: str) -> str:
        if fmt == "tex":
            return self._export_tex(session)
        if fmt == "bib":
            return self._export_bib(session)
        raise UsageError(f"unknown export format {fmt!r}; expected tex or bib")

    def _export_tex(self, session: SessionState) -> str:
        vocab = self.model.vocab
        pieces: list[str] = []
        prev: str | None = None

        def put(surface: str) -> None:
            nonlocal prev
            pieces.append(spacing_prefix(prev, surface) + surface)
            prev = surface

        i = 0
        ctx = session.context
        while i < len(ctx):
            tok = ctx[i]
            if tok == REF_OPEN:
                # injected reference content never reaches the document
                while i < len(ctx) and ctx[i] != REF_CLOSE:
                    i += 1
            elif tok == CITE_OPEN:
                i += 1
                keys = []
                while i < len(ctx) and ctx[i] != CITE_CLOSE:
                    rid = ref_id_of(vocab.token_of(ctx[i]))
                    if rid is not None:
                        keys.append(rid)
                    i += 1
                for rid in keys:
                    put(f"\\cite{{{rid}}}")
            elif tok not in (BOS, EOS, PAD, RET, REF_CLOSE):
                put(vocab.token_of(tok))
            i += 1
        return "".join(pieces)

    def _export_bib(self, session: SessionState) -> str:
        entries = []
        seen = set()
        for rid in session.accepted:
            if rid in seen:
                continue
            seen.add(rid)
            ref = self.refs.get(rid)
            lines = [f"@article{{{rid},", f"  title = {{{ref.title}}},"]
            if ref.year is not None:
                lines.append(f"  year = {{{ref.year}}},")
            lines.append("}")
            entries.append("\n".join(lines))
        return "\n".join(entries) + ("\n" if entries else "")
