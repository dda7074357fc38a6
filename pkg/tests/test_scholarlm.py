"""Vocabulary, model forward pass, pooled embeddings, checkpoints."""

import numpy as np
import pytest

from scopilot.errors import ContextOverflowError, ContractError, ValidationError
from scopilot.scholarlm import (
    BOS,
    EOS,
    RET,
    UNK,
    ModelConfig,
    ScholarLM,
    Vocabulary,
    load_checkpoint,
    ref_id_of,
    ref_key_token,
    save_checkpoint,
    tokenize,
)


class TestTokenizer:
    def test_lowercase_words(self):
        assert tokenize("Dense Retrieval") == ["dense", "retrieval"]

    def test_punctuation_splits(self):
        assert tokenize("end-to-end, really.") == [
            "end", "-", "to", "-", "end", ",", "really", ".",
        ]

    def test_digits_kept_in_words(self):
        assert tokenize("bm25 scores") == ["bm25", "scores"]

    def test_empty(self):
        assert tokenize("   ") == []


def _vocab(extra_texts=(), ref_ids=("r1", "r2")):
    texts = ["the model the model retrieval", "retrieval of citations, citations."] + list(extra_texts)
    return Vocabulary.build(texts, ref_ids, min_freq=2)


class TestVocabulary:
    def test_specials_hold_fixed_ids(self):
        v = _vocab()
        assert v.id_of("[BOS]") == 0
        assert v.id_of("[RET]") == 4
        assert v.id_of("[/REF]") == 8

    def test_min_freq_cut(self):
        v = _vocab()
        # "the"x2, "model"x2, "retrieval"x2, "citations"x2 survive; "of" (x1) does not
        assert "the" in v and "model" in v and "retrieval" in v
        assert "of" not in v
        assert v.encode("of")[0] == UNK

    def test_ref_keys_present_and_recoverable(self):
        v = _vocab()
        tok = ref_key_token("r2")
        assert ref_id_of(v.token_of(v.id_of(tok))) == "r2"

    def test_bijection(self):
        v = _vocab()
        for i in range(len(v)):
            assert v.id_of(v.token_of(i)) == i

    def test_build_deterministic(self):
        a, b = _vocab(), _vocab()
        assert a.to_json() == b.to_json()

    def test_duplicate_tokens_rejected(self):
        v = _vocab()
        tokens = v.to_json()["tokens"] + ["the"]
        with pytest.raises(ValidationError):
            Vocabulary(tokens)

    def test_encode_stream_rejects_unknown_control(self):
        v = _vocab()
        with pytest.raises(ValidationError):
            v.encode_stream([ref_key_token("never-seen")])

    def test_round_trip_json(self):
        v = _vocab()
        w = Vocabulary.from_json(v.to_json())
        assert w.encode("the model") == v.encode("the model")

    def test_detokenize_spacing(self):
        v = Vocabulary.build(["a b ( c ) , d . a b ( c ) , d ."], [], min_freq=2)
        ids = v.encode("a b (c), d.")
        assert v.detokenize(ids) == "a b (c), d."


def _tiny_model(seed=0, vocab=None, **overrides):
    vocab = vocab or _vocab()
    kwargs = dict(d_model=16, n_layers=2, n_heads=2, max_context=32, d_ff=24)
    kwargs.update(overrides)
    cfg = ModelConfig(vocab_size=len(vocab), **kwargs)
    return ScholarLM(cfg, vocab, seed=seed)


class TestModelConfig:
    def test_heads_must_divide(self):
        with pytest.raises(ValidationError):
            ModelConfig(vocab_size=10, d_model=10, n_heads=3).validate()

    def test_context_floor(self):
        with pytest.raises(ValidationError):
            ModelConfig(vocab_size=10, d_model=8, n_heads=2, max_context=16).validate()


class TestForward:
    def test_shapes(self):
        m = _tiny_model()
        logits, hidden = m.forward([BOS, 10, 11])
        assert logits.shape == (3, len(m.vocab))
        assert hidden.shape == (3, m.config.d_model)

    def test_length_one(self):
        m = _tiny_model()
        logits, _ = m.forward([BOS])
        assert logits.shape == (1, len(m.vocab))

    def test_over_length_rejected(self):
        m = _tiny_model()
        with pytest.raises(ContextOverflowError) as err:
            m.forward([BOS] * 33)
        assert err.value.limit == 32

    def test_deterministic(self):
        m = _tiny_model()
        ids = [BOS, 9, 10, 11, RET]
        a, _ = m.forward(ids)
        b, _ = m.forward(ids)
        np.testing.assert_array_equal(a.data, b.data)

    def test_causality_bit_identical_prefix(self):
        m = _tiny_model()
        base = [BOS, 9, 10, 11, 12, 13]
        pert = list(base)
        pert[4] = EOS
        a, _ = m.forward(base)
        b, _ = m.forward(pert)
        np.testing.assert_array_equal(a.data[:4], b.data[:4])
        assert not np.array_equal(a.data[4], b.data[4])

    def test_trailing_padding_never_leaks_backward(self):
        from scopilot.scholarlm import PAD

        m = _tiny_model()
        ids = [BOS, 9, 10, EOS]
        a, _ = m.forward(ids)
        b, _ = m.forward(ids + [PAD, PAD, PAD])
        np.testing.assert_array_equal(a.data, b.data[:4])


class TestEmbeddings:
    def test_query_norm_and_position(self):
        m = _tiny_model()
        q = m.embed_query([BOS, 9, 10, RET])
        assert abs(np.linalg.norm(q.vector) - 1.0) < 1e-5
        assert q.source_position == 3

    def test_query_requires_trailing_ret(self):
        m = _tiny_model()
        with pytest.raises(ContractError):
            m.embed_query([BOS, 9, 10])

    def test_query_reproducible(self):
        m = _tiny_model()
        a = m.embed_query([BOS, 9, RET])
        b = m.embed_query([BOS, 9, RET])
        np.testing.assert_array_equal(a.vector, b.vector)

    def test_tokens_after_ret_do_not_move_the_query(self):
        m = _tiny_model()
        ids = [BOS, 9, 10, RET]
        q = m.embed_query(ids)
        logits_long, hidden_long = m.forward(ids + [11, 12])
        at_ret = hidden_long.data[3]
        at_ret = at_ret / np.linalg.norm(at_ret)
        np.testing.assert_array_equal(q.vector, at_ret.astype(np.float32))

    def test_reference_norm_and_identity(self):
        from scopilot.corpus.metadata import RefEntry

        m = _tiny_model()
        r1 = RefEntry(ref_id="r1", title="the model", abstract="retrieval citations")
        r2 = RefEntry(ref_id="r2", title="the model", abstract="retrieval citations")
        e1, e2 = m.embed_reference(r1), m.embed_reference(r2)
        assert abs(np.linalg.norm(e1.vector) - 1.0) < 1e-5
        np.testing.assert_array_equal(e1.vector, e2.vector)
        assert e1.ref_id == "r1" and e2.ref_id == "r2"

    def test_reference_requires_title(self):
        from scopilot.corpus.metadata import RefEntry

        m = _tiny_model()
        with pytest.raises(ValidationError):
            m.embed_reference(RefEntry(ref_id="r1", title="  ", abstract="x"))

    def test_similarity_bounds(self):
        from scopilot.corpus.metadata import RefEntry

        m = _tiny_model()
        q = m.embed_query([BOS, 9, RET])
        r = m.embed_reference(RefEntry(ref_id="r1", title="the model", abstract=""))
        sim = float(q.vector @ r.vector)
        assert -1.0 - 1e-6 <= sim <= 1.0 + 1e-6
        assert abs(float(q.vector @ q.vector) - 1.0) < 1e-5


class TestCheckpoint:
    def test_round_trip_bit_identical_logits(self, tmp_path):
        m = _tiny_model(seed=3)
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, m, train_meta={"step": 7})
        loaded, train_meta, opt = load_checkpoint(path)
        assert train_meta == {"step": 7}
        assert opt == {}
        ids = [BOS, 9, 10, RET]
        a, _ = m.forward(ids)
        b, _ = loaded.forward(ids)
        np.testing.assert_array_equal(a.data, b.data)

    def test_optimizer_arrays_ride_along(self, tmp_path):
        m = _tiny_model()
        opt_arrays = {"m.w_out": np.ones((16, len(m.vocab)), dtype=np.float32)}
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, m, opt_arrays=opt_arrays)
        _, _, opt = load_checkpoint(path)
        np.testing.assert_array_equal(opt["m.w_out"], opt_arrays["m.w_out"])

    def test_unknown_version_rejected(self, tmp_path):
        from scopilot.nncore import write_container

        path = tmp_path / "m.ckpt"
        write_container(path, "scopilot-ckpt-v0", {}, meta={})
        with pytest.raises(ValidationError):
            load_checkpoint(path)
