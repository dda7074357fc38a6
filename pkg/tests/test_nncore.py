"""Numeric core: op semantics, adjoints vs finite differences, optimizer, container."""

import math

import numpy as np
import pytest

from scopilot.errors import ContractError, NonFiniteError, ShapeError, ValidationError
from scopilot.nncore import (
    OptState,
    adam_step,
    add,
    backward,
    bias_add,
    clip_global_norm,
    concat_cols,
    constant,
    embedding,
    gelu,
    global_norm,
    l2_normalize_rows,
    layer_norm,
    masked_cross_entropy_sum,
    matmul,
    mean_scalars,
    mul,
    parameter,
    read_container,
    row,
    scale,
    slice_cols,
    softmax_cross_entropy,
    softmax_rows,
    stack_rows,
    sum_all,
    take_rows,
    transpose,
    write_container,
)


class TestMatmul:
    def test_identity(self):
        a = constant(np.arange(9.0).reshape(3, 3))
        out = matmul(constant(np.eye(3)), a)
        np.testing.assert_array_equal(out.data, a.data)

    def test_small_example(self):
        out = matmul(constant([[1.0, 2.0], [3.0, 4.0]]), constant([[0.0], [1.0]]))
        np.testing.assert_array_equal(out.data, [[2.0], [4.0]])

    def test_against_triple_loop(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(5, 7))
        b = rng.normal(size=(7, 2))
        want = np.zeros((5, 2))
        for i in range(5):
            for j in range(2):
                for k in range(7):
                    want[i, j] += a[i, k] * b[k, j]
        got = matmul(constant(a), constant(b)).data
        assert np.abs(got - want).max() < 1e-6

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            matmul(constant(np.zeros((2, 3))), constant(np.zeros((2, 3))))


class TestCrossEntropy:
    def test_uniform_logits(self):
        loss = softmax_cross_entropy(constant(np.zeros(8)), 3)
        assert abs(loss.item() - 2.0794415416798357) < 1e-12  # ln 8

    def test_saturated(self):
        logits = np.zeros(8)
        logits[0] = 50.0
        loss = softmax_cross_entropy(constant(logits), 0)
        assert loss.item() < 1e-9

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(7)
        logits = rng.normal(size=32)
        t = 11
        want = -np.log(np.exp(logits[t]) / np.exp(logits).sum())
        got = softmax_cross_entropy(constant(logits), t).item()
        assert abs(got - want) / abs(want) < 1e-6

    def test_target_out_of_range(self):
        with pytest.raises(IndexError):
            softmax_cross_entropy(constant(np.zeros(4)), 4)

    def test_too_few_classes(self):
        with pytest.raises(ContractError):
            softmax_cross_entropy(constant(np.zeros(1)), 0)

    def test_masked_sum_matches_per_row(self):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=(6, 9))
        targets = rng.integers(0, 9, size=6)
        mask = np.array([1, 0, 1, 1, 0, 1])
        total, count = masked_cross_entropy_sum(constant(logits), targets, mask)
        assert count == 4
        want = sum(
            softmax_cross_entropy(constant(logits[i]), int(targets[i])).item()
            for i in range(6)
            if mask[i]
        )
        assert abs(total.item() - want) < 1e-6


class TestBackward:
    def test_sum_gives_ones(self):
        x = parameter(np.arange(6.0).reshape(2, 3), "x")
        backward(sum_all(x))
        np.testing.assert_array_equal(x.grad, np.ones((2, 3), dtype=np.float32))

    def test_square_at_three(self):
        x = parameter([3.0], "x")
        backward(sum_all(mul(x, x)))
        np.testing.assert_allclose(x.grad, [6.0])

    def test_repeated_backward_accumulates(self):
        x = parameter([2.0], "x")
        loss = sum_all(mul(x, x))
        backward(loss)
        backward(loss)
        np.testing.assert_allclose(x.grad, [8.0])

    def test_non_scalar_rejected(self):
        x = parameter(np.ones((2, 2)), "x")
        with pytest.raises(ContractError):
            backward(add(x, x))

    def test_shared_subexpression(self):
        # y = x*x reused twice: d/dx (y + y) = 4x
        x = parameter([1.5], "x")
        y = mul(x, x)
        backward(sum_all(add(y, y)))
        np.testing.assert_allclose(x.grad, [6.0])


def _central_diff(f, arr, idx, h=1e-5):
    orig = arr[idx]
    arr[idx] = orig + h
    hi = f()
    arr[idx] = orig - h
    lo = f()
    arr[idx] = orig
    return (hi - lo) / (2 * h)


def _check_grads(build_loss, params, h=1e-5, tol=1e-6):
    """Compare every coordinate's analytic grad to a central difference."""
    for p in params:
        p.zero_grad()
    backward(build_loss())
    for p in params:
        it = np.nditer(p.data, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            num = _central_diff(lambda: build_loss().item(), p.data, idx, h)
            ana = p.grad[idx]
            denom = max(abs(num), abs(ana), 1e-3)
            assert abs(num - ana) / denom < tol, (p.name, idx, num, ana)


class TestAdjointsVsFiniteDifferences:
    """Every differentiable op, composed the way the model composes them,
    in 64-bit so central differences are trustworthy."""

    def test_dense_chain(self):
        rng = np.random.default_rng(11)
        x = parameter(rng.normal(size=(4, 5)), "x", dtype=np.float64)
        w = parameter(rng.normal(size=(5, 3)), "w", dtype=np.float64)
        b = parameter(rng.normal(size=3), "b", dtype=np.float64)

        def loss():
            h = gelu(bias_add(matmul(x, w), b))
            return sum_all(mul(h, h))

        _check_grads(loss, [x, w, b])

    def test_layer_norm(self):
        rng = np.random.default_rng(12)
        x = parameter(rng.normal(size=(3, 6)), "x", dtype=np.float64)
        g = parameter(rng.normal(size=6), "g", dtype=np.float64)
        be = parameter(rng.normal(size=6), "be", dtype=np.float64)

        def loss():
            y = layer_norm(x, g, be)
            return sum_all(mul(y, y))

        _check_grads(loss, [x, g, be])

    def test_causal_softmax_attention_shape(self):
        rng = np.random.default_rng(13)
        s = parameter(rng.normal(size=(5, 5)), "s", dtype=np.float64)
        v = parameter(rng.normal(size=(5, 4)), "v", dtype=np.float64)

        def loss():
            p = softmax_rows(s, causal=True)
            return sum_all(mul(matmul(p, v), matmul(p, v)))

        _check_grads(loss, [s, v])

    def test_embedding_and_normalize(self):
        rng = np.random.default_rng(14)
        w = parameter(rng.normal(size=(7, 4)), "w", dtype=np.float64)

        def loss():
            rows = embedding(w, [1, 3, 3, 6])
            return sum_all(l2_normalize_rows(rows))

        _check_grads(loss, [w])

    def test_assembly_ops(self):
        rng = np.random.default_rng(15)
        a = parameter(rng.normal(size=(3, 4)), "a", dtype=np.float64)
        b = parameter(rng.normal(size=(3, 2)), "b", dtype=np.float64)

        def loss():
            c = concat_cols([a, b])
            left = slice_cols(c, 0, 3)
            rows = stack_rows([take_rows(left, [i]) for i in range(3)])
            return sum_all(mul(rows, transpose(transpose(rows))))

        _check_grads(loss, [a, b])

    def test_cross_entropy_grads(self):
        rng = np.random.default_rng(16)
        logits = parameter(rng.normal(size=(4, 6)), "l", dtype=np.float64)
        targets = [2, 0, 5, 1]
        mask = [1, 1, 0, 1]

        def loss():
            total, count = masked_cross_entropy_sum(logits, targets, mask)
            return scale(total, 1.0 / count)

        _check_grads(loss, [logits])

    def test_mean_scalars_over_row_losses(self):
        rng = np.random.default_rng(17)
        x = parameter(rng.normal(size=(3, 5)), "x", dtype=np.float64)

        def loss():
            parts = [softmax_cross_entropy(row(x, i), i) for i in range(3)]
            return mean_scalars(parts)

        _check_grads(loss, [x])


class TestSoftmaxProperties:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(5)
        p = softmax_rows(constant(rng.normal(size=(6, 6)))).data
        np.testing.assert_allclose(p.sum(axis=1), np.ones(6), atol=1e-12)
        assert (p > 0).all()

    def test_causal_mask_zeroes_future(self):
        rng = np.random.default_rng(6)
        p = softmax_rows(constant(rng.normal(size=(5, 5))), causal=True).data
        assert np.triu(p, k=1).max() == 0.0
        np.testing.assert_allclose(p.sum(axis=1), np.ones(5), atol=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(8)
        s = rng.normal(size=(3, 4))
        p1 = softmax_rows(constant(s)).data
        p2 = softmax_rows(constant(s + 123.0)).data
        np.testing.assert_allclose(p1, p2, atol=1e-12)


class TestAdam:
    def test_single_step_hand_value(self):
        p = parameter([1.0], "p")
        p.grad = np.array([1.0], dtype=np.float32)
        state = OptState(lr=0.1, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0)
        adam_step([p], state)
        np.testing.assert_allclose(p.data, [0.900000001], atol=1e-6)
        assert state.step_count == 1

    def test_zero_grad_zero_decay_leaves_params(self):
        p = parameter([[1.0, -2.0]], "p")
        p.grad = np.zeros((1, 2), dtype=np.float32)
        before = p.data.copy()
        adam_step([p], OptState(lr=0.5))
        np.testing.assert_array_equal(p.data, before)

    def test_decoupled_weight_decay(self):
        # zero grad + decay shrinks the weight by lr*wd*p exactly
        p = parameter([2.0], "p")
        p.grad = np.zeros(1, dtype=np.float32)
        adam_step([p], OptState(lr=0.1, weight_decay=0.5))
        np.testing.assert_allclose(p.data, [2.0 - 0.1 * 0.5 * 2.0], rtol=1e-6)

    def test_non_finite_grad_aborts_with_name(self):
        p = parameter([1.0], "w_q")
        p.grad = np.array([np.nan], dtype=np.float32)
        state = OptState()
        with pytest.raises(NonFiniteError, match="w_q"):
            adam_step([p], state)
        assert state.step_count == 0
        np.testing.assert_array_equal(p.data, [1.0])

    def test_clip_global_norm(self):
        a = parameter(np.zeros(2), "a")
        b = parameter(np.zeros(2), "b")
        a.grad = np.array([3.0, 0.0], dtype=np.float32)
        b.grad = np.array([0.0, 4.0], dtype=np.float32)
        assert abs(global_norm([a, b]) - 5.0) < 1e-6
        pre = clip_global_norm([a, b], 1.0)
        assert abs(pre - 5.0) < 1e-6
        assert abs(global_norm([a, b]) - 1.0) < 1e-5

    def test_clip_below_threshold_is_identity(self):
        a = parameter(np.zeros(2), "a")
        a.grad = np.array([0.3, 0.4], dtype=np.float32)
        clip_global_norm([a], 1.0)
        np.testing.assert_allclose(a.grad, [0.3, 0.4], rtol=1e-7)


class TestContainer:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        arrays = {
            "w_embed": rng.normal(size=(11, 4)).astype(np.float32),
            "b_out": rng.normal(size=7).astype(np.float32),
        }
        path = tmp_path / "t.bin"
        write_container(path, "scopilot-ckpt-v1", arrays, meta={"d_model": 4})
        meta, back = read_container(path, expect_version="scopilot-ckpt-v1")
        assert meta == {"d_model": 4}
        assert set(back) == {"w_embed", "b_out"}
        for name in arrays:
            np.testing.assert_array_equal(back[name], arrays[name])
            assert back[name].dtype == np.float32

    def test_same_payload_same_bytes(self, tmp_path):
        arr = {"x": np.arange(6, dtype=np.float32).reshape(2, 3)}
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        write_container(p1, "v", arr, meta={"k": 1})
        write_container(p2, "v", arr, meta={"k": 1})
        assert p1.read_bytes() == p2.read_bytes()

    def test_unknown_version_rejected(self, tmp_path):
        path = tmp_path / "t.bin"
        write_container(path, "scopilot-ckpt-v999", {"x": np.zeros(1)})
        with pytest.raises(ValidationError):
            read_container(path, expect_version="scopilot-ckpt-v1")

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "t.bin"
        write_container(path, "v", {"x": np.zeros(8)})
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 16])
        with pytest.raises(ValidationError):
            read_container(path)

    def test_no_tmp_file_left_behind(self, tmp_path):
        path = tmp_path / "t.bin"
        write_container(path, "v", {"x": np.zeros(2)})
        assert [p.name for p in tmp_path.iterdir()] == ["t.bin"]
