import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ernot.potential import (
    MlpParams,
    backward,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
    silu,
    silu_grad,
)


def test_layer_shapes_default():
    p = init_params(256)
    assert p.shapes == [(256, 256), (256, 256), (1, 256)]
    assert p.size == 256 * 256 * 2 + 256 * 2 + 256 + 1


def test_hidden_init_scale():
    p = init_params(256, seed=3)
    w0, b0 = p.layers()[0]
    w1, _ = p.layers()[1]
    target = np.sqrt(2.0 / 256)
    assert abs(w0.std() / target - 1) < 0.1
    assert abs(w1.std() / target - 1) < 0.1
    np.testing.assert_array_equal(b0, 0.0)


def test_output_starts_near_zero():
    p = init_params(16, width=32, seed=0)
    x = np.random.default_rng(0).standard_normal((100, 16))
    assert np.max(np.abs(forward(p, x))) < 1e-2


def test_init_deterministic():
    np.testing.assert_array_equal(init_params(8, 16, 2, seed=5).theta, init_params(8, 16, 2, seed=5).theta)
    assert not np.array_equal(init_params(8, 16, 2, seed=5).theta, init_params(8, 16, 2, seed=6).theta)


def test_zero_parameters_give_zero():
    p = init_params(4, 8, 2)
    p.theta[:] = 0.0
    np.testing.assert_array_equal(forward(p, np.ones((3, 4))), 0.0)


def test_single_hidden_unit_at_zero_input():
    p = init_params(1, width=1, depth=1)
    (w, b), (wo, bo) = p.layers()
    w[...] = 1.0
    b[...] = 0.0
    wo[...] = 1.0
    bo[...] = 0.0
    assert forward(p, np.array([0.0])) == 0.0
    assert forward(p, np.array([2.0])) == pytest.approx(silu(2.0), abs=1e-15)


def test_silu_grad_matches_difference():
    u = np.linspace(-30, 30, 201)
    h = 1e-6
    np.testing.assert_allclose(silu_grad(u), (silu(u + h) - silu(u - h)) / (2 * h), atol=1e-8)


def test_zero_cotangent_zero_gradient():
    p = init_params(5, 7, 2, seed=1)
    x = np.random.default_rng(1).standard_normal((4, 5))
    np.testing.assert_array_equal(backward(p, x, np.zeros(4)), 0.0)


def test_output_bias_gradient_is_cotangent_sum():
    p = init_params(5, 7, 2, seed=1)
    x = np.random.default_rng(1).standard_normal((1, 5))
    g = backward(p, x, [1.0])
    assert g[-1] == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_backward_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    d, width, depth = rng.integers(1, 6), rng.integers(1, 9), rng.integers(1, 4)
    p = init_params(d, width, depth, seed=seed)
    # larger output weights so the gradient is not dominated by the output bias
    p.theta[:] = rng.standard_normal(p.size) * 0.7
    x = rng.standard_normal((4, d))
    cot = rng.standard_normal(4)

    def fn(theta):
        return float(cot @ forward(MlpParams(theta, d, width, depth), x))

    ref = oracles.central_difference(fn, p.theta.copy())
    got = backward(p, x, cot)
    rel = np.abs(got - ref) / np.maximum(np.abs(ref), 1e-3)
    assert rel.max() <= 1e-4


@given(st.integers(0, 10_000))
def test_forward_batch_consistent_with_rows(seed):
    rng = np.random.default_rng(seed)
    p = init_params(3, 5, 2, seed=seed)
    p.theta[:] = rng.standard_normal(p.size)
    x = rng.standard_normal((6, 3))
    batch = forward(p, x)
    rows = [forward(p, xi) for xi in x]
    np.testing.assert_allclose(batch, rows, rtol=1e-13, atol=1e-13)


def test_dimension_mismatch():
    p = init_params(4, 8, 2)
    with pytest.raises(ValueError):
        forward(p, np.ones((2, 3)))
    with pytest.raises(ValueError):
        backward(p, np.ones((2, 4)), np.ones(3))
    with pytest.raises(ValueError):
        init_params(0)


def test_checkpoint_roundtrip(tmp_path):
    p = init_params(6, 10, 3, seed=7)
    path = tmp_path / "net.bin"
    save_checkpoint(path, p)
    q = load_checkpoint(path)
    assert (q.input_dim, q.width, q.depth, q.seed) == (6, 10, 3, 7)
    np.testing.assert_array_equal(q.theta, p.theta)
    assert path.stat().st_size == 48 + 8 * p.size


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"x" * 64)
    with pytest.raises(ValueError):
        load_checkpoint(path)
