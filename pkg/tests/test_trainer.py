import math
from types import SimpleNamespace

import numpy as np
import pytest

import oracles
from ernot.errors import TrainingDiverged
from ernot.geometry import get_manifold
from ernot.potential import MlpParams, init_params
from ernot.sampling import LogEmbedding, WrappedNormalSpec, sample
from ernot.semidual import soft_c_transform
from ernot.trainer import (
    StreamData,
    SupportData,
    TrainConfig,
    TrainState,
    adam_step,
    cosine_lr,
    minibatch_objective_and_gradient,
    train,
    write_training_log,
)


def small_problem(seed, b=8, d=3):
    rng = np.random.default_rng(seed)
    p = init_params(d, 6, 2, seed=seed)
    p.theta[:] = rng.standard_normal(p.size) * 0.5
    return p, rng.random((b, b)), rng.standard_normal((b, d)), rng


@pytest.mark.parametrize("seed", range(6))
def test_gradient_matches_finite_differences(seed):
    p, cost, feats, rng = small_problem(seed)
    eps = float(rng.uniform(0.1, 1.0))

    def fn(theta):
        return minibatch_objective_and_gradient(MlpParams(theta, 3, 6, 2), cost, feats, eps)[0]

    _, grad = minibatch_objective_and_gradient(p, cost, feats, eps)
    ref = oracles.central_difference(fn, p.theta.copy())
    rel = np.linalg.norm(grad - ref) / np.linalg.norm(ref)
    assert rel <= 1e-4


def test_weighted_gradient_matches_finite_differences():
    p, cost, feats, rng = small_problem(11)
    mu = rng.random(8)
    nu = rng.random(8)
    mu, nu = mu / mu.sum(), nu / nu.sum()

    def fn(theta):
        return minibatch_objective_and_gradient(MlpParams(theta, 3, 6, 2), cost, feats, 0.3, mu, nu)[0]

    _, grad = minibatch_objective_and_gradient(p, cost, feats, 0.3, mu, nu)
    ref = oracles.central_difference(fn, p.theta.copy())
    assert np.linalg.norm(grad - ref) / np.linalg.norm(ref) <= 1e-4


def test_zero_params_reduce_to_zero_potential():
    p, cost, feats, _ = small_problem(0)
    p.theta[:] = 0.0
    value, _ = minibatch_objective_and_gradient(p, cost, feats, 0.4)
    ref = np.mean(soft_c_transform(np.zeros(8), np.full(8, 1 / 8), cost, 0.4))
    assert value == pytest.approx(ref, abs=1e-14)


def test_identical_targets_centered_to_zero():
    p, _, feats, _ = small_problem(1, b=2)
    feats = np.repeat(feats[:1], 2, axis=0)
    cost = np.array([[0.3, 0.3], [0.7, 0.7]])
    value, grad = minibatch_objective_and_gradient(p, cost, feats, 0.2)
    # g = (0, 0) so J = mean_i c_i
    assert value == pytest.approx(0.5, abs=1e-14)
    np.testing.assert_allclose(grad, 0.0, atol=1e-15)


def test_cosine_schedule():
    cfg = TrainConfig(epsilon=0.1, learning_rate=1e-3, steps=100, cosine_floor=1e-5)
    assert cosine_lr(0, cfg) == pytest.approx(1e-3)
    assert cosine_lr(50, cfg) == pytest.approx(0.5 * (1e-3 + 1e-5))
    assert cosine_lr(100, cfg) == pytest.approx(1e-5)


def test_adam_first_step_is_unit_update():
    cfg = TrainConfig(epsilon=0.1, learning_rate=0.1, steps=10)
    p = SimpleNamespace(theta=np.zeros(1))
    state = TrainState(p, np.zeros(1), np.zeros(1))
    adam_step(state, np.array([1.0]), cfg)  # f(w) = w has gradient 1
    assert p.theta[0] == pytest.approx(0.1, rel=1e-6)
    assert state.step == 1


def test_adam_zero_gradient():
    cfg = TrainConfig(epsilon=0.1)
    p = SimpleNamespace(theta=np.array([0.3, -0.2]))
    state = TrainState(p, np.array([0.5, 0.5]), np.array([0.1, 0.1]), step=3)
    before = p.theta.copy()
    adam_step(state, np.zeros(2), TrainConfig(epsilon=0.1, learning_rate=0.0))
    np.testing.assert_array_equal(p.theta, before)
    np.testing.assert_allclose(state.m, 0.45)
    np.testing.assert_allclose(state.v, 0.0999)
    with pytest.raises(ValueError):
        adam_step(state, np.zeros(3), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        TrainConfig(epsilon=0.1, batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(epsilon=0.1, adam_beta1=1.0)


def support_data(seed=0, n=40):
    s2 = get_manifold("s2")
    x = sample(s2, WrappedNormalSpec([0, 0, 1.0], 0.7), n, [seed, 0])
    y = sample(s2, WrappedNormalSpec([1.0, 0, 0], 0.7), n, [seed, 1])
    return SupportData(s2.pairwise_cost(x, y), y), s2, x, y


def test_zero_steps_returns_initial_params():
    data, *_ = support_data()
    cfg = TrainConfig(epsilon=0.1, steps=0, width=8, seed=4)
    params, diag = train(data, cfg)
    np.testing.assert_array_equal(params.theta, init_params(3, 8, 2, seed=4).theta)
    assert diag["steps"] == 0


def test_training_is_deterministic():
    data, *_ = support_data()
    cfg = TrainConfig(epsilon=0.1, steps=20, width=16, batch_size=16, seed=2)
    a, da = train(data, cfg)
    b, db = train(data, cfg)
    np.testing.assert_array_equal(a.theta, b.theta)
    np.testing.assert_array_equal(da["objective"], db["objective"])
    assert len(da["lr"]) == 20


def test_training_increases_objective():
    data, *_ = support_data(n=64)
    cfg = TrainConfig(epsilon=0.1, steps=300, width=32, batch_size=64, learning_rate=3e-3, full_target_support=True)
    _, diag = train(data, cfg, window=20)
    hist = diag["objective"]
    assert diag["trailing_mean"] > hist[:20].mean() + 0.01


def test_full_target_batches():
    data, *_ = support_data()
    rng = np.random.default_rng(0)
    cost, feats, mu, nu = data.batch(rng, 10, full_target=True)
    assert cost.shape == (10, 40)
    assert feats.shape == (40, 3)
    assert mu is None and nu.shape == (40,)


def test_nonuniform_support_weights_are_sampled():
    data, *_ = support_data()
    mu = np.zeros(40)
    mu[:2] = 0.5
    weighted = SupportData(data.cost, data.target_features, mu=mu)
    cost, *_ = weighted.batch(np.random.default_rng(0), 30, full_target=True)
    hits = [np.flatnonzero((data.cost == row).all(axis=1)) for row in cost]
    assert {int(h[0]) for h in hits} == {0, 1}


def test_stream_data():
    h2 = get_manifold("h2")
    spec = WrappedNormalSpec(h2.origin(), 0.5)
    data = StreamData(h2, lambda rng, k: sample(h2, spec, k, rng), lambda rng, k: sample(h2, spec, k, rng),
                      LogEmbedding(h2))
    params, diag = train(data, TrainConfig(epsilon=0.2, steps=5, width=8, batch_size=12))
    assert data.input_dim == 3
    assert np.all(np.isfinite(diag["objective"]))
    with pytest.raises(ValueError):
        data.batch(np.random.default_rng(0), 4, full_target=True)


def test_divergence_reports_step():
    data, *_ = support_data()
    data.cost[:] = np.nan
    with pytest.raises(TrainingDiverged) as exc:
        train(data, TrainConfig(epsilon=0.1, steps=3, width=4, batch_size=4))
    assert exc.value.step == 0


def test_training_log(tmp_path):
    data, *_ = support_data()
    _, diag = train(data, TrainConfig(epsilon=0.1, steps=4, width=4, batch_size=4))
    path = tmp_path / "log.csv"
    write_training_log(path, diag)
    lines = path.read_text().splitlines()
    assert lines[0] == "step,lr,objective"
    assert len(lines) == 5
    assert math.isclose(float(lines[-1].split(",")[2]), diag["objective"][-1])
