"""Minibatch stochastic gradient ascent on the empirical semidual objective."""

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._accel import lse_rows
from .errors import TrainingDiverged
from .potential import backward, forward, init_params
from .sampling import make_rng


@dataclass
class TrainConfig:
    epsilon: float
    learning_rate: float = 1e-3
    batch_size: int = 256
    steps: int = 3000
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    cosine_floor: float = 0.0
    width: int = 256
    depth: int = 2
    # soft c-transform over the whole finite target support instead of the batch
    full_target_support: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 for centering")
        if self.steps < 0 or self.cosine_floor < 0:
            raise ValueError("steps and cosine_floor must be nonnegative")


@dataclass
class TrainState:
    params: object
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    history: list = field(default_factory=list)
    lr_history: list = field(default_factory=list)

    @classmethod
    def fresh(cls, params):
        return cls(params, np.zeros_like(params.theta), np.zeros_like(params.theta))


class SupportData:
    """Minibatches resampled (with replacement) from fixed finite supports.

    The full cost matrix and target features are precomputed once, so a step
    costs O(B^2 + B * D) regardless of how the matrix was obtained.
    """

    def __init__(self, cost, target_features, mu=None, nu=None):
        self.cost = np.asarray(cost, dtype=np.float64)
        self.target_features = np.asarray(target_features, dtype=np.float64)
        n, m = self.cost.shape
        self.mu = np.full(n, 1.0 / n) if mu is None else np.asarray(mu, dtype=np.float64)
        self.nu = np.full(m, 1.0 / m) if nu is None else np.asarray(nu, dtype=np.float64)
        self._uniform_mu = np.allclose(self.mu, 1.0 / n)
        self._uniform_nu = np.allclose(self.nu, 1.0 / m)

    @property
    def input_dim(self):
        return self.target_features.shape[1]

    def _draw(self, rng, size, weights, uniform):
        n = len(weights)
        if uniform:
            return rng.integers(0, n, size=size)
        return rng.choice(n, size=size, p=weights)

    def batch(self, rng, size, full_target=False):
        ix = self._draw(rng, size, self.mu, self._uniform_mu)
        if full_target:
            return self.cost[ix], self.target_features, None, self.nu
        iy = self._draw(rng, size, self.nu, self._uniform_nu)
        return self.cost[np.ix_(ix, iy)], self.target_features[iy], None, None


class StreamData:
    """Fresh points every step from two samplers ``(rng, n) -> points``.

    Costs and features are evaluated on the batch only, so the per-step cost
    is independent of any support size.
    """

    def __init__(self, manifold, source_sampler, target_sampler, embedding):
        self.manifold = manifold
        self.source_sampler = source_sampler
        self.target_sampler = target_sampler
        self.embedding = embedding

    @property
    def input_dim(self):
        return self.embedding.dim

    def batch(self, rng, size, full_target=False):
        if full_target:
            raise ValueError("streamed data has no finite target support")
        xs = self.source_sampler(rng, size)
        ys = self.target_sampler(rng, size)
        return self.manifold.pairwise_cost(xs, ys), self.embedding(ys), None, None


def minibatch_objective_and_gradient(params, cost, target_features, epsilon, mu=None, nu=None):
    """Empirical semidual value and its exact parameter gradient.

    With h = a_theta(phi(y)), centered g = h - <beta, h>, and
    f_i = -eps log sum_j beta_j exp((g_j - C_ij)/eps):

        J = <beta, g> + <alpha, f>
        dJ/dg_j = beta_j - sum_i alpha_i P_ij        (P = row softmax)
        dJ/dh_k = dJ/dg_k - beta_k sum_j dJ/dg_j = beta_k - sum_i alpha_i P_ik

    (the centering term cancels because sum_j sum_i alpha_i P_ij = 1).  The
    softmax P is the one used for the value.  alpha / beta default to 1/B.
    """
    cost = np.asarray(cost, dtype=np.float64)
    b_src, b_tgt = cost.shape
    alpha = np.full(b_src, 1.0 / b_src) if mu is None else np.asarray(mu, dtype=np.float64)
    beta = np.full(b_tgt, 1.0 / b_tgt) if nu is None else np.asarray(nu, dtype=np.float64)
    h = forward(params, target_features)
    g = h - beta @ h
    with np.errstate(divide="ignore"):
        logb = np.log(beta)
    z = (g[None, :] - cost) / epsilon
    lse = lse_rows(z, logb)
    f = -epsilon * lse
    value = float(beta @ g + alpha @ f)
    probs = np.exp(z + logb[None, :] - lse[:, None])
    cot = beta - alpha @ probs
    return value, backward(params, target_features, cot)


def cosine_lr(step, config):
    lr0, floor = config.learning_rate, config.cosine_floor
    if config.steps == 0:
        return lr0
    return floor + (lr0 - floor) * 0.5 * (1.0 + math.cos(math.pi * step / config.steps))


def adam_step(state, grad, config):
    """One Adam *ascent* step with bias correction and the cosine schedule."""
    if grad.shape != state.params.theta.shape:
        raise ValueError("gradient shape does not match parameters")
    b1, b2 = config.adam_beta1, config.adam_beta2
    lr = cosine_lr(state.step, config)
    state.m = b1 * state.m + (1.0 - b1) * grad
    state.v = b2 * state.v + (1.0 - b2) * grad * grad
    t = state.step + 1
    mhat = state.m / (1.0 - b1**t)
    vhat = state.v / (1.0 - b2**t)
    state.params.theta += lr * mhat / (np.sqrt(vhat) + config.adam_eps)
    state.step = t
    state.lr_history.append(lr)
    return state


def train(data, config, params=None, window=100):
    """Run ``config.steps`` iterations of sample -> objective/gradient -> Adam.

    Returns ``(params, diagnostics)``; diagnostics hold the per-step
    objective, learning rates, trailing-window mean and wall-clock seconds.
    """
    if params is None:
        params = init_params(data.input_dim, config.width, config.depth, seed=config.seed)
    state = TrainState.fresh(params)
    rng = make_rng(config.seed)
    t0 = time.perf_counter()
    for step in range(config.steps):
        cost, feats, mu, nu = data.batch(rng, config.batch_size, config.full_target_support)
        value, grad = minibatch_objective_and_gradient(state.params, cost, feats, config.epsilon, mu, nu)
        if not (math.isfinite(value) and np.all(np.isfinite(grad))):
            raise TrainingDiverged(step, value)
        state.history.append(value)
        adam_step(state, grad, config)
    hist = np.asarray(state.history)
    diagnostics = {
        "objective": hist,
        "lr": np.asarray(state.lr_history),
        "trailing_mean": float(hist[-window:].mean()) if len(hist) else float("nan"),
        "seconds": time.perf_counter() - t0,
        "steps": state.step,
    }
    return state.params, diagnostics


def write_training_log(path, diagnostics):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "lr", "objective"])
        for k, (lr, val) in enumerate(zip(diagnostics["lr"], diagnostics["objective"])):
            w.writerow([k, repr(float(lr)), repr(float(val))])
