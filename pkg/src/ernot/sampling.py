"""Benchmark distributions, landmark selection and feature embeddings."""

from dataclasses import dataclass

import numpy as np

from .geometry import RigidMotions3, Rotations3, qexp, qmul, qsign_fix

LAYER_NORM_EPS = 1e-6
TRUNCATION_ATTEMPTS = 1000


def make_rng(seed):
    """Generator on a counter-based bit generator (Philox), so streams split cleanly."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass
class WrappedNormalSpec:
    """Push-forward of an isotropic tangent Gaussian at ``center`` through Exp.

    For SE(3), ``sigma_rot`` / ``sigma_trans`` scale the rotation-vector and
    translation blocks separately and ``box`` (lo, hi) truncates translations.
    """

    center: np.ndarray
    sigma: float = 1.0
    sigma_rot: float = None
    sigma_trans: float = None
    box: tuple = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        for s in (self.sigma, self.sigma_rot, self.sigma_trans):
            if s is not None and not s >= 0:
                raise ValueError("tangent scales must be nonnegative")
        if self.box is not None:
            lo, hi = (np.broadcast_to(np.asarray(b, dtype=np.float64), (3,)) for b in self.box)
            if np.any(lo >= hi):
                raise ValueError("truncation box needs lower < upper on every axis")
            self.box = (lo, hi)


@dataclass
class UniformSpec:
    """Haar rotation times uniform translation in ``box`` (SE(3) only)."""

    box: tuple = (-4.0, 4.0)


def _haar_quaternions(rng, n):
    q = rng.standard_normal((n, 4))
    return qsign_fix(q / np.linalg.norm(q, axis=-1, keepdims=True))


def _truncated_translations(rng, center, sigma, box, n):
    lo, hi = box
    out = center + sigma * rng.standard_normal((n, 3))
    bad = np.any((out < lo) | (out > hi), axis=-1)
    attempts = 0
    while np.any(bad) and attempts < TRUNCATION_ATTEMPTS:
        k = int(bad.sum())
        out[bad] = center + sigma * rng.standard_normal((k, 3))
        bad = np.any((out < lo) | (out > hi), axis=-1)
        attempts += 1
    return np.clip(out, lo, hi)


def sample(manifold, spec, n, seed):
    """Draw ``n`` points from ``spec`` on ``manifold``; deterministic in ``seed``."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = make_rng(seed)
    if isinstance(spec, UniformSpec):
        if not isinstance(manifold, RigidMotions3):
            raise ValueError("UniformSpec is only defined for se3")
        lo, hi = spec.box
        q = _haar_quaternions(rng, n)
        t = rng.uniform(lo, hi, size=(n, 3))
        return np.concatenate([q, t], axis=-1)

    center = spec.center
    if isinstance(manifold, RigidMotions3):
        s_rot = spec.sigma if spec.sigma_rot is None else spec.sigma_rot
        s_tr = spec.sigma if spec.sigma_trans is None else spec.sigma_trans
        w = s_rot * rng.standard_normal((n, 3))
        q = qsign_fix(qmul(center[:4], qexp(w)))
        q = q / np.linalg.norm(q, axis=-1, keepdims=True)
        if spec.box is not None:
            t = _truncated_translations(rng, center[4:], s_tr, spec.box, n)
        else:
            t = center[4:] + s_tr * rng.standard_normal((n, 3))
        return np.concatenate([q, t], axis=-1)

    basis = manifold.tangent_basis(center)
    z = spec.sigma * rng.standard_normal((n, manifold.dim))
    v = np.tensordot(z, basis, axes=(1, 0))
    return manifold.exp(center, v, check=False)


def rotation_about_axis(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    return Rotations3().exp(np.array([1.0, 0, 0, 0]), angle * axis / np.linalg.norm(axis))


def farthest_point_sample(manifold, pool, k, start=0):
    """Greedy max-min selection under geodesic distance.

    Returns the selected indices into ``pool``; the first pick is ``start`` and
    ties go to the lowest index.
    """
    pool = np.asarray(pool, dtype=np.float64)
    n = len(pool)
    if n == 0:
        raise ValueError("empty pool")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = start
    mind = manifold.dist(pool, pool[start])
    mind[start] = -np.inf
    for r in range(1, k):
        j = int(np.argmax(mind))
        chosen[r] = j
        mind = np.minimum(mind, manifold.dist(pool, pool[j]))
        mind[chosen[: r + 1]] = -np.inf
    return chosen


def layer_norm(feats, eps=LAYER_NORM_EPS):
    """Non-affine normalization across the feature axis."""
    mean = feats.mean(axis=-1, keepdims=True)
    var = feats.var(axis=-1, keepdims=True)
    return (feats - mean) / np.sqrt(var + eps)


class LandmarkEmbedding:
    """Geodesic distances to fixed landmarks, optionally layer-normalized."""

    mode = "landmark"

    def __init__(self, manifold, landmarks, layer_norm=True):
        landmarks = np.asarray(landmarks, dtype=np.float64)
        if landmarks.ndim == len(manifold.point_shape):
            landmarks = landmarks[None]
        if len(landmarks) < 1:
            raise ValueError("need at least one landmark")
        self.manifold = manifold
        self.landmarks = landmarks
        self.layer_norm = layer_norm

    @property
    def dim(self):
        return len(self.landmarks)

    def __call__(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        single = xs.ndim == len(self.manifold.point_shape)
        feats = self.manifold.pairwise_dist(xs[None] if single else xs, self.landmarks)
        if self.layer_norm:
            feats = layer_norm(feats)
        return feats[0] if single else feats


class LogEmbedding:
    """Flattened Riemannian logarithm at a fixed base point (no normalization)."""

    mode = "log"
    layer_norm = False

    def __init__(self, manifold, base=None):
        self.manifold = manifold
        self.base = manifold.origin() if base is None else np.asarray(base, dtype=np.float64)

    @property
    def dim(self):
        return int(np.prod(self.manifold.tangent_shape))

    def __call__(self, xs):
        return self.manifold.log_coords(self.base, xs)


def landmark_embedding_from_pool(manifold, pool, n_landmarks, layer_norm=True, start=0):
    idx = farthest_point_sample(manifold, pool, min(n_landmarks, len(pool)), start=start)
    return LandmarkEmbedding(manifold, pool[idx], layer_norm=layer_norm)
