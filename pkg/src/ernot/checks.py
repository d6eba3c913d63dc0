"""Randomized invariant checks for the manifold implementations."""

import time

import numpy as np

from .geometry import MANIFOLD_NAMES, get_manifold
from .sampling import WrappedNormalSpec, make_rng, sample

# largest tangent norm used for roundtrip draws; compact factors stay inside
# the injectivity radius pi
_RADIUS = {"s2": 0.95 * np.pi, "so3": 0.95 * np.pi, "se3": 3.0, "spd3": 3.0, "spd3le": 3.0, "h2": 3.0}


def _random_tangent(manifold, base, rng, radius):
    basis = manifold.tangent_basis(base)
    n = len(base)
    z = rng.standard_normal((n, manifold.dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    z *= radius * rng.random((n, 1))
    if manifold.name == "se3":
        # keep the rotation angle below pi whatever the translation share
        z[:, :3] *= np.minimum(1.0, 0.95 * np.pi * manifold.alpha / radius)
    return np.einsum("nk,nk...->n...", z, basis)


def _points(manifold, n, seed):
    spec = WrappedNormalSpec(manifold.origin(), 1.0, sigma_rot=1.0, sigma_trans=1.0)
    return sample(manifold, spec, n, seed)


def _random_gl3(rng, n):
    a = rng.standard_normal((n, 3, 3))
    # bounded condition number
    u, _, vt = np.linalg.svd(a)
    s = rng.uniform(0.5, 2.0, (n, 3))
    return u @ (s[:, :, None] * vt)


def geometry_checks(manifold, n=1000, seed=0):
    """Worst-case errors of the basic invariants over ``n`` random draws.

    Keys: ``roundtrip`` (|Log_x Exp_x v - v|), ``exp_dist`` (|d(x, Exp_x v) - |v||),
    ``symmetry``, ``triangle`` (max excess d(x,z) - d(x,y) - d(y,z), clipped at 0),
    ``identity`` (|d(x,x)|) and, for SPD(3), ``affine_invariance``.
    """
    rng = make_rng([seed, 101])
    base = _points(manifold, n, [seed, 1])
    v = _random_tangent(manifold, base, rng, _RADIUS.get(manifold.name, 3.0))
    y = manifold.exp(base, v)
    manifold.check_point(y)
    out = {}
    vv = manifold.log(base, y)
    out["roundtrip"] = float(np.max(np.sqrt(np.sum((vv - v).reshape(n, -1) ** 2, axis=1))))
    out["exp_dist"] = float(np.max(np.abs(manifold.dist(base, y) - manifold.norm(base, v))))

    x = _points(manifold, n, [seed, 2])
    z = _points(manifold, n, [seed, 3])
    out["symmetry"] = float(np.max(np.abs(manifold.dist(x, y) - manifold.dist(y, x))))
    excess = manifold.dist(x, z) - manifold.dist(x, y) - manifold.dist(y, z)
    out["triangle"] = float(max(0.0, np.max(excess)))
    out["identity"] = float(np.max(np.abs(manifold.dist(x, x))))
    if manifold.name == "spd3":
        a = _random_gl3(rng, n)
        at = np.swapaxes(a, -1, -2)
        moved = manifold.dist(a @ x @ at, a @ y @ at)
        out["affine_invariance"] = float(np.max(np.abs(moved - manifold.dist(x, y))))
    elif manifold.name == "spd3le":
        q, _ = np.linalg.qr(rng.standard_normal((n, 3, 3)))
        qt = np.swapaxes(q, -1, -2)
        moved = manifold.dist(q @ x @ qt, q @ y @ qt)
        out["orthogonal_invariance"] = float(np.max(np.abs(moved - manifold.dist(x, y))))
    return out


TOLERANCES = {
    "roundtrip": 1e-8,
    "exp_dist": 1e-8,
    "symmetry": 1e-12,
    "triangle": 1e-9,
    "identity": 1e-8,
    "affine_invariance": 1e-8,
    "orthogonal_invariance": 1e-8,
}


def run_geometry_suite(names=MANIFOLD_NAMES, n=1000, seed=0):
    """``{name: (errors, failures, seconds)}``; failures list the keys over tolerance."""
    out = {}
    for name in names:
        t = time.perf_counter()
        errs = geometry_checks(get_manifold(name), n, seed)
        bad = [k for k, e in errs.items() if not e <= TOLERANCES[k]]
        out[name] = (errs, bad, time.perf_counter() - t)
    return out
