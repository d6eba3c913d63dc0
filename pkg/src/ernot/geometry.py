"""Intrinsic geometry of the supported manifolds.

Each manifold is a small stateless object whose methods act on numpy arrays
and broadcast over leading axes.  Point and tangent layouts:

=========  ================================  ==========================================
manifold   point (trailing shape)            tangent chart
=========  ================================  ==========================================
``s2``     unit 3-vector                     ambient 3-vector orthogonal to the point
``so3``    unit quaternion (w, x, y, z),     body-frame rotation vector: Exp_q(w) = q * exp(w/2)
           ``w >= 0``
``se3``    quaternion + translation (7,)     (rotation vector, translation) (6,)
``spd3``   SPD 3x3, affine-invariant metric  symmetric 3x3 matrix (ambient)
``spd3le`` SPD 3x3, log-Euclidean metric     symmetric 3x3 in the log domain: Exp_X(W) = expm(log X + W)
``h2``     Lorentz 3-vector, x0 > 0          ambient 3-vector, Minkowski-orthogonal
=========  ================================  ==========================================

The cost everywhere is ``0.5 * dist**2``.
"""

import numpy as np

from ._accel import sym3_eigh
from .errors import CutLocusError, DegenerateInputError, DomainError

CUT_LOCUS_TOL = 1e-8
SPD_EIG_FLOOR = 1e-10


def _sinc(r):
    """sin(r) / r, exact at 0."""
    return np.sinc(r / np.pi)


def _norm(v, axis=-1):
    return np.sqrt(np.sum(v * v, axis=axis))


# ---------------------------------------------------------------------------
# quaternion helpers (scalar first)
# ---------------------------------------------------------------------------


def qmul(p, q):
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qexp(rotvec):
    """Unit quaternion of a rotation vector."""
    half = 0.5 * _norm(rotvec)
    w = np.cos(half)
    xyz = 0.5 * _sinc(half)[..., None] * rotvec
    return np.concatenate([w[..., None], xyz], axis=-1)


def qlog(q):
    """Rotation vector of a unit quaternion; angle in [0, pi]."""
    q = np.where(q[..., :1] < 0.0, -q, q)
    vec = q[..., 1:]
    s = _norm(vec)
    angle = 2.0 * np.arctan2(s, q[..., 0])
    return (2.0 / _sinc(0.5 * angle))[..., None] * vec, angle


def qsign_fix(q):
    """Representative with nonnegative scalar part (first nonzero entry > 0)."""
    lead = q[..., 0]
    for k in range(1, 4):
        lead = np.where(lead == 0.0, q[..., k], lead)
    return np.where((lead < 0.0)[..., None], -q, q)


def rotation_angle(q1, q2):
    rel = qmul(qconj(q1), q2)
    angle = 2.0 * np.arctan2(_norm(rel[..., 1:]), np.abs(rel[..., 0]))
    # identical inputs give exactly zero rather than roundoff
    return np.where(np.all(q1 == q2, axis=-1), 0.0, angle)


def quat_to_matrix(q):
    w, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
        ],
        axis=-2,
    )


# ---------------------------------------------------------------------------
# symmetric matrix functions through the 3x3 eigensolver
# ---------------------------------------------------------------------------


def sym_apply(mats, fn):
    w, v = sym3_eigh(mats)
    return np.einsum("...ik,...k,...jk->...ij", v, fn(w), v)


def sym_logm(mats):
    return sym_apply(mats, np.log)


def sym_expm(mats):
    return sym_apply(mats, np.exp)


def _sandwich(a, b):
    """a @ b @ a for symmetric a."""
    return a @ b @ a


def _lex_compare(x, y):
    """Lexicographic ``(x > y, x == y)`` over the flattened trailing 3x3 block.

    AIRM distances are evaluated with the smaller argument as the base so
    that ``d(x, y)`` and ``d(y, x)`` agree bit for bit.
    """
    diff = (x - y).reshape(np.broadcast_shapes(x.shape, y.shape)[:-2] + (9,))
    nonzero = diff != 0.0
    first = np.argmax(nonzero, axis=-1)
    greater = np.take_along_axis(diff, first[..., None], axis=-1)[..., 0] > 0.0
    return greater, ~np.any(nonzero, axis=-1)


def _symmetrize(m):
    return 0.5 * (m + np.swapaxes(m, -1, -2))


# Frobenius-orthonormal basis of Sym(3)
_SYM_BASIS = np.zeros((6, 3, 3))
for _k, (_i, _j) in enumerate([(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]):
    if _i == _j:
        _SYM_BASIS[_k, _i, _i] = 1.0
    else:
        _SYM_BASIS[_k, _i, _j] = _SYM_BASIS[_k, _j, _i] = 1.0 / np.sqrt(2.0)


class Manifold:
    """Common interface; subclasses implement the geometry."""

    name = ""
    point_shape = ()
    tangent_shape = ()
    dim = 0
    ambient_dim = 0
    compact = False
    cartan_hadamard = False

    def __repr__(self):
        return f"{type(self).__name__}()"

    def _npoint(self):
        return len(self.point_shape)

    # -- metric ----------------------------------------------------------
    def dist(self, x, y):
        raise NotImplementedError

    def pairwise_dist(self, xs, ys):
        k = self._npoint()
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        return self.dist(np.expand_dims(xs, -1 - k), np.expand_dims(ys, -2 - k))

    def cost(self, x, y):
        return 0.5 * self.dist(x, y) ** 2

    def pairwise_cost(self, xs, ys):
        return 0.5 * self.pairwise_dist(xs, ys) ** 2

    # -- exp / log -------------------------------------------------------
    def exp(self, base, v, check=True):
        base = np.asarray(base, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if check:
            self.check_tangent(base, v)
        return self._exp(base, v)

    def log(self, base, y):
        """Riemannian logarithm; raises :class:`CutLocusError` near the cut locus."""
        v, ok = self.log_masked(base, y)
        if not np.all(ok):
            raise CutLocusError(
                f"{self.name}: log requested within {CUT_LOCUS_TOL:g} of the cut locus"
            )
        return v

    def log_masked(self, base, y):
        """Logarithm plus a boolean mask that is False where the cut-locus guard trips.

        Masked entries hold zero vectors.
        """
        base = np.asarray(base, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return self._log(base, y)

    def norm(self, base, v):
        raise NotImplementedError

    # -- representation --------------------------------------------------
    def project(self, raw):
        raise NotImplementedError

    def check_point(self, x):
        raise NotImplementedError

    def check_tangent(self, base, v):
        pass

    def tangent_basis(self, base):
        """Metric-orthonormal tangent basis, shape ``(..., dim, *tangent_shape)``."""
        raise NotImplementedError

    def origin(self):
        raise NotImplementedError

    def ambient(self, x):
        """Flat ambient coordinates used by the Euclidean baseline."""
        x = np.asarray(x, dtype=np.float64)
        return x.reshape(x.shape[: x.ndim - self._npoint()] + (-1,))

    def ambient_tangent(self, base, v):
        """Flat coordinates of a tangent vector in its natural ambient chart."""
        v = np.asarray(v, dtype=np.float64)
        k = len(self.tangent_shape)
        return v.reshape(v.shape[: v.ndim - k] + (-1,))

    def log_coords(self, base, x):
        """Flattened logarithmic coordinates of ``x`` at ``base``."""
        v = self.log(base, x)
        k = len(self.tangent_shape)
        return v.reshape(v.shape[: v.ndim - k] + (-1,))


class Sphere2(Manifold):
    name = "s2"
    point_shape = (3,)
    tangent_shape = (3,)
    dim = 2
    ambient_dim = 3
    compact = True

    def dist(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return np.arctan2(_norm(np.cross(x, y)), np.sum(x * y, axis=-1))

    def _exp(self, base, v):
        r = _norm(v)
        out = np.cos(r)[..., None] * base + _sinc(r)[..., None] * v
        return out / _norm(out)[..., None]

    def _log(self, base, y):
        base, y = np.broadcast_arrays(base, y)
        inner = np.sum(base * y, axis=-1)
        u = y - inner[..., None] * base
        theta = np.arctan2(_norm(np.cross(base, y)), inner)
        ok = theta < np.pi - CUT_LOCUS_TOL
        v = u / _sinc(np.where(ok, theta, 0.0))[..., None]
        # re-project so the result is tangent to working precision
        v = v - np.sum(v * base, axis=-1)[..., None] * base
        return np.where(ok[..., None], v, 0.0), ok

    def norm(self, base, v):
        return _norm(np.asarray(v, dtype=np.float64))

    def project(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(raw)):
            raise ValueError("non-finite coordinates")
        n = _norm(raw)
        if np.any(n == 0.0):
            raise DegenerateInputError("cannot project the zero vector onto S^2")
        return raw / n[..., None]

    def check_point(self, x, tol=1e-10):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (3,):
            raise ValueError(f"S^2 points have shape (..., 3), got {x.shape}")
        if np.any(np.abs(_norm(x) - 1.0) > tol):
            raise DomainError("S^2 point is not unit norm")

    def check_tangent(self, base, v, tol=1e-9):
        if np.any(np.abs(np.sum(base * v, axis=-1)) > tol):
            raise ValueError("vector is not tangent to S^2 at the base point")

    def tangent_basis(self, base):
        base = np.asarray(base, dtype=np.float64)
        k = np.argmin(np.abs(base), axis=-1)
        e = np.eye(3)[k]
        b1 = e - np.sum(e * base, axis=-1)[..., None] * base
        b1 = b1 / _norm(b1)[..., None]
        b2 = np.cross(base, b1)
        return np.stack([b1, b2], axis=-2)

    def origin(self):
        return np.array([0.0, 0.0, 1.0])


class Rotations3(Manifold):
    name = "so3"
    point_shape = (4,)
    tangent_shape = (3,)
    dim = 3
    ambient_dim = 4
    compact = True

    def dist(self, x, y):
        return rotation_angle(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))

    def _exp(self, base, v):
        q = qmul(base, qexp(v))
        return qsign_fix(q / _norm(q)[..., None])

    def _log(self, base, y):
        w, angle = qlog(qmul(qconj(base), y))
        ok = angle < np.pi - CUT_LOCUS_TOL
        return np.where(ok[..., None], w, 0.0), ok

    def norm(self, base, v):
        return _norm(np.asarray(v, dtype=np.float64))

    def project(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(raw)):
            raise ValueError("non-finite coordinates")
        n = _norm(raw)
        if np.any(n == 0.0):
            raise DegenerateInputError("cannot normalize a zero quaternion")
        return qsign_fix(raw / n[..., None])

    def check_point(self, x, tol=1e-10):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (4,):
            raise ValueError(f"quaternions have shape (..., 4), got {x.shape}")
        if np.any(np.abs(_norm(x) - 1.0) > tol):
            raise DomainError("quaternion is not unit norm")
        if np.any(x[..., 0] < 0.0):
            raise DomainError("quaternion representative must have nonnegative scalar part")

    def tangent_basis(self, base):
        base = np.asarray(base, dtype=np.float64)
        return np.broadcast_to(np.eye(3), base.shape[:-1] + (3, 3)).copy()

    def origin(self):
        return np.array([1.0, 0.0, 0.0, 0.0])


class RigidMotions3(Manifold):
    """SE(3) as SO(3) x R^3 with metric alpha^2 d_rot^2 + |dt|^2."""

    name = "se3"
    point_shape = (7,)
    tangent_shape = (6,)
    dim = 6
    ambient_dim = 7
    compact = False

    def __init__(self, alpha=2.0):
        if not alpha > 0:
            raise ValueError("rotation weight alpha must be positive")
        self.alpha = float(alpha)
        self._rot = Rotations3()

    def __repr__(self):
        return f"RigidMotions3(alpha={self.alpha})"

    def dist(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        drot = rotation_angle(x[..., :4], y[..., :4])
        dt = x[..., 4:] - y[..., 4:]
        return np.sqrt(self.alpha**2 * drot**2 + np.sum(dt * dt, axis=-1))

    def _exp(self, base, v):
        q = self._rot._exp(base[..., :4], v[..., :3])
        t = base[..., 4:] + v[..., 3:]
        lead = np.broadcast_shapes(q.shape[:-1], t.shape[:-1])
        return np.concatenate([np.broadcast_to(q, lead + (4,)), np.broadcast_to(t, lead + (3,))], axis=-1)

    def _log(self, base, y):
        w, ok = self._rot._log(base[..., :4], y[..., :4])
        tau = y[..., 4:] - base[..., 4:]
        lead = np.broadcast_shapes(w.shape[:-1], tau.shape[:-1], ok.shape)
        w = np.broadcast_to(w, lead + (3,))
        tau = np.broadcast_to(tau, lead + (3,))
        return np.concatenate([w, np.where(ok[..., None], tau, 0.0)], axis=-1), ok

    def norm(self, base, v):
        v = np.asarray(v, dtype=np.float64)
        return np.sqrt(self.alpha**2 * np.sum(v[..., :3] ** 2, -1) + np.sum(v[..., 3:] ** 2, -1))

    def project(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        q = self._rot.project(raw[..., :4])
        return np.concatenate([q, raw[..., 4:]], axis=-1)

    def check_point(self, x, tol=1e-10):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (7,):
            raise ValueError(f"SE(3) points have shape (..., 7), got {x.shape}")
        self._rot.check_point(x[..., :4], tol)
        if not np.all(np.isfinite(x[..., 4:])):
            raise DomainError("non-finite translation")

    def tangent_basis(self, base):
        base = np.asarray(base, dtype=np.float64)
        e = np.zeros((6, 6))
        e[:3, :3] = np.eye(3) / self.alpha
        e[3:, 3:] = np.eye(3)
        return np.broadcast_to(e, base.shape[:-1] + (6, 6)).copy()

    def origin(self):
        return np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])


class Spd3(Manifold):
    """SPD(3) with the affine-invariant (``metric="airm"``) or log-Euclidean metric."""

    point_shape = (3, 3)
    tangent_shape = (3, 3)
    dim = 6
    ambient_dim = 9
    cartan_hadamard = True

    def __init__(self, metric="airm"):
        if metric not in ("airm", "log-euclidean"):
            raise ValueError(f"unknown SPD metric {metric!r}")
        self.metric = metric
        self.name = "spd3" if metric == "airm" else "spd3le"

    def __repr__(self):
        return f"Spd3(metric={self.metric!r})"

    def _eig_checked(self, x):
        w, v = sym3_eigh(x)
        if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise DomainError("matrix is not positive definite")
        return w, v

    def _sqrt_pair(self, x):
        w, v = self._eig_checked(x)
        sq = np.sqrt(w)
        half = np.einsum("...ik,...k,...jk->...ij", v, sq, v)
        ihalf = np.einsum("...ik,...k,...jk->...ij", v, 1.0 / sq, v)
        return half, ihalf

    def _logm_checked(self, x):
        w, v = self._eig_checked(x)
        return np.einsum("...ik,...k,...jk->...ij", v, np.log(w), v)

    def dist(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.metric == "log-euclidean":
            d = self._logm_checked(x) - self._logm_checked(y)
            return np.sqrt(np.sum(d * d, axis=(-1, -2)))
        x, y = np.broadcast_arrays(x, y)
        swap, same = _lex_compare(x, y)
        x, y = np.where(swap[..., None, None], y, x), np.where(swap[..., None, None], x, y)
        self._eig_checked(y)
        _, ihalf = self._sqrt_pair(x)
        w, _ = sym3_eigh(_sandwich(ihalf, y))
        return np.where(same, 0.0, np.sqrt(np.sum(np.log(w) ** 2, axis=-1)))

    def pairwise_dist(self, xs, ys):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if self.metric == "log-euclidean":
            lx = self._logm_checked(xs).reshape(xs.shape[:-2] + (9,))
            ly = self._logm_checked(ys).reshape(ys.shape[:-2] + (9,))
            d = lx[..., :, None, :] - ly[..., None, :, :]
            return np.sqrt(np.sum(d * d, axis=-1))
        _, ihx = self._sqrt_pair(xs)
        _, ihy = self._sqrt_pair(ys)
        xb, yb = xs[..., :, None, :, :], ys[..., None, :, :, :]
        swap, same = _lex_compare(xb, yb)
        swap = swap[..., None, None]
        inner = np.where(swap, ihy[..., None, :, :, :] @ xb @ ihy[..., None, :, :, :],
                         ihx[..., :, None, :, :] @ yb @ ihx[..., :, None, :, :])
        w, _ = sym3_eigh(inner)
        return np.where(same, 0.0, np.sqrt(np.sum(np.log(w) ** 2, axis=-1)))

    def _exp(self, base, v):
        if self.metric == "log-euclidean":
            return sym_expm(sym_logm(base) + _symmetrize(v))
        half, ihalf = self._sqrt_pair(base)
        return _symmetrize(_sandwich(half, sym_expm(_sandwich(ihalf, _symmetrize(v)))))

    def _log(self, base, y):
        if self.metric == "log-euclidean":
            v = self._logm_checked(y) - self._logm_checked(base)
        else:
            half, ihalf = self._sqrt_pair(base)
            v = _symmetrize(_sandwich(half, self._logm_checked(_sandwich(ihalf, y))))
        return v, np.ones(v.shape[:-2], dtype=bool)

    def norm(self, base, v):
        v = np.asarray(v, dtype=np.float64)
        if self.metric == "airm":
            _, ihalf = self._sqrt_pair(np.asarray(base, dtype=np.float64))
            v = _sandwich(ihalf, v)
        return np.sqrt(np.sum(v * v, axis=(-1, -2)))

    def project(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(raw)):
            raise ValueError("non-finite coordinates")
        return _symmetrize(sym_apply(_symmetrize(raw), lambda w: np.maximum(w, SPD_EIG_FLOOR)))

    def check_point(self, x, tol=1e-10):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-2:] != (3, 3):
            raise ValueError(f"SPD points have shape (..., 3, 3), got {x.shape}")
        scale = np.maximum(1.0, np.max(np.abs(x), axis=(-1, -2)))
        if np.any(np.max(np.abs(x - np.swapaxes(x, -1, -2)), axis=(-1, -2)) > tol * scale):
            raise DomainError("matrix is not symmetric")
        self._eig_checked(x)

    def check_tangent(self, base, v, tol=1e-9):
        scale = np.maximum(1.0, np.max(np.abs(v)))
        if np.max(np.abs(v - np.swapaxes(v, -1, -2))) > tol * scale:
            raise ValueError("SPD tangent vectors must be symmetric")

    def tangent_basis(self, base):
        base = np.asarray(base, dtype=np.float64)
        if self.metric == "log-euclidean":
            return np.broadcast_to(_SYM_BASIS, base.shape[:-2] + (6, 3, 3)).copy()
        half, _ = self._sqrt_pair(base)
        return _sandwich(half[..., None, :, :], _SYM_BASIS)

    def origin(self):
        return np.eye(3)

    def ambient_tangent(self, base, v):
        v = np.asarray(v, dtype=np.float64)
        if self.metric == "log-euclidean":
            # differential of expm at log(base) maps the log-domain chart to ambient
            w, u = sym3_eigh(sym_logm(np.asarray(base, dtype=np.float64)))
            ew = np.exp(w)
            dw = w[..., :, None] - w[..., None, :]
            de = ew[..., :, None] - ew[..., None, :]
            same = np.abs(dw) < 1e-12
            gamma = np.where(same, ew[..., :, None], de / np.where(same, 1.0, dw))
            inner = np.swapaxes(u, -1, -2) @ v @ u
            v = u @ (inner * gamma) @ np.swapaxes(u, -1, -2)
        return v.reshape(v.shape[:-2] + (9,))


def minkowski(x, y):
    return -x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] + x[..., 2] * y[..., 2]


class Hyperbolic2(Manifold):
    """H^2 in the Lorentz (hyperboloid) model."""

    name = "h2"
    point_shape = (3,)
    tangent_shape = (3,)
    dim = 2
    ambient_dim = 3
    cartan_hadamard = True

    def dist(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        diff = x - y
        chord2 = np.maximum(minkowski(diff, diff), 0.0)
        return 2.0 * np.arcsinh(0.5 * np.sqrt(chord2))

    def _renorm(self, x):
        x0 = np.sqrt(1.0 + x[..., 1] ** 2 + x[..., 2] ** 2)
        return np.concatenate([x0[..., None], x[..., 1:]], axis=-1)

    def _exp(self, base, v):
        r = np.sqrt(np.maximum(minkowski(v, v), 0.0))
        shc = np.where(r > 0, np.sinh(r) / np.where(r > 0, r, 1.0), 1.0)
        return self._renorm(np.cosh(r)[..., None] * base + shc[..., None] * v)

    def _log(self, base, y):
        base, y = np.broadcast_arrays(base, y)
        d = self.dist(base, y)
        u = y + minkowski(base, y)[..., None] * base
        fac = np.where(d > 0, d / np.sinh(np.where(d > 0, d, 1.0)), 1.0)
        v = fac[..., None] * u
        v = v + minkowski(base, v)[..., None] * base
        return v, np.ones(d.shape, dtype=bool)

    def norm(self, base, v):
        v = np.asarray(v, dtype=np.float64)
        return np.sqrt(np.maximum(minkowski(v, v), 0.0))

    def project(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(raw)):
            raise ValueError("non-finite coordinates")
        return self._renorm(raw)

    def check_point(self, x, tol=1e-9):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (3,):
            raise ValueError(f"H^2 points have shape (..., 3), got {x.shape}")
        scale = np.maximum(1.0, x[..., 0] ** 2)
        if np.any(np.abs(minkowski(x, x) + 1.0) > tol * scale) or np.any(x[..., 0] <= 0):
            raise DomainError("point is not on the upper hyperboloid sheet")

    def check_tangent(self, base, v, tol=1e-9):
        scale = np.maximum(1.0, np.abs(base[..., 0]) * np.max(np.abs(v)))
        if np.any(np.abs(minkowski(base, v)) > tol * scale):
            raise ValueError("vector is not Minkowski-orthogonal to the base point")

    def tangent_basis(self, base):
        base = np.asarray(base, dtype=np.float64)
        e1 = np.broadcast_to(np.array([0.0, 1.0, 0.0]), base.shape)
        e2 = np.broadcast_to(np.array([0.0, 0.0, 1.0]), base.shape)
        p1 = e1 + minkowski(base, e1)[..., None] * base
        b1 = p1 / np.sqrt(minkowski(p1, p1))[..., None]
        p2 = e2 + minkowski(base, e2)[..., None] * base
        p2 = p2 - minkowski(p2, b1)[..., None] * b1
        b2 = p2 / np.sqrt(minkowski(p2, p2))[..., None]
        return np.stack([b1, b2], axis=-2)

    def origin(self):
        return np.array([1.0, 0.0, 0.0])


MANIFOLD_NAMES = ("s2", "so3", "spd3", "spd3le", "se3", "h2")


def get_manifold(name, alpha=2.0):
    """Manifold instance for a short name (``alpha`` only applies to ``se3``)."""
    if name == "s2":
        return Sphere2()
    if name == "so3":
        return Rotations3()
    if name == "spd3":
        return Spd3("airm")
    if name == "spd3le":
        return Spd3("log-euclidean")
    if name == "se3":
        return RigidMotions3(alpha)
    if name == "h2":
        return Hyperbolic2()
    raise ValueError(f"unknown manifold {name!r}; expected one of {MANIFOLD_NAMES}")
