"""Plan- and map-level evaluation metrics."""

from dataclasses import asdict, dataclass

import numpy as np

from ._accel import transport_simplex
from .errors import ConsistencyError

KL_FLOOR = 1e-30
W1_MAX_ATOMS = 512


@dataclass
class MetricsReport:
    method: str
    manifold: str
    n: int
    m: int
    plan_kl: float
    conditional_w1: float
    map_l2: float
    endpoint_error: float

    def as_dict(self):
        return asdict(self)


def _matrix(p):
    return np.asarray(getattr(p, "matrix", p), dtype=np.float64)


def plan_kl(p, q):
    """``sum p log(p / max(q, 1e-30))`` with ``0 log 0 = 0``."""
    p = _matrix(p)
    q = _matrix(q)
    if p.shape != q.shape:
        raise ValueError(f"plan shapes differ: {p.shape} vs {q.shape}")
    mask = p > 0
    pm = p[mask]
    return float(np.sum(pm * (np.log(pm) - np.log(np.maximum(q[mask], KL_FLOOR)))))


def tv_distance(p, q):
    """Total variation with the probabilistic convention ``0.5 * sum |p - q|``."""
    return 0.5 * float(np.sum(np.abs(_matrix(p) - _matrix(q))))


def exact_w1(a, b, dist, max_atoms=W1_MAX_ATOMS, max_iter=None):
    """Exact OT value between histograms ``a`` and ``b`` under ``dist``.

    Zero-mass atoms are dropped before the transportation simplex runs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    ia = np.flatnonzero(a > 0)
    ib = np.flatnonzero(b > 0)
    if len(ia) == 0 or len(ib) == 0:
        raise ValueError("histograms must have positive mass")
    if max(len(ia), len(ib)) > max_atoms:
        raise ValueError(
            f"exact W1 is capped at {max_atoms} atoms per side; "
            "use a Sinkhorn approximation for larger supports"
        )
    a = a[ia] / a[ia].sum()
    b = b[ib] / b[ib].sum()
    c = np.ascontiguousarray(dist[np.ix_(ia, ib)])
    if len(a) == 1 or len(b) == 1:
        return float(np.sum(np.outer(a, b) * c))
    if max_iter is None:
        max_iter = 50 * (len(a) + len(b)) ** 2
    tol = 1e-13 * max(1.0, float(np.max(np.abs(c))))
    value, _, _, status = transport_simplex(a, b, c, max_iter, tol)
    if status != 0:
        raise ConsistencyError("transportation simplex hit its iteration cap")
    return float(value)


def exact_w1_discrete(manifold, atoms_a, weights_a, atoms_b, weights_b, max_atoms=W1_MAX_ATOMS):
    dist = manifold.pairwise_dist(atoms_a, atoms_b)
    return exact_w1(weights_a, weights_b, dist, max_atoms=max_atoms)


def _row_conditionals(p):
    rows = p.sum(axis=1)
    bad = np.flatnonzero(rows <= 0)
    if len(bad):
        raise ValueError(f"plan row {bad[0]} has zero mass")
    return p / rows[:, None]


def fiberwise_tv(p, q):
    """``sum_i mu_i TV(p(.|i), q(.|i))`` for plans sharing the row marginal ``mu``.

    For such plans this equals :func:`tv_distance` of the joint plans.
    """
    p, q = _matrix(p), _matrix(q)
    if p.shape != q.shape:
        raise ValueError("plan shapes differ")
    mu = p.sum(axis=1)
    pc, qc = _row_conditionals(p), _row_conditionals(q)
    return 0.5 * float(mu @ np.sum(np.abs(pc - qc), axis=1))


def conditional_w1(p, q, target_dist):
    """Unweighted mean over rows of W1 between the row-normalized conditionals."""
    pc = _row_conditionals(_matrix(p))
    qc = _row_conditionals(_matrix(q))
    if pc.shape != qc.shape:
        raise ValueError("plan shapes differ")
    return float(np.mean([exact_w1(pc[i], qc[i], target_dist) for i in range(len(pc))]))


def map_errors(manifold, t_hat, t_star):
    """(RMS geodesic error, mean geodesic error) with uniform 1/N averaging."""
    t_hat = np.asarray(t_hat, dtype=np.float64)
    t_star = np.asarray(t_star, dtype=np.float64)
    if t_hat.shape != t_star.shape:
        raise ValueError("maps have different lengths")
    d = manifold.dist(t_hat, t_star)
    return float(np.sqrt(np.mean(d**2))), float(np.mean(d))


def map_errors_weighted(manifold, t_hat, t_star, mu):
    """mu-weighted variant of :func:`map_errors`."""
    d = manifold.dist(np.asarray(t_hat), np.asarray(t_star))
    mu = np.asarray(mu, dtype=np.float64)
    return float(np.sqrt(mu @ d**2)), float(mu @ d)
