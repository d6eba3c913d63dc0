"""Log-domain Sinkhorn on discrete supports (the numerical reference)."""

from dataclasses import dataclass

import numpy as np

from ._accel import lse_rows
from .errors import ConsistencyError, DegenerateInputError
from .semidual import GibbsPlan

KL_FLOOR = 1e-30


@dataclass
class SinkhornResult:
    f: np.ndarray
    g: np.ndarray
    plan: GibbsPlan
    value: float
    iterations: int
    marginal_error: float


def median_epsilon(cost, scale=0.05):
    """``scale * median(cost)``; the even-count median averages the middle pair."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.size == 0:
        raise ValueError("empty cost matrix")
    med = float(np.median(cost))
    if med <= 0.0:
        raise DegenerateInputError("median cost is zero; cannot set epsilon")
    return scale * med


def _xlogy_ratio(p, q):
    """Elementwise ``p * log(p / max(q, floor))`` with ``0 log 0 = 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p * (np.log(np.maximum(p, KL_FLOOR)) - np.log(np.maximum(q, KL_FLOOR)))
    return np.where(p > 0, out, 0.0)


def entropic_objective(plan, cost, mu, nu, epsilon):
    """``<P, C> + eps * KL(P || mu x nu)``."""
    p = plan.matrix if isinstance(plan, GibbsPlan) else np.asarray(plan, dtype=np.float64)
    ref = np.outer(mu, nu)
    return float(np.sum(p * cost) + epsilon * np.sum(_xlogy_ratio(p, ref)))


def plan_from_potentials(f, g, cost, mu, nu, epsilon):
    with np.errstate(divide="ignore"):
        logp = (f[:, None] + g[None, :] - cost) / epsilon + np.log(mu)[:, None] + np.log(nu)[None, :]
    return np.exp(logp)


def sinkhorn_log_domain(cost, mu, nu, epsilon, max_iters=200, tol=1e-9):
    """Alternate ``f <- T_nu(g)``, ``g <- T_mu(f)`` until the row error is <= ``tol``.

    After each ``g`` update the column marginals are exact, so the stopping
    test only needs the row error, which falls out of the next ``f`` update
    for free: row_i / mu_i = exp((f_i - T_nu(g)_i) / eps).  The returned
    potentials are gauge-fixed to ``sum_j nu_j g_j = 0``.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if cost.shape != (len(mu), len(nu)):
        raise ValueError(f"cost shape {cost.shape} does not match weights")
    with np.errstate(divide="ignore"):
        log_mu = np.log(mu)
        log_nu = np.log(nu)
    scaled = cost / epsilon
    scaled_t = np.ascontiguousarray(scaled.T)

    def t_nu(g):
        return -epsilon * lse_rows(g[None, :] / epsilon - scaled, log_nu)

    def t_mu(f):
        return -epsilon * lse_rows(f[None, :] / epsilon - scaled_t, log_mu)

    g = np.zeros(len(nu))
    f = t_nu(g)
    it = 0
    for it in range(1, max_iters + 1):
        g = t_mu(f)
        f_next = t_nu(g)
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(f_next))):
            raise ConsistencyError(
                f"Sinkhorn produced non-finite potentials at iteration {it} "
                f"(epsilon={epsilon:.3g}, cost range [{cost.min():.3g}, {cost.max():.3g}])"
            )
        row_err = np.max(mu * np.abs(np.expm1((f - f_next) / epsilon)))
        if row_err <= tol:
            break
        f = f_next

    shift = float(nu @ g)
    g = g - shift
    f = f + shift
    p = plan_from_potentials(f, g, cost, mu, nu, epsilon)
    err = max(np.max(np.abs(p.sum(axis=1) - mu)), np.max(np.abs(p.sum(axis=0) - nu)))
    plan = GibbsPlan(p, mu, nu, float(epsilon))
    value = entropic_objective(plan, cost, mu, nu, epsilon)
    return SinkhornResult(f, g, plan, value, it, float(err))
