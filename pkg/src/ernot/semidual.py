"""Soft c-transform, semidual objective and Gibbs plans on discrete supports.

All functions take the cost matrix ``C[i, j] = c(x_i, y_j)`` explicitly; use
``manifold.pairwise_cost`` to build it.  Potentials ``g`` live on the target
atoms, weights ``mu`` / ``nu`` are probability vectors.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._accel import lse_rows
from .errors import ConsistencyError

WEIGHT_TOL = 1e-10
GAP_WARN_TOL = -1e-8
GAP_ERROR_TOL = -1e-6


@dataclass
class DiscreteMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1 or len(self.weights) != len(self.atoms):
            raise ValueError("need one weight per atom")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, atoms):
        atoms = np.asarray(atoms, dtype=np.float64)
        return cls(atoms, np.full(len(atoms), 1.0 / len(atoms)))

    def __len__(self):
        return len(self.weights)


@dataclass
class GibbsPlan:
    matrix: np.ndarray
    row_marginal: np.ndarray
    col_weights: np.ndarray
    epsilon: float

    def check(self, tol=1e-10):
        if np.any(self.matrix < 0):
            raise ConsistencyError("plan has negative entries")
        err = np.max(np.abs(self.matrix.sum(axis=1) - self.row_marginal))
        if err > tol:
            raise ConsistencyError(f"row sums deviate from mu by {err:.3g}")
        if abs(self.matrix.sum() - 1.0) > tol:
            raise ConsistencyError("plan mass is not 1")

    def conditionals(self):
        rows = self.matrix.sum(axis=1, keepdims=True)
        return self.matrix / rows


def _log_weights(w):
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(w, dtype=np.float64))


def soft_c_transform(g, nu, cost, epsilon):
    """``-eps * log sum_j nu_j exp((g_j - C[..., j]) / eps)`` along the last axis."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    g = np.asarray(g, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    if g.shape[-1] == 0:
        raise ValueError("empty target support")
    lead = cost.shape[:-1]
    z = ((g - cost) / epsilon).reshape(-1, cost.shape[-1])
    out = -epsilon * lse_rows(z, _log_weights(nu))
    return out.reshape(lead) if lead else float(out[0])


def center_potential(raw, weights=None):
    """Subtract the (weighted) mean; uniform weights when ``weights`` is None."""
    raw = np.asarray(raw, dtype=np.float64)
    if weights is None:
        return raw - raw.mean()
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != raw.shape:
        raise ValueError("raw values and weights differ in length")
    return raw - weights @ raw


def semidual_value(g, mu, nu, cost, epsilon):
    """``sum_j nu_j g_j + sum_i mu_i T(g)(x_i)``."""
    g = np.asarray(g, dtype=np.float64)
    return float(np.dot(nu, g) + np.dot(mu, soft_c_transform(g, nu, cost, epsilon)))


def gibbs_conditional_weights(g, nu, cost, epsilon):
    """Row-stochastic Gibbs conditionals ``nu_j exp((g_j - C_ij)/eps)`` normalized per row."""
    g = np.asarray(g, dtype=np.float64)
    cost = np.atleast_2d(np.asarray(cost, dtype=np.float64))
    z = (g - cost) / epsilon + _log_weights(nu)
    z = z - z.max(axis=1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=1, keepdims=True)


def build_gibbs_plan(g, mu, nu, cost, epsilon):
    mu = np.asarray(mu, dtype=np.float64)
    cond = gibbs_conditional_weights(g, nu, cost, epsilon)
    return GibbsPlan(mu[:, None] * cond, mu, np.asarray(nu, dtype=np.float64), float(epsilon))


def dual_gap(g, mu, nu, cost, epsilon, ot_eps):
    """``OT_eps - J(g)``, i.e. ``eps * KL(pi* || pi_g)``; tiny negatives clamp to 0."""
    gap = ot_eps - semidual_value(g, mu, nu, cost, epsilon)
    if gap < GAP_ERROR_TOL * max(1.0, abs(ot_eps)):
        raise ConsistencyError(
            f"negative dual gap {gap:.3g}: the reference OT value is not converged"
        )
    if gap < GAP_WARN_TOL:
        warnings.warn(f"dual gap {gap:.3g} < 0 clamped to 0", RuntimeWarning, stacklevel=2)
    return max(0.0, gap)
