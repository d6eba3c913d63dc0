"""Deterministic transport summaries of discrete conditional laws.

Both extractors run a fixed iteration budget, vectorized over a chunk of
rows at once:

* Karcher barycenter: ``z <- Exp_z(eta * sum_j w_j Log_z(y_j))`` from the
  heaviest atom.
* Heat-smoothed mode: the same update with heat-reweighted responsibilities
  ``a_j(z) ~ w_j exp(-c(z, y_j) / (2t))``; the 1/(2t) gradient factor is
  absorbed into ``eta``.  Among the starts (top-k atoms by weight) the
  terminal point with the largest ``log sum_j w_j exp(-c(z, y_j)/(2t))``
  wins.

Atoms whose logarithm trips the cut-locus guard are skipped for that step
and the row is flagged.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._accel import lse_rows


@dataclass
class ExtractorConfig:
    iterations: int = 32
    step_size: float = 0.5
    heat_time: float = None
    starts: int = 1
    chunk_size: int = 256

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.step_size <= 1:
            raise ValueError("step_size must lie in (0, 1]")
        if self.heat_time is not None and not self.heat_time > 0:
            raise ValueError("heat_time must be positive")
        if self.starts < 1 or self.chunk_size < 1:
            raise ValueError("starts and chunk_size must be >= 1")


@dataclass
class ExtractionInfo:
    residual: np.ndarray  # stationarity norm |sum_j coef_j Log_z(y_j)|
    log_density: np.ndarray  # heat objective at the output (nan for barycenters)
    skipped: np.ndarray  # True where some atom hit the cut-locus guard
    underflow: np.ndarray  # True where all heat responsibilities vanished


def _weighted_log_sum(manifold, z, atoms, coef):
    """``sum_j coef[r, j] Log_{z_r}(y_j)`` for every row, plus a skip flag."""
    logs, ok = manifold.log_masked(np.expand_dims(z, 1), np.expand_dims(atoms, 0))
    skipped = ~np.all(ok | (coef == 0.0), axis=1)
    coef = np.where(ok, coef, 0.0)
    return np.einsum("rm,rm...->r...", coef, logs), skipped


def _heat_logits(manifold, z, atoms, logw, heat_time):
    c = 0.5 * manifold.dist(np.expand_dims(z, 1), np.expand_dims(atoms, 0)) ** 2
    return logw - c / (2.0 * heat_time)


def _log_weights(w):
    with np.errstate(divide="ignore"):
        return np.log(w)


def _dirac_rows(weights):
    return np.count_nonzero(weights, axis=1) == 1


def _pin_dirac_rows(atoms, weights, z, residual):
    """Rows with a single atom return it bit-exactly, with zero residual."""
    dirac = _dirac_rows(weights)
    if np.any(dirac):
        z = z.copy()
        z[dirac] = atoms[np.argmax(weights[dirac], axis=1)]
        residual = np.where(dirac, 0.0, residual)
    return z, residual


def barycenter_rows(manifold, atoms, weights, config):
    """Karcher iterations for each row of ``weights`` (rows sum to 1)."""
    atoms = np.asarray(atoms, dtype=np.float64)
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    z = atoms[np.argmax(weights, axis=1)]
    skipped = np.zeros(len(weights), dtype=bool)
    for _ in range(config.iterations):
        v, sk = _weighted_log_sum(manifold, z, atoms, weights)
        skipped |= sk
        z = manifold.exp(z, config.step_size * v, check=False)
    v, sk = _weighted_log_sum(manifold, z, atoms, weights)
    skipped |= sk
    residual = manifold.norm(z, v)
    z, residual = _pin_dirac_rows(atoms, weights, z, residual)
    nan = np.full(len(weights), np.nan)
    return z, ExtractionInfo(residual, nan, skipped, np.zeros(len(weights), dtype=bool))


def _heat_ascent(manifold, atoms, logw, z, config):
    skipped = np.zeros(len(z), dtype=bool)
    for _ in range(config.iterations):
        logits = _heat_logits(manifold, z, atoms, logw, config.heat_time)
        lse = lse_rows(logits, np.zeros(logits.shape[1]))
        with np.errstate(invalid="ignore"):
            resp = np.exp(logits - lse[:, None])
        resp = np.where(np.isfinite(lse)[:, None], resp, 0.0)
        v, sk = _weighted_log_sum(manifold, z, atoms, resp)
        skipped |= sk
        z = manifold.exp(z, config.step_size * v, check=False)
    logits = _heat_logits(manifold, z, atoms, logw, config.heat_time)
    lse = lse_rows(logits, np.zeros(logits.shape[1]))
    with np.errstate(invalid="ignore"):
        resp = np.exp(logits - lse[:, None])
    resp = np.where(np.isfinite(lse)[:, None], resp, 0.0)
    v, _ = _weighted_log_sum(manifold, z, atoms, resp)
    return z, lse, manifold.norm(z, v), skipped


def heat_mode_rows(manifold, atoms, weights, config):
    """Heat-smoothed mode for each row of ``weights``."""
    if config.heat_time is None:
        raise ValueError("heat-mode extraction needs config.heat_time")
    atoms = np.asarray(atoms, dtype=np.float64)
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    logw = _log_weights(weights)
    n_starts = min(config.starts, weights.shape[1])
    order = np.argsort(-weights, axis=1, kind="stable")[:, :n_starts]

    best_z = best_res = None
    best_val = np.full(len(weights), -np.inf)
    skipped = np.zeros(len(weights), dtype=bool)
    for s in range(n_starts):
        z, val, res, sk = _heat_ascent(manifold, atoms, logw, atoms[order[:, s]], config)
        skipped |= sk
        if best_z is None:
            best_z, best_res, best_val = z, res, val
            continue
        better = val > best_val
        best_z = np.where(better.reshape((-1,) + (1,) * (z.ndim - 1)), z, best_z)
        best_res = np.where(better, res, best_res)
        best_val = np.where(better, val, best_val)

    underflow = ~np.isfinite(best_val)
    if np.any(underflow):
        best_z = best_z.copy()
        best_z[underflow] = atoms[order[underflow, 0]]
    best_z, best_res = _pin_dirac_rows(atoms, weights, best_z, best_res)
    best_val = np.where(_dirac_rows(weights), 0.0, best_val)
    return best_z, ExtractionInfo(best_res, best_val, skipped, underflow)


def karcher_barycenter(manifold, atoms, weights, config=None):
    """Weighted Frechet mean of ``atoms``; returns ``(point, residual)``."""
    config = config or ExtractorConfig()
    _warn_nonunique(manifold, "barycenter")
    z, info = barycenter_rows(manifold, atoms, weights, config)
    return z[0], float(info.residual[0])


def heat_smoothed_mode(manifold, atoms, weights, config):
    """Heat-smoothed mode of one conditional; returns ``(point, log_density)``."""
    z, info = heat_mode_rows(manifold, atoms, weights, config)
    return z[0], float(info.log_density[0])


def _warn_nonunique(manifold, mode):
    if mode == "barycenter" and manifold.compact:
        warnings.warn(
            f"{manifold.name}: Frechet means may be non-unique on a compact manifold; "
            "the barycenter output is the deterministic Karcher iterate",
            RuntimeWarning,
            stacklevel=3,
        )


def extract_map_rowwise(manifold, plan, atoms, mode="heat", config=None):
    """Normalize each plan row and run the chosen extractor, ``chunk_size`` rows at a time.

    Returns ``(points, info)`` with one output point per row.
    """
    config = config or ExtractorConfig()
    p = np.asarray(getattr(plan, "matrix", plan), dtype=np.float64)
    rows = p.sum(axis=1)
    bad = np.flatnonzero(~(rows > 0))
    if len(bad):
        raise ValueError(f"plan row {bad[0]} has zero mass")
    weights = p / rows[:, None]
    if mode in ("bary", "barycenter"):
        fn = barycenter_rows
        _warn_nonunique(manifold, "barycenter")
    elif mode in ("heat", "heat-mode"):
        fn = heat_mode_rows
    else:
        raise ValueError(f"unknown extractor {mode!r}")

    zs, infos = [], []
    for lo in range(0, len(weights), config.chunk_size):
        z, info = fn(manifold, atoms, weights[lo : lo + config.chunk_size], config)
        zs.append(z)
        infos.append(info)
    info = ExtractionInfo(*(np.concatenate([getattr(i, f) for i in infos]) for f in
                            ("residual", "log_density", "skipped", "underflow")))
    if np.any(info.skipped):
        warnings.warn(
            f"{int(info.skipped.sum())} rows skipped atoms at the cut locus",
            RuntimeWarning,
            stacklevel=2,
        )
    return np.concatenate(zs), info
