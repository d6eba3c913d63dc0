"""Synthetic intrinsic-geometry benchmarks, baselines and the scaling study."""

import csv
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .extract import ExtractorConfig, barycenter_rows, extract_map_rowwise
from .geometry import Spd3, get_manifold
from .metrics import MetricsReport, conditional_w1, map_errors, plan_kl
from .potential import forward, init_params
from .sampling import (
    LogEmbedding,
    UniformSpec,
    WrappedNormalSpec,
    landmark_embedding_from_pool,
    make_rng,
    rotation_about_axis,
    sample,
)
from .semidual import build_gibbs_plan, center_potential
from .sinkhorn import median_epsilon, sinkhorn_log_domain
from .trainer import StreamData, SupportData, TrainConfig, train

BENCHMARKS = ("s2", "so3", "spd3", "spd3le", "se3", "h2")
METHODS = ("ernot", "ambient", "tangent", "sinkhorn")
REFERENCE_MARGINAL_TOL = 1e-6

# sub-stream tags for make_rng([seed, tag])
_SRC, _TGT, _EPS_SRC, _EPS_TGT, _POOL_SRC, _POOL_TGT, _TRAIN = range(7)


@dataclass
class BenchmarkSpec:
    name: str
    manifold: object
    source: object
    target: object
    n: int = 200
    m: int = 200
    epsilon_scale: float = 0.05
    seed: int = 0
    methods: tuple = METHODS
    extractor: str = "heat"
    heat_factor: float = 100.0
    features: str = "landmark"
    n_landmarks: int = 256
    pool_size: int = 4096
    median_sample: int = 256
    sinkhorn_iters: int = 200
    sinkhorn_tol: float = 1e-9
    train: dict = field(default_factory=dict)
    # SPD(3) log-Euclidean shares the AIRM support, so sampling may use another geometry
    sampling_manifold: object = None

    def __post_init__(self):
        if not self.epsilon_scale > 0:
            raise ValueError("epsilon_scale must be positive")
        if self.n < 2 or self.m < 2:
            raise ValueError("support sizes must be >= 2")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")

    def config_echo(self):
        out = {k: v for k, v in asdict(self).items() if k not in ("manifold", "source", "target", "sampling_manifold")}
        out["manifold"] = self.manifold.name
        out["methods"] = list(self.methods)
        return out


def build_benchmark(name, seed=0, **overrides):
    """Benchmark instance with its fixed centers and tangent scales."""
    if name == "s2":
        man = get_manifold("s2")
        tgt = np.array([-0.5, 0.0, -0.866])
        spec = BenchmarkSpec(name, man, WrappedNormalSpec([0.0, 0.0, 1.0], 0.7),
                             WrappedNormalSpec(tgt / np.linalg.norm(tgt), 0.7), features="landmark")
    elif name == "so3":
        man = get_manifold("so3")
        center = man.exp(man.origin(), np.array([2.5, 0.0, 0.0]))
        spec = BenchmarkSpec(name, man, WrappedNormalSpec(man.origin(), 0.8),
                             WrappedNormalSpec(center, 0.8), features="landmark")
    elif name in ("spd3", "spd3le"):
        man = get_manifold(name)
        src = np.diag([4.0, 1.0, 0.25])
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        rot = np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
        tgt = rot @ np.diag([0.25, 1.0, 4.0]) @ rot.T
        spec = BenchmarkSpec(name, man, WrappedNormalSpec(src, 0.5), WrappedNormalSpec(tgt, 0.5),
                             features="log", sampling_manifold=Spd3("airm"))
    elif name == "se3":
        man = get_manifold("se3", alpha=2.0)
        q = rotation_about_axis([0.0, 0.0, 1.0], np.pi / 3)
        center = np.concatenate([q, [1.0, 0.5, -0.5]])
        spec = BenchmarkSpec(name, man, UniformSpec((-4.0, 4.0)),
                             WrappedNormalSpec(center, sigma_rot=0.3, sigma_trans=0.5, box=(-4.0, 4.0)),
                             features="landmark")
    elif name == "h2":
        man = get_manifold("h2")
        center = man.exp(man.origin(), np.array([0.0, 2.0, 0.0]))
        spec = BenchmarkSpec(name, man, WrappedNormalSpec(man.origin(), 0.5),
                             WrappedNormalSpec(center, 0.5), features="log")
    else:
        raise ValueError(f"unknown benchmark {name!r}; expected one of {BENCHMARKS}")
    return replace(spec, seed=seed, **overrides)


@dataclass
class Supports:
    x: np.ndarray
    y: np.ndarray
    cost: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    epsilon: float


def draw_supports(spec):
    sman = spec.sampling_manifold or spec.manifold
    x = sample(sman, spec.source, spec.n, [spec.seed, _SRC])
    y = sample(sman, spec.target, spec.m, [spec.seed, _TGT])
    xe = sample(sman, spec.source, spec.median_sample, [spec.seed, _EPS_SRC])
    ye = sample(sman, spec.target, spec.median_sample, [spec.seed, _EPS_TGT])
    eps = median_epsilon(spec.manifold.pairwise_cost(xe, ye), spec.epsilon_scale)
    cost = spec.manifold.pairwise_cost(x, y)
    return Supports(x, y, cost, np.full(spec.n, 1.0 / spec.n), np.full(spec.m, 1.0 / spec.m), eps)


def ambient_baseline(spec, sup):
    """Sinkhorn with 0.5 |x - y|^2 on flattened ambient coordinates."""
    man = spec.manifold
    ax, ay = man.ambient(sup.x), man.ambient(sup.y)
    cost = 0.5 * np.sum((ax[:, None, :] - ay[None, :, :]) ** 2, axis=-1)
    res = sinkhorn_log_domain(cost, sup.mu, sup.nu, sup.epsilon, spec.sinkhorn_iters, spec.sinkhorn_tol)
    return res.plan


def frechet_mean(manifold, points, iterations=50, step_size=0.5):
    w = np.full((1, len(points)), 1.0 / len(points))
    z, info = barycenter_rows(manifold, points, w, ExtractorConfig(iterations=iterations, step_size=step_size))
    return z[0], info


def tangent_baseline(spec, sup):
    """Sinkhorn with squared Euclidean cost in the tangent chart at the source Frechet mean.

    Atoms at the cut locus of the mean are mapped to the zero vector and the
    count is reported.
    """
    man = spec.manifold
    base, _ = frechet_mean(man, sup.x)
    vx, okx = man.log_masked(base, sup.x)
    vy, oky = man.log_masked(base, sup.y)
    ux, uy = man.ambient_tangent(base, vx), man.ambient_tangent(base, vy)
    cost = 0.5 * np.sum((ux[:, None, :] - uy[None, :, :]) ** 2, axis=-1)
    res = sinkhorn_log_domain(cost, sup.mu, sup.nu, sup.epsilon, spec.sinkhorn_iters, spec.sinkhorn_tol)
    return res.plan, int((~okx).sum() + (~oky).sum())


def build_embedding(spec):
    man = spec.manifold
    if spec.features == "log":
        return LogEmbedding(man)
    sman = spec.sampling_manifold or man
    half = spec.pool_size // 2
    pool = np.concatenate([
        sample(sman, spec.source, half, [spec.seed, _POOL_SRC]),
        sample(sman, spec.target, spec.pool_size - half, [spec.seed, _POOL_TGT]),
    ])
    return landmark_embedding_from_pool(man, pool, spec.n_landmarks)


def train_config(spec, epsilon):
    kw = dict(spec.train)
    kw.setdefault("seed", int(make_rng([spec.seed, _TRAIN]).integers(2**31)))
    return TrainConfig(epsilon=epsilon, **kw)


def train_ernot(spec, sup, embedding=None):
    """Train the neural potential on the shared supports; returns (params, embedding, diagnostics)."""
    embedding = embedding or build_embedding(spec)
    feats = embedding(sup.y)
    params, diag = train(SupportData(sup.cost, feats, sup.mu, sup.nu), train_config(spec, sup.epsilon))
    return params, embedding, diag


def ernot_plan(params, embedding, sup):
    g = center_potential(forward(params, embedding(sup.y)), sup.nu)
    return build_gibbs_plan(g, sup.mu, sup.nu, sup.cost, sup.epsilon)


@dataclass
class BenchmarkResult:
    spec: BenchmarkSpec
    reports: list
    timings: dict
    ot_eps: float
    epsilon: float
    reference_marginal_error: float
    valid: bool
    notes: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    plans: dict = field(default_factory=dict)

    def rows(self):
        out = []
        for r in self.reports:
            row = {"bench": self.spec.name, "seed": self.spec.seed}
            row.update(r.as_dict())
            row.update(epsilon=self.epsilon, ot_eps=self.ot_eps,
                       ref_marginal_error=self.reference_marginal_error, valid=self.valid)
            out.append(row)
        return out

    def to_json(self):
        return {
            "config": self.spec.config_echo(),
            "epsilon": self.epsilon,
            "ot_eps": self.ot_eps,
            "reference_marginal_error": self.reference_marginal_error,
            "valid": self.valid,
            "timings": self.timings,
            "notes": self.notes,
            "reports": [r.as_dict() for r in self.reports],
        }


def extractor_config(spec, epsilon):
    heat = spec.heat_factor * epsilon if spec.extractor == "heat" else None
    return ExtractorConfig(heat_time=heat)


def run_benchmark(spec, keep=False):
    """Reference, baselines and Entropic RNOT on one benchmark; metrics against the reference.

    ``keep=True`` retains plans and extracted maps on the result.
    """
    timings = {}
    notes = {}
    t = time.perf_counter()
    sup = draw_supports(spec)
    timings["supports"] = time.perf_counter() - t

    t = time.perf_counter()
    ref = sinkhorn_log_domain(sup.cost, sup.mu, sup.nu, sup.epsilon, spec.sinkhorn_iters, spec.sinkhorn_tol)
    timings["reference"] = time.perf_counter() - t
    valid = ref.marginal_error <= REFERENCE_MARGINAL_TOL

    man = spec.manifold
    xcfg = extractor_config(spec, sup.epsilon)
    t = time.perf_counter()
    t_star, _ = extract_map_rowwise(man, ref.plan, sup.y, spec.extractor, xcfg)
    target_dist = man.pairwise_dist(sup.y, sup.y)
    timings["reference_extract"] = time.perf_counter() - t

    plans = {}
    for method in spec.methods:
        t = time.perf_counter()
        if method == "sinkhorn":
            plans[method] = ref.plan
        elif method == "ambient":
            plans[method] = ambient_baseline(spec, sup)
        elif method == "tangent":
            plans[method], notes["tangent_cut_locus_atoms"] = tangent_baseline(spec, sup)
        elif method == "ernot":
            params, emb, diag = train_ernot(spec, sup)
            plans[method] = ernot_plan(params, emb, sup)
            notes["ernot_trailing_objective"] = diag["trailing_mean"]
            notes["ernot_train_seconds"] = diag["seconds"]
        timings[method] = time.perf_counter() - t

    reports = []
    maps = {}
    for method, plan in plans.items():
        t = time.perf_counter()
        t_hat = t_star if plan is ref.plan else extract_map_rowwise(man, plan, sup.y, spec.extractor, xcfg)[0]
        l2, endpoint = map_errors(man, t_hat, t_star)
        reports.append(MetricsReport(
            method=method, manifold=man.name, n=spec.n, m=spec.m,
            plan_kl=plan_kl(plan, ref.plan),
            conditional_w1=conditional_w1(plan, ref.plan, target_dist),
            map_l2=l2, endpoint_error=endpoint,
        ))
        maps[method] = t_hat
        timings[f"{method}_metrics"] = time.perf_counter() - t

    result = BenchmarkResult(spec, reports, timings, ref.value, sup.epsilon, ref.marginal_error, valid, notes)
    if keep:
        result.maps = dict(maps, reference=t_star)
        result.plans = dict(plans, reference=ref.plan)
        result.notes["supports"] = sup
    return result


# ---------------------------------------------------------------------------
# CSV / JSON reporting
# ---------------------------------------------------------------------------

RESULT_COLUMNS = ("bench", "seed", "method", "manifold", "n", "m", "plan_kl", "conditional_w1",
                  "map_l2", "endpoint_error", "epsilon", "ot_eps", "ref_marginal_error", "valid")
SCALING_COLUMNS = ("manifold", "n", "method", "seconds", "bytes", "status")

_INT_COLS = {"seed", "n", "m", "bytes"}
_BOOL_COLS = {"valid"}
_STR_COLS = {"bench", "method", "manifold", "status"}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns))
        w.writeheader()
        for row in rows:
            w.writerow({c: _fmt(row[c]) for c in columns})


def read_rows(path):
    """Parse rows written by :func:`write_rows` back into typed dicts."""
    out = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for k, v in raw.items():
                if k in _STR_COLS:
                    row[k] = v
                elif k in _BOOL_COLS:
                    row[k] = v == "true"
                elif k in _INT_COLS:
                    row[k] = int(v)
                else:
                    row[k] = float(v)
            out.append(row)
    return out


def write_result_json(path, result):
    with open(path, "w") as fh:
        json.dump(result.to_json(), fh, indent=2, default=float)


# ---------------------------------------------------------------------------
# scaling study
# ---------------------------------------------------------------------------


def neural_working_set_bytes(batch, input_dim, width, depth, n_params):
    """Analytic peak bytes of one training step (batch-dependent only)."""
    params = 4 * n_params  # parameters, two Adam moments, gradient
    acts = 3 * batch * width * depth  # pre-activations, activations, backprop deltas
    batch_mats = 3 * batch * batch + batch * input_dim  # cost block, logits, softmax; features
    return 8 * (params + acts + batch_mats)


def sinkhorn_bytes(n, m):
    """Analytic peak bytes of the dense solver: cost, scaled, transposed, one temporary, plan."""
    return 8 * 5 * n * m


def _index_sampler(points):
    def draw(rng, k):
        return points[rng.integers(0, len(points), size=k)]
    return draw


def _ernot_cell(man, emb, x, y, eps, seed, steps, batch_size, width, depth):
    cfg = TrainConfig(epsilon=eps, steps=steps, batch_size=batch_size, seed=seed, width=width, depth=depth)
    data = StreamData(man, _index_sampler(x), _index_sampler(y), emb)
    n_params = init_params(emb.dim, width, depth).size
    nbytes = neural_working_set_bytes(batch_size, emb.dim, width, depth, n_params)

    def run():
        train(data, cfg)

    def warm():
        train(data, replace(cfg, steps=2))

    return run, warm, nbytes


def _sinkhorn_cell(man, x, y, eps, iters, euclidean):
    n = len(x)

    def cost(a, b):
        if not euclidean:
            return man.pairwise_cost(a, b)
        aa, bb = man.ambient(a), man.ambient(b)
        return 0.5 * (np.sum(aa**2, 1)[:, None] + np.sum(bb**2, 1)[None, :] - 2 * aa @ bb.T)

    def solve(a, b, k):
        w = np.full(len(a), 1.0 / len(a))
        return sinkhorn_log_domain(cost(a, b), w, w, eps, k, 0.0)

    def run():
        solve(x, y, iters)

    def warm():
        solve(x[:16], y[:16], 2)

    return run, warm, sinkhorn_bytes(n, n)


def run_scaling_study(name, sizes, seed=0, train_steps=50, batch_size=256,
                      methods=("ernot", "sinkhorn"), memory_budget=None, sinkhorn_iters=200,
                      width=256, depth=2):
    """Wall-clock and analytic memory per support size ``N = N_x = N_y``.

    Every method gets one untimed warm-up call before its first timed cell.
    Training draws batches from the N-point supports but evaluates costs and
    features on the batch only; Sinkhorn time includes forming the N x N
    cost matrix.  Cells whose analytic footprint exceeds ``memory_budget``
    bytes, or that raise MemoryError, are recorded as infeasible.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    base = build_benchmark(name, seed=seed)
    man = base.manifold
    sman = base.sampling_manifold or man
    emb = build_embedding(base)
    xe = sample(sman, base.source, base.median_sample, [seed, _EPS_SRC])
    ye = sample(sman, base.target, base.median_sample, [seed, _EPS_TGT])
    eps = median_epsilon(man.pairwise_cost(xe, ye), base.epsilon_scale)
    rows = []
    warmed = set()
    for n in sizes:
        x = sample(sman, base.source, n, [seed, _SRC, n])
        y = sample(sman, base.target, n, [seed, _TGT, n])
        for method in methods:
            if method == "ernot":
                run, warm, nbytes = _ernot_cell(man, emb, x, y, eps, seed, train_steps, batch_size, width, depth)
            elif method in ("sinkhorn", "euclidean-sinkhorn"):
                run, warm, nbytes = _sinkhorn_cell(man, x, y, eps, sinkhorn_iters, method != "sinkhorn")
            else:
                raise ValueError(f"unknown scaling method {method!r}")
            row = dict(manifold=man.name, n=n, method=method, seconds=float("nan"), bytes=nbytes,
                       status="infeasible")
            if memory_budget is None or nbytes <= memory_budget:
                try:
                    if method not in warmed:
                        warm()
                        warmed.add(method)
                    t = time.perf_counter()
                    run()
                    row.update(seconds=time.perf_counter() - t, status="ok")
                except MemoryError:
                    pass
            rows.append(row)
    return rows
