"""Command-line entry point: ``ernot <command> ...``."""

import argparse
import ast
import contextlib
import dataclasses
import json
import sys
import warnings

import numpy as np

from . import bench
from .checks import run_geometry_suite
from .errors import DegenerateInputError
from .extract import ExtractorConfig, extract_map_rowwise
from .geometry import MANIFOLD_NAMES, get_manifold
from .potential import save_checkpoint
from .sinkhorn import median_epsilon, sinkhorn_log_domain
from .trainer import TrainConfig, write_training_log

_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)} - {"epsilon"}
_SPEC_KEYS = {f.name for f in dataclasses.fields(bench.BenchmarkSpec)} - {
    "name", "manifold", "source", "target", "seed", "train", "sampling_manifold"}


class PhaseError(Exception):
    def __init__(self, phase, exc):
        super().__init__(f"{phase}: {type(exc).__name__}: {exc}")
        self.phase = phase


@contextlib.contextmanager
def phase(name):
    try:
        yield
    except PhaseError:
        raise
    except Exception as exc:
        raise PhaseError(name, exc) from exc


def _parse_value(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def read_config(path):
    """Flat ``key = value`` lines; ``#`` starts a comment.  Values are Python literals or bare strings."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _TRAIN_KEYS | _SPEC_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _parse_value(value)
    return out


def _overrides(config, **extra):
    train = {k: v for k, v in config.items() if k in _TRAIN_KEYS}
    spec = {k: v for k, v in config.items() if k in _SPEC_KEYS}
    if "methods" in spec:
        spec["methods"] = tuple(spec["methods"])
    train.update({k: v for k, v in extra.items() if v is not None})
    if train:
        spec["train"] = train
    return spec


def parse_sizes(text):
    """``"128..4096"`` doubles from 128 up to 4096; otherwise a comma list."""
    if ".." in text:
        lo, hi = (int(s) for s in text.split(".."))
        if not 0 < lo <= hi:
            raise argparse.ArgumentTypeError(f"bad size range {text!r}")
        sizes = []
        while lo <= hi:
            sizes.append(lo)
            lo *= 2
        return sizes
    return sorted(int(s) for s in text.split(","))


def _load_matrix(path):
    if path.endswith(".npy"):
        return np.load(path)
    return np.loadtxt(path, delimiter="," if path.endswith(".csv") else None, ndmin=2)


def cmd_check_geometry(args, config):
    names = [args.manifold] if args.manifold else list(MANIFOLD_NAMES)
    with phase("check-geometry"):
        results = run_geometry_suite(names, n=args.draws, seed=args.seed)
    failed = False
    for name, (errs, bad, secs) in results.items():
        detail = " ".join(f"{k}={v:.2e}" for k, v in errs.items())
        print(f"{name:7s} {'FAIL' if bad else 'ok  '} {secs:6.2f}s {detail}")
        failed |= bool(bad)
    return 1 if failed else 0


def cmd_sinkhorn(args, config):
    with phase("load"):
        if args.cost:
            cost = _load_matrix(args.cost)
            n, m = cost.shape
            mu, nu = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
            eps = args.epsilon or median_epsilon(cost, config.get("epsilon_scale", 0.05))
        else:
            spec = bench.build_benchmark(args.bench, args.seed, **_overrides(config))
            sup = bench.draw_supports(spec)
            cost, mu, nu = sup.cost, sup.mu, sup.nu
            eps = args.epsilon or sup.epsilon
    with phase("sinkhorn"):
        res = sinkhorn_log_domain(cost, mu, nu, eps, args.max_iters, args.tol)
    print(f"epsilon={eps!r} value={res.value!r} iterations={res.iterations} marginal_error={res.marginal_error:.3e}")
    if args.out:
        with phase("write"):
            np.savez(args.out, f=res.f, g=res.g, plan=res.plan.matrix, epsilon=eps, value=res.value)
    return 0


def cmd_train(args, config):
    with phase("setup"):
        spec = bench.build_benchmark(args.bench, args.seed, **_overrides(config, steps=args.steps))
        sup = bench.draw_supports(spec)
    with phase("train"):
        params, _, diag = bench.train_ernot(spec, sup)
    with phase("write"):
        save_checkpoint(args.out, params)
        if args.log:
            write_training_log(args.log, diag)
    print(f"steps={diag['steps']} trailing_objective={diag['trailing_mean']!r} seconds={diag['seconds']:.1f}")
    return 0


def cmd_bench_run(args, config):
    with phase("setup"):
        spec = bench.build_benchmark(args.bench, args.seed, **_overrides(config, steps=args.steps))
    with phase("run"):
        result = bench.run_benchmark(spec)
    with phase("write"):
        bench.write_rows(args.out, result.rows(), bench.RESULT_COLUMNS)
        if args.json:
            bench.write_result_json(args.json, result)
    for r in result.reports:
        print(f"{r.method:9s} plan_kl={r.plan_kl:.4g} cW1={r.conditional_w1:.4g} "
              f"map_l2={r.map_l2:.4g} endpoint={r.endpoint_error:.4g}")
    if not result.valid:
        print(f"reference marginal error {result.reference_marginal_error:.2e} exceeds "
              f"{bench.REFERENCE_MARGINAL_TOL:g}; row marked invalid", file=sys.stderr)
        return 1
    return 0


def cmd_scaling(args, config):
    with phase("scaling"):
        rows = bench.run_scaling_study(
            args.manifold, args.sizes, seed=args.seed, train_steps=args.steps,
            methods=tuple(args.methods.split(",")), memory_budget=args.memory_budget,
        )
    with phase("write"):
        bench.write_rows(args.out, rows, bench.SCALING_COLUMNS)
    for r in rows:
        print(f"{r['method']:9s} n={r['n']:6d} seconds={r['seconds']:.3f} bytes={r['bytes']} {r['status']}")
    return 0


def cmd_extract(args, config):
    with phase("load"):
        data = np.load(args.plan)
        plan, targets = data["plan"], data["targets"]
        man = get_manifold(str(data["manifold"]) if "manifold" in data else args.manifold)
        heat = args.heat_time
        if heat is None and args.mode == "heat":
            if "epsilon" not in data:
                raise DegenerateInputError("heat mode needs --heat-time or an 'epsilon' entry")
            heat = config.get("heat_factor", 100.0) * float(data["epsilon"])
    with phase("extract"):
        cfg = ExtractorConfig(iterations=args.iterations, step_size=args.step_size,
                              heat_time=heat if args.mode == "heat" else None, starts=args.starts)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            points, info = extract_map_rowwise(man, plan, targets, args.mode, cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    with phase("write"):
        np.savez(args.out, points=points, residual=info.residual, log_density=info.log_density,
                 skipped=info.skipped, underflow=info.underflow)
    print(f"rows={len(points)} max_residual={np.nanmax(info.residual):.3e} "
          f"skipped={int(info.skipped.sum())} underflow={int(info.underflow.sum())}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ernot", description="Entropic Riemannian neural optimal transport")
    p.add_argument("--config", help="flat key=value file overriding benchmark / training defaults")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-geometry", help="randomized manifold invariant suite")
    c.add_argument("--manifold", choices=MANIFOLD_NAMES)
    c.add_argument("--draws", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check_geometry)

    c = sub.add_parser("sinkhorn", help="log-domain Sinkhorn on a cost file or benchmark supports")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--cost", help=".npy, .csv or whitespace-separated cost matrix (uniform weights)")
    src.add_argument("--bench", choices=bench.BENCHMARKS)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--epsilon", type=float)
    c.add_argument("--max-iters", type=int, default=200)
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--out", help="write f, g, plan to this .npz")
    c.set_defaults(func=cmd_sinkhorn)

    c = sub.add_parser("train", help="train the neural potential on benchmark supports")
    c.add_argument("--bench", required=True, choices=bench.BENCHMARKS)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--steps", type=int)
    c.add_argument("--out", required=True, help="checkpoint path")
    c.add_argument("--log", help="per-step CSV (step, lr, objective)")
    c.set_defaults(func=cmd_train)

    c = sub.add_parser("bench", help="benchmark runs")
    bsub = c.add_subparsers(dest="bench_command", required=True)
    r = bsub.add_parser("run", help="all methods on one benchmark and seed")
    r.add_argument("--bench", required=True, choices=bench.BENCHMARKS)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--steps", type=int)
    r.add_argument("--out", required=True, help="results CSV")
    r.add_argument("--json", help="full result object with config echo")
    r.set_defaults(func=cmd_bench_run)

    c = sub.add_parser("scaling", help="wall-clock and memory versus support size")
    c.add_argument("--manifold", default="s2", choices=bench.BENCHMARKS)
    c.add_argument("--sizes", type=parse_sizes, default=parse_sizes("128..4096"))
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--steps", type=int, default=50)
    c.add_argument("--methods", default="ernot,sinkhorn")
    c.add_argument("--memory-budget", type=float, help="bytes; larger cells are marked infeasible")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_scaling)

    c = sub.add_parser("extract", help="row-wise transport map from a saved plan")
    c.add_argument("--plan", required=True, help=".npz with 'plan', 'targets' and optionally 'manifold', 'epsilon'")
    c.add_argument("--mode", default="heat", choices=("heat", "bary"))
    c.add_argument("--manifold", choices=MANIFOLD_NAMES, help="used when the file has no 'manifold' entry")
    c.add_argument("--heat-time", type=float)
    c.add_argument("--iterations", type=int, default=32)
    c.add_argument("--step-size", type=float, default=0.5)
    c.add_argument("--starts", type=int, default=1)
    c.add_argument("--out", default="extracted.npz")
    c.set_defaults(func=cmd_extract)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with phase("config"):
            config = read_config(args.config) if args.config else {}
        return args.func(args, config)
    except PhaseError as exc:
        print(f"ernot: error in {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
