import json

import numpy as np
import pytest

from ernot import bench
from ernot.geometry import get_manifold
from ernot.metrics import plan_kl
from ernot.sampling import WrappedNormalSpec, sample
from ernot.sinkhorn import sinkhorn_log_domain


def tiny(name, seed=0, **kw):
    kw.setdefault("train", {"steps": 30, "width": 16, "batch_size": 16})
    return bench.build_benchmark(name, seed, n=24, m=20, pool_size=64, n_landmarks=16, median_sample=32, **kw)


def test_benchmark_centers():
    s2 = bench.build_benchmark("s2")
    np.testing.assert_allclose(s2.source.center, [0, 0, 1.0])
    np.testing.assert_allclose(s2.target.center, np.array([-0.5, 0, -0.866]) / np.linalg.norm([-0.5, 0, -0.866]))
    assert s2.source.sigma == s2.target.sigma == 0.7

    spd = bench.build_benchmark("spd3")
    np.testing.assert_allclose(spd.target.center, [[2.125, 0, -1.875], [0, 1, 0], [-1.875, 0, 2.125]], atol=1e-15)
    np.testing.assert_allclose(spd.source.center, np.diag([4.0, 1.0, 0.25]))

    h2 = bench.build_benchmark("h2")
    man = h2.manifold
    assert man.dist(man.origin(), h2.target.center) == pytest.approx(2.0, abs=1e-14)
    assert h2.target.sigma == 0.5

    so3 = bench.build_benchmark("so3")
    assert so3.manifold.dist(so3.manifold.origin(), so3.target.center) == pytest.approx(2.5)


def test_unknown_benchmark_and_method():
    with pytest.raises(ValueError, match="unknown benchmark"):
        bench.build_benchmark("klein")
    with pytest.raises(ValueError, match="unknown methods"):
        bench.build_benchmark("s2", methods=("magic",))


@pytest.mark.parametrize("name", bench.BENCHMARKS)
def test_supports_are_valid_and_deterministic(name):
    spec = tiny(name)
    a = bench.draw_supports(spec)
    b = bench.draw_supports(spec)
    spec.manifold.check_point(a.x)
    spec.manifold.check_point(a.y)
    np.testing.assert_array_equal(a.cost, b.cost)
    assert a.cost.shape == (24, 20)
    assert a.epsilon > 0


def test_epsilon_subsample_tracks_full_median():
    spec = bench.build_benchmark("s2", n=600, m=600)
    sup = bench.draw_supports(spec)
    full = 0.05 * np.median(sup.cost)
    assert sup.epsilon == pytest.approx(full, rel=0.1)


def test_ambient_baseline_flat_case_matches_intrinsic():
    # SE(3) with a shared rotation: ambient and intrinsic costs coincide
    se3 = get_manifold("se3")
    spec = bench.build_benchmark("se3", n=15, m=12)
    rng = np.random.default_rng(0)
    q = np.array([0.8, 0.6, 0.0, 0.0])
    x = np.concatenate([np.tile(q, (15, 1)), rng.standard_normal((15, 3))], axis=1)
    y = np.concatenate([np.tile(q, (12, 1)), rng.standard_normal((12, 3)) + 1], axis=1)
    cost = se3.pairwise_cost(x, y)
    sup = bench.Supports(x, y, cost, np.full(15, 1 / 15), np.full(12, 1 / 12), 0.1)
    ref = sinkhorn_log_domain(cost, sup.mu, sup.nu, 0.1)
    base = bench.ambient_baseline(spec, sup)
    assert plan_kl(ref.plan, base) <= 1e-6
    np.testing.assert_allclose(base.matrix.sum(axis=1), sup.mu, atol=1e-6)
    np.testing.assert_allclose(base.matrix.sum(axis=0), sup.nu, atol=1e-6)


def test_tangent_baseline_exact_for_log_euclidean_at_identity():
    # log-Euclidean is flat; at base I the tangent chart is the log chart
    le = get_manifold("spd3le")
    spec = bench.build_benchmark("spd3le", n=10, m=10)
    half = sample(le, WrappedNormalSpec(np.eye(3), 0.5), 5, 0)
    x = np.concatenate([half, np.linalg.inv(half)])
    y = sample(le, WrappedNormalSpec(np.eye(3), 0.5), 10, 1)
    sup = bench.Supports(x, y, le.pairwise_cost(x, y), np.full(10, 0.1), np.full(10, 0.1), 0.2)
    base, _ = bench.frechet_mean(le, x)
    np.testing.assert_allclose(base, np.eye(3), atol=1e-12)
    plan, n_cut = bench.tangent_baseline(spec, sup)
    ref = sinkhorn_log_domain(sup.cost, sup.mu, sup.nu, 0.2)
    assert n_cut == 0
    assert plan_kl(ref.plan, plan) <= 1e-9


def test_tangent_baseline_tiny_ball():
    s2 = get_manifold("s2")
    spec = bench.build_benchmark("s2", n=30, m=30)
    x = sample(s2, WrappedNormalSpec([0, 0, 1.0], 0.01), 30, 0)
    y = sample(s2, WrappedNormalSpec(s2.exp([0, 0, 1.0], [0.01, 0, 0]), 0.01), 30, 1)
    cost = s2.pairwise_cost(x, y)
    eps = 0.05 * np.median(cost)
    sup = bench.Supports(x, y, cost, np.full(30, 1 / 30), np.full(30, 1 / 30), eps)
    plan, _ = bench.tangent_baseline(spec, sup)
    ref = sinkhorn_log_domain(cost, sup.mu, sup.nu, eps)
    assert plan_kl(ref.plan, plan) <= 1e-4


def test_baselines_on_single_atoms():
    spec = bench.build_benchmark("h2", n=2, m=2)
    man = spec.manifold
    x = man.origin()[None]
    y = man.exp(man.origin(), [0, 1.0, 0])[None]
    sup = bench.Supports(x, y, man.pairwise_cost(x, y), np.ones(1), np.ones(1), 0.1)
    np.testing.assert_allclose(bench.ambient_baseline(spec, sup).matrix, [[1.0]], rtol=1e-12)
    np.testing.assert_allclose(bench.tangent_baseline(spec, sup)[0].matrix, [[1.0]], rtol=1e-12)
    mean, _ = bench.frechet_mean(man, x)
    np.testing.assert_array_equal(mean, x[0])


def test_reference_only_self_comparison():
    res = bench.run_benchmark(tiny("spd3", methods=("sinkhorn",)))
    (rep,) = res.reports
    assert (rep.plan_kl, rep.conditional_w1, rep.map_l2, rep.endpoint_error) == (0.0, 0.0, 0.0, 0.0)
    assert res.valid


@pytest.mark.parametrize("name", ["s2", "se3"])
def test_full_pipeline_small(name):
    res = bench.run_benchmark(tiny(name), keep=True)
    assert [r.method for r in res.reports] == list(bench.METHODS)
    for r in res.reports:
        assert np.isfinite([r.plan_kl, r.conditional_w1, r.map_l2, r.endpoint_error]).all()
    assert set(res.maps) == set(bench.METHODS) | {"reference"}
    assert res.reference_marginal_error <= bench.REFERENCE_MARGINAL_TOL
    again = bench.run_benchmark(tiny(name))
    assert [r.plan_kl for r in again.reports] == [r.plan_kl for r in res.reports]


def test_csv_roundtrip(tmp_path):
    res = bench.run_benchmark(tiny("h2", methods=("sinkhorn", "ambient")))
    path = tmp_path / "r.csv"
    rows = res.rows()
    bench.write_rows(path, rows, bench.RESULT_COLUMNS)
    back = bench.read_rows(path)
    assert back == [{k: row[k] for k in bench.RESULT_COLUMNS} for row in rows]


def test_json_has_config_echo(tmp_path):
    res = bench.run_benchmark(tiny("h2", methods=("sinkhorn",)))
    path = tmp_path / "r.json"
    bench.write_result_json(path, res)
    data = json.loads(path.read_text())
    assert data["config"]["manifold"] == "h2"
    assert data["config"]["n"] == 24
    assert data["reports"][0]["method"] == "sinkhorn"


def test_memory_accounting():
    assert bench.sinkhorn_bytes(2000, 2000) / bench.sinkhorn_bytes(1000, 1000) == 4.0
    # 4 parameter copies + 3 activation sets + 3 B x B blocks and the feature batch, all f64
    expected = 8 * (4 * 1000 + 3 * 256 * 256 * 2 + 3 * 256 * 256 + 256 * 256)
    assert bench.neural_working_set_bytes(256, 256, 256, 2, 1000) == expected


def test_scaling_study_small(tmp_path):
    rows = bench.run_scaling_study("h2", [32, 64], train_steps=3, batch_size=16, width=8,
                                   memory_budget=bench.sinkhorn_bytes(40, 40))
    by = {(r["method"], r["n"]): r for r in rows}
    assert by[("ernot", 32)]["bytes"] == by[("ernot", 64)]["bytes"]
    assert by[("sinkhorn", 64)]["bytes"] == 4 * by[("sinkhorn", 32)]["bytes"]
    assert by[("sinkhorn", 32)]["status"] == "ok"
    assert by[("sinkhorn", 64)]["status"] == "infeasible"
    assert np.isnan(by[("sinkhorn", 64)]["seconds"])
    path = tmp_path / "s.csv"
    bench.write_rows(path, rows, bench.SCALING_COLUMNS)
    back = bench.read_rows(path)
    assert back[0] == rows[0]
    assert back[-1]["status"] == "infeasible" and np.isnan(back[-1]["seconds"])
    with pytest.raises(ValueError):
        bench.run_scaling_study("h2", [64, 32])
