import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ernot.errors import ConsistencyError
from ernot.semidual import (
    DiscreteMeasure,
    GibbsPlan,
    build_gibbs_plan,
    center_potential,
    dual_gap,
    gibbs_conditional_weights,
    semidual_value,
    soft_c_transform,
)
from ernot.sinkhorn import sinkhorn_log_domain


def random_instance(rng, n=None, m=None):
    n = n or int(rng.integers(1, 9))
    m = m or int(rng.integers(1, 9))
    cost = rng.random((n, m)) * 2.0
    mu = rng.random(n) + 0.1
    nu = rng.random(m) + 0.1
    return cost, mu / mu.sum(), nu / nu.sum()


# -- soft c-transform ---------------------------------------------------------------


def test_single_atom_reduces_to_difference():
    assert soft_c_transform([0.4], [1.0], np.array([1.5]), 0.3) == pytest.approx(1.1, abs=1e-15)


def test_equidistant_atoms_zero_potential():
    assert soft_c_transform([0.0, 0.0], [0.5, 0.5], np.array([0.7, 0.7]), 0.2) == pytest.approx(0.7, abs=1e-15)


def test_matches_extended_precision_sum():
    rng = np.random.default_rng(0)
    g = rng.standard_normal(5)
    nu = rng.random(5)
    nu /= nu.sum()
    cost = rng.random(5) * 3
    ref = oracles.soft_c_transform_mp(g, nu, cost, 0.3)
    assert soft_c_transform(g, nu, cost, 0.3) == pytest.approx(ref, rel=1e-12)


def test_small_epsilon_tends_to_hard_transform():
    rng = np.random.default_rng(1)
    g = rng.standard_normal(6)
    cost = rng.random((4, 6))
    nu = np.full(6, 1 / 6)
    hard = np.min(cost - g, axis=1)
    soft = soft_c_transform(g, nu, cost, 1e-4)
    # the soft minimum exceeds the hard one by at most eps * log(1/nu_min)
    assert np.all(soft >= hard - 1e-12)
    assert np.all(soft - hard <= 1e-4 * np.log(6) + 1e-12)


def test_no_overflow_at_tiny_epsilon():
    cost = np.array([[1e3, 2e3]])
    out = soft_c_transform([0.0, 0.0], [0.5, 0.5], cost, 1e-6)
    assert np.isfinite(out).all()
    assert out[0] == pytest.approx(1e3, rel=1e-8)


def test_zero_weight_atoms_are_ignored():
    cost = np.array([[1.0, 0.0]])
    assert soft_c_transform([0.0, 5.0], [1.0, 0.0], cost, 0.1)[0] == pytest.approx(1.0)


def test_empty_support_and_bad_epsilon():
    with pytest.raises(ValueError):
        soft_c_transform([], [], np.zeros((2, 0)), 0.1)
    with pytest.raises(ValueError):
        soft_c_transform([0.0], [1.0], np.zeros((2, 1)), 0.0)


@given(seed=st.integers(0, 2**32 - 1), eps=st.floats(0.01, 2.0))
def test_soft_transform_is_sup_norm_contraction(seed, eps):
    rng = np.random.default_rng(seed)
    cost, _, nu = random_instance(rng)
    g1 = rng.standard_normal(len(nu)) * 3
    g2 = rng.standard_normal(len(nu)) * 3
    lhs = np.max(np.abs(soft_c_transform(g1, nu, cost, eps) - soft_c_transform(g2, nu, cost, eps)))
    assert lhs <= np.max(np.abs(g1 - g2)) + 1e-12


@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-50, 50))
def test_constant_shift_equivariance(seed, shift):
    rng = np.random.default_rng(seed)
    cost, _, nu = random_instance(rng)
    g = rng.standard_normal(len(nu))
    a = soft_c_transform(g + shift, nu, cost, 0.3)
    b = soft_c_transform(g, nu, cost, 0.3) - shift
    np.testing.assert_allclose(a, b, atol=1e-12 * max(1.0, abs(shift)))


# -- centering ---------------------------------------------------------------------


def test_center_weighted_hand_values():
    np.testing.assert_allclose(center_potential([3.0, 1.0, 2.0], [0.5, 0.25, 0.25]), [0.75, -1.25, -0.25])


def test_center_edge_cases():
    np.testing.assert_array_equal(center_potential([2.0, 2.0, 2.0]), 0.0)
    np.testing.assert_array_equal(center_potential([1.0, -1.0]), [1.0, -1.0])
    with pytest.raises(ValueError):
        center_potential([1.0, 2.0], [1.0])


# -- semidual value and Gibbs plans -------------------------------------------------


def test_single_atoms_value_is_cost():
    assert semidual_value([0.0], [1.0], [1.0], np.array([[2.5]]), 0.1) == pytest.approx(2.5)


def test_gauge_invariance():
    rng = np.random.default_rng(2)
    cost, mu, nu = random_instance(rng, 5, 6)
    g = rng.standard_normal(6)
    assert semidual_value(g + 3.7, mu, nu, cost, 0.4) == pytest.approx(semidual_value(g, mu, nu, cost, 0.4), abs=1e-13)


def test_conditional_weights_simple_cases():
    np.testing.assert_allclose(gibbs_conditional_weights([1.0, 1.0], [0.5, 0.5], np.array([[2.0, 2.0]]), 0.1),
                               [[0.5, 0.5]])
    np.testing.assert_array_equal(gibbs_conditional_weights([0.3], [1.0], np.array([[0.7]]), 0.1), [[1.0]])


def test_conditional_weights_match_gibbs_density():
    rng = np.random.default_rng(3)
    cost, _, nu = random_instance(rng, 6, 7)
    g = rng.standard_normal(7)
    eps = 0.5
    f = soft_c_transform(g, nu, cost, eps)
    ref = np.exp((f[:, None] + g[None, :] - cost) / eps) * nu
    np.testing.assert_allclose(gibbs_conditional_weights(g, nu, cost, eps), ref, atol=1e-10)


def test_plan_edge_cases():
    plan = build_gibbs_plan([0.0], [1.0], [1.0], np.array([[3.0]]), 0.2)
    np.testing.assert_array_equal(plan.matrix, [[1.0]])
    cost = np.full((3, 4), 1.3)
    plan = build_gibbs_plan(np.zeros(4), np.full(3, 1 / 3), np.full(4, 0.25), cost, 0.5)
    np.testing.assert_allclose(plan.matrix, 1 / 12, rtol=1e-14)
    plan.check()


def test_plan_row_marginal_exact():
    rng = np.random.default_rng(4)
    cost, mu, nu = random_instance(rng, 7, 5)
    plan = build_gibbs_plan(rng.standard_normal(5), mu, nu, cost, 0.2)
    plan.check(1e-14)
    np.testing.assert_allclose(plan.matrix.sum(axis=1), mu, atol=1e-15)


def test_plan_check_flags_bad_rows():
    plan = GibbsPlan(np.array([[0.2, 0.2], [0.3, 0.3]]), np.array([0.5, 0.5]), np.array([0.5, 0.5]), 0.1)
    with pytest.raises(ConsistencyError):
        plan.check()


def test_discrete_measure_validation():
    m = DiscreteMeasure.uniform(np.zeros((4, 3)))
    assert len(m) == 4
    with pytest.raises(ValueError):
        DiscreteMeasure(np.zeros((2, 3)), [0.7, 0.7])
    with pytest.raises(ValueError):
        DiscreteMeasure(np.zeros((2, 3)), [1.0])


# -- duality and the gap identity -----------------------------------------------------


def test_sinkhorn_potential_attains_ot():
    rng = np.random.default_rng(5)
    cost, mu, nu = random_instance(rng, 8, 6)
    ref = sinkhorn_log_domain(cost, mu, nu, 0.3, max_iters=5000, tol=1e-14)
    assert semidual_value(ref.g, mu, nu, cost, 0.3) == pytest.approx(ref.value, rel=1e-6)
    assert dual_gap(ref.g, mu, nu, cost, 0.3, ref.value) <= 1e-6


def test_single_atom_gap_zero():
    assert dual_gap([0.0], [1.0], [1.0], np.array([[0.4]]), 0.1, 0.4) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(8))
def test_gap_equals_scaled_kl(seed):
    rng = np.random.default_rng(100 + seed)
    cost, mu, nu = random_instance(rng, 8, 8)
    eps = float(rng.uniform(0.1, 1.0))
    p_star, ot = oracles.sinkhorn_scaling(cost, mu, nu, eps)
    g = rng.standard_normal(8)
    gap = dual_gap(g, mu, nu, cost, eps, ot)
    kl = oracles.kl_direct(p_star, build_gibbs_plan(g, mu, nu, cost, eps).matrix)
    assert gap == pytest.approx(eps * kl, rel=1e-6)


def test_negative_gap_is_a_consistency_error():
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    w = np.array([0.5, 0.5])
    with pytest.raises(ConsistencyError):
        dual_gap(np.zeros(2), w, w, cost, 0.1, ot_eps=-5.0)
    exact = semidual_value(np.zeros(2), w, w, cost, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert dual_gap(np.zeros(2), w, w, cost, 0.1, exact) == 0.0
    with pytest.warns(RuntimeWarning):
        assert dual_gap(np.zeros(2), w, w, cost, 0.1, exact - 1e-7) == 0.0
