import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sionqp.dual import (ConeError, SolverOptions, boundary_proximity, eval_dual, lemma4_slack, minimize_dual,
                         schur_dual_value)
from sionqp.quadform import QuadraticForm, evaluate, lagrangian, psd_check
from sionqp.scqp import SCQP, SensedConstraint, encode_subset_sum, random_scqp, violations


def test_ball_dual_at_one(ball_problem):
    ev = eval_dual(ball_problem, [1.0])
    assert ev.value == pytest.approx(2.0, abs=1e-14)
    assert np.allclose(ev.x_star, [1, 0])


def test_ball_dual_at_two(ball_problem):
    ev = eval_dual(ball_problem, [2.0])
    assert ev.value == pytest.approx(2.5, abs=1e-14)
    assert ev.grad == pytest.approx([0.75], abs=1e-14)


def test_zero_multiplier_unbounded(ball_problem):
    ev = eval_dual(ball_problem, [0.0])
    assert not ev.in_range and ev.value == np.inf


def test_negative_multiplier_rejected(ball_problem):
    with pytest.raises(ConeError):
        eval_dual(ball_problem, [-1.0])


def test_indefinite_lagrangian_rejected():
    c = SensedConstraint(QuadraticForm(np.diag([1.0, -1.0]), [0, 0], 1))
    p = SCQP(QuadraticForm.linear([1, 0]), (c,), [1.0])
    with pytest.raises(ConeError):
        eval_dual(p, [1.0])


def test_minimize_ball(ball_problem):
    res = minimize_dual(ball_problem)
    assert res.converged
    assert res.value == pytest.approx(2.0, abs=1e-8)
    assert res.phi_rows == pytest.approx([1.0], abs=1e-6)
    assert np.allclose(res.x_star, [1, 0], atol=1e-8)


def test_minimize_fig2a(fig2a_builtin):
    b = fig2a_builtin
    res = minimize_dual(b.problem)
    assert res.value - b.oracle_value == pytest.approx(1 / 3, abs=1e-6)
    # the maximizer recorded with the problem; its second coordinate is -1/3
    assert np.allclose(res.x_star.real, b.problem.header["sion_maximizer"], atol=1e-4)
    assert res.x_star[1].real == pytest.approx(-1 / 3, abs=1e-4)


def test_minimize_subset_sum():
    res = minimize_dual(encode_subset_sum([1, 2], 3))
    assert res.value >= 3 - 1e-8


def test_gradient_method_ball(ball_problem):
    res = minimize_dual(ball_problem, SolverOptions(method="gradient"))
    assert res.value == pytest.approx(2.0, abs=1e-6)


def test_history_is_recorded(ball_problem):
    res = minimize_dual(ball_problem)
    assert len(res.history) >= 2
    assert res.history[-1][1] == pytest.approx(res.value, abs=1e-10)


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(grad_tol=0)
    with pytest.raises(ValueError):
        SolverOptions(method="newton")
    with pytest.raises(ValueError):
        SolverOptions(mu_factor=1.5)


def test_schur_ball(ball_problem):
    assert schur_dual_value(ball_problem, [1.0]) == pytest.approx(2.0, abs=1e-10)


def test_schur_zero_linear_part():
    c = SensedConstraint(QuadraticForm(np.eye(2), [0, 0], 1.5))
    p = SCQP(QuadraticForm(np.eye(2), [0, 0], 0.25), (c,), [1.0])
    assert schur_dual_value(p, [2.0]) == pytest.approx(0.25 + 3.0)


def test_schur_matches_eval_on_random(rng):
    for _ in range(10):
        p = random_scqp(rng, int(rng.integers(1, 5)), int(rng.integers(2, 6)))
        phi = np.zeros(len(p.constraints))
        phi[0] = 2.0 + rng.uniform()
        ev = eval_dual(p, phi)
        assert abs(schur_dual_value(p, phi) - ev.value) <= 1e-8 * (1 + abs(ev.value))


def test_boundary_proximity_examples(ball_problem, fig2a_builtin):
    assert boundary_proximity(ball_problem, [0, 0]) == 0.0
    assert boundary_proximity(ball_problem, [np.cos(0.3), np.sin(0.3)]) == pytest.approx(1.0, abs=1e-14)
    assert boundary_proximity(fig2a_builtin.problem, [0, -1 / 3]) == pytest.approx(1 / 9, abs=1e-14)


def test_strong_duality_detected_on_ball(ball_problem):
    res = minimize_dual(ball_problem)
    assert abs(boundary_proximity(ball_problem, res.x_star) - 1) <= 1e-6


def test_lemma4_slack_nonnegative_at_dual_optimum(rng):
    for _ in range(10):
        p = random_scqp(rng, int(rng.integers(1, 4)), int(rng.integers(2, 6)), n_eq=1)
        res = minimize_dual(p)
        assert lemma4_slack(p, res.x_star).min() >= -1e-6


def test_min_eig_reported(fig2a_builtin):
    res = minimize_dual(fig2a_builtin.problem)
    assert res.eval.min_eig_Apsi >= -1e-9
    L = lagrangian(fig2a_builtin.problem.objective, fig2a_builtin.problem.expanded(), res.phi_star)
    assert psd_check(L.A, 1e-9).is_psd


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 3), J=st.integers(2, 5))
def test_weak_duality_at_known_feasible_point(seed, n, J):
    rng = np.random.default_rng(seed)
    p = random_scqp(rng, n, J, n_eq=int(rng.integers(0, J)))
    x0 = np.array([complex(*z) for z in p.header["feasible_point"]])
    assert violations(p, x0).max() <= 1e-10
    res = minimize_dual(p)
    assert res.value >= evaluate(p.objective, x0) - 1e-7 * (1 + abs(res.value))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), t=st.floats(0.0, 3.0))
def test_dual_is_convex_along_segments(seed, t):
    rng = np.random.default_rng(seed)
    p = random_scqp(rng, 2, 3)
    a = np.array([1.0 + t, rng.uniform(0, 0.5), rng.uniform(0, 0.5)])
    b = np.array([2.0, rng.uniform(0, 0.5), rng.uniform(0, 0.5)])
    try:
        fa, fb, fm = (eval_dual(p, v).value for v in (a, b, 0.5 * (a + b)))
    except ConeError:
        return
    assert fm <= 0.5 * (fa + fb) + 1e-9 * (1 + abs(fa) + abs(fb))
