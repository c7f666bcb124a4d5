import numpy as np
import pytest

from sionqp.physics1d import Grid1D, build_design_scqp, witness_set
from sionqp.infer import MaterialSet, resimulate
from sionqp.quadform import QuadraticForm, evaluate, psd_check
from sionqp.scqp import (SCQP, NonlocalDesign, ScatteringModel, Sense, SensedConstraint, brute_force_primal,
                         build_local_constraints, build_nonlocal_constraints, constraint_scale, dumps,
                         encode_subset_sum, find_kappa, loads, random_scqp, residuals, violations)


def test_scalar_local_constraint():
    g, u = 0.3 + 0.2j, 2.0
    m = ScatteringModel([[g]], [1.0], [u], (np.eye(1),), ("EQ",))
    (c,) = build_local_constraints(m)
    assert c.sense is Sense.EQ
    for x in (0.7, 0.2 - 0.4j, 1j):
        want = np.real(np.conj(x) * 1) - (u - g.real) * abs(x) ** 2
        assert evaluate(c.form, [x]) == pytest.approx(want, abs=1e-14)


def test_scalar_imaginary_witness_vanishes_at_origin():
    m = ScatteringModel([[0.3 + 0.2j]], [1.0], [2.0], (1j * np.eye(1),), ("GE",))
    (c,) = build_local_constraints(m)
    assert evaluate(c.form, [0.0]) == 0.0


def test_local_constraints_hold_at_physical_solution():
    grid = Grid1D(8, 1 / 40)
    mat = MaterialSet(4 + 0.1j, binary=True)
    p, model = build_design_scqp(grid, mat, 0.28, "global+local")
    x, _ = resimulate(np.full(8, mat.chi_max), model)
    for c in p.constraints:
        assert abs(evaluate(c.form, x)) <= 1e-9 * constraint_scale(c.form) * (1 + np.abs(x).max() ** 2)


def test_local_model_rejects_nondiagonal_potential():
    with pytest.raises(ValueError):
        ScatteringModel(np.zeros((2, 2)), [1, 1], [[1, 0.5], [0.5, 1]], (np.eye(2),), ("EQ",))


def _nonlocal_pieces(rng, n=4):
    G0 = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * 0.1
    G0 = 0.5 * (G0 + G0.T)
    Xb = np.diag(rng.uniform(1, 2, n) + 0.1j)
    j_i = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return G0, Xb, j_i


def test_nonlocal_single_block_satisfied(rng):
    G0, Xb, j_i = _nonlocal_pieces(rng)
    n = Xb.shape[0]
    d = NonlocalDesign((Xb,), np.eye(n), (np.eye(n),), j_i)
    js = np.linalg.solve(np.eye(n) - Xb @ G0, Xb @ G0 @ j_i)
    cons = build_nonlocal_constraints(d, Xb, G0, include_imag=True)
    assert len(cons) == 2
    for c in cons:
        assert abs(evaluate(c.form, js)) <= 1e-9


def test_nonlocal_zero_block_current():
    rng = np.random.default_rng(5)
    G0, Xb, j_i = _nonlocal_pieces(rng)
    P1 = np.diag([1, 1, 0, 0]).astype(complex)
    P2 = np.eye(4) - P1
    d = NonlocalDesign((P1 @ Xb, P2 @ Xb), np.eye(4), (P1, P2), j_i)
    cons = build_nonlocal_constraints(d, Xb, G0)
    js = np.array([0.3, -0.2j, 0, 0])
    # Q_2 j_s = 0, so the second witness row vanishes
    assert evaluate(cons[1].form, js) == pytest.approx(0.0, abs=1e-15)


def test_nonlocal_zero_weight_is_zero_form(rng):
    G0, Xb, j_i = _nonlocal_pieces(rng)
    d = NonlocalDesign((Xb,), np.zeros((4, 4)), (np.eye(4),), j_i)
    (c,) = build_nonlocal_constraints(d, Xb, G0)
    assert not np.any(c.form.A) and not np.any(c.form.s) and c.form.c == 0


def test_nonlocal_requires_separable_components():
    D = np.eye(2)
    with pytest.raises(ValueError):
        NonlocalDesign((D, D), np.eye(2), (np.eye(2), np.eye(2)), np.ones(2))


def test_subset_sum_oracle():
    p = encode_subset_sum([1, 2], 3)
    r = brute_force_primal(p, "binary")
    assert r.value == pytest.approx(3.0, abs=1e-12)
    assert np.allclose(r.x, [1, 1])


def test_subset_sum_infeasible_flagged():
    with pytest.raises(ValueError, match="no feasible"):
        brute_force_primal(encode_subset_sum([2], 1), "binary")


@pytest.mark.parametrize("S, t, bits", [((1, 2), 3, (1, 0)), ((3, 1, 4), 5, (1, 1, 0)), ((3, 1, 4), 5, (0, 0, 1))])
def test_subset_indicator_is_feasible(S, t, bits):
    p = encode_subset_sum(S, t)
    x = np.array(bits, dtype=complex)
    r = residuals(p, x)
    eq = p.eq_mask
    assert np.allclose(r[eq], 0) and np.all(r[~eq] >= 0)


def test_subset_origin_violates_nonempty_row():
    p = encode_subset_sum([1, 2], 3)
    r = residuals(p, np.zeros(2))
    labels = [c.label for c in p.constraints]
    assert r[labels.index("nonempty")] == pytest.approx(-1.0)
    assert violations(p, np.zeros(2)).max() == pytest.approx(1.0)


def test_fig2a_residuals_at_hand_point(fig2a_builtin):
    r = residuals(fig2a_builtin.problem, [0, -1 / 3])
    assert np.allclose(r, [41 / 9, 8 / 9], atol=1e-14)


def test_find_kappa_subset_sum():
    p = encode_subset_sum([1, 2, 4], 5)
    first = np.concatenate([np.ones(3), np.zeros(5)])
    assert np.array_equal(find_kappa(p.constraints, first), first)
    k = find_kappa(p.constraints)
    assert psd_check(sum(kj * f.A for kj, f in zip(k, p.forms))).min_eig > 0
    assert np.array_equal(k, first)


def test_find_kappa_fig2a_selects_disk(fig2a_builtin):
    assert np.array_equal(find_kappa(fig2a_builtin.problem.constraints), [0, 1])


def test_find_kappa_indefinite_fails():
    c = SensedConstraint(QuadraticForm(np.diag([1, -1]), [0, 0], 1))
    with pytest.raises(ValueError):
        find_kappa([c])


def test_scqp_rejects_bad_kappa():
    c = SensedConstraint(QuadraticForm(np.eye(2), [0, 0], 1))
    with pytest.raises(ValueError):
        SCQP(QuadraticForm.linear([1, 0]), (c,), [-1.0])
    with pytest.raises(ValueError):
        SCQP(QuadraticForm.linear([1, 0]), (c,), [1.0, 0.0])


def test_ball_grid_primal(ball_problem):
    r = brute_force_primal(ball_problem, "grid")
    assert r.value == pytest.approx(2.0, abs=1e-6)
    assert np.allclose(r.x, [1, 0], atol=1e-3)


def test_fig2a_grid_primal(fig2a_builtin):
    r = brute_force_primal(fig2a_builtin.problem, "grid")
    assert r.value == pytest.approx(0.0, abs=1e-6)
    assert np.allclose(r.x, [-1, 0], atol=1e-4)


def test_fig2a_origin_is_not_feasible(fig2a_builtin):
    # g1(0, 0) = 4, so the origin violates the equality encoding
    assert violations(fig2a_builtin.problem, [0, 0]).max() == pytest.approx(4.0)


def test_random_scqp_feasible_point(rng):
    for _ in range(20):
        n, J = int(rng.integers(1, 5)), int(rng.integers(2, 7))
        p = random_scqp(rng, n, J, n_eq=int(rng.integers(0, J)))
        x0 = np.array([complex(*z) for z in p.header["feasible_point"]])
        assert violations(p, x0).max() <= 1e-12 * (1 + max(constraint_scale(f) for f in p.forms))
        assert psd_check(p.f_kappa().A).min_eig > 0


def test_serialization_round_trip(rng):
    p = random_scqp(rng, 3, 4, n_eq=1)
    q = loads(dumps(p))
    assert q.objective.equals(p.objective)
    assert all(a.form.equals(b.form) and a.sense == b.sense for a, b in zip(p.constraints, q.constraints))
    assert np.array_equal(q.kappa, p.kappa)


def test_expanded_pairs_equalities(fig2a_builtin):
    p = fig2a_builtin.problem
    ex = p.expanded()
    assert len(ex) == 4
    x = np.array([0.3, -0.1])
    assert evaluate(ex[0], x) == pytest.approx(-evaluate(ex[1], x))


def test_witness_set_sizes():
    W, labels = witness_set(4, "global+local")
    assert len(W) == 2 + 8 and labels[:2] == ("I", "iI")
