import numpy as np
import pytest

from sionqp.dual import boundary_proximity, minimize_dual
from sionqp.infer import resimulate
from sionqp.problems import helmholtz1d
from sionqp.quadform import evaluate
from sionqp.scqp import constraint_scale
from sionqp.verlan import (StepKind, VerlanError, VerlanParams, contract, expand, init_state, make_program,
                           run_verlan, scrape, scrape_update, state_dict, trajectory_csv)
from sionqp.verlan import _solve, _snapshot


@pytest.fixture(scope="module")
def h8():
    return helmholtz1d(n=8, binary=False, witnesses="global+local")


def test_params_validation():
    with pytest.raises(ValueError):
        VerlanParams(scrape_limit=0)
    with pytest.raises(ValueError):
        VerlanParams(alpha_schedule=[1.0, 0.5])
    with pytest.raises(ValueError):
        VerlanParams(boundary_tol=1.5)
    with pytest.raises(ValueError):
        VerlanParams(sigma=-1)


def test_resolved_defaults(h8):
    p = VerlanParams().resolved(h8.problem)
    amax = 10 * np.linalg.norm(h8.problem.model.Xbul_inv, 2)
    assert p.alpha_max == pytest.approx(amax)
    assert p.epsilon == pytest.approx(amax / 8)
    assert p.alpha_schedule[0] == pytest.approx(amax) and p.alpha_schedule[-1] == 0


def test_make_program_identity(fig2a_builtin):
    base = fig2a_builtin.problem
    q = make_program(base, base.objective.s, 0.0)
    assert q.objective.equals(base.objective)
    assert all(a.form.equals(b.form) for a, b in zip(q.constraints, base.constraints))


def test_make_program_replaces_objective_only(fig2a_builtin):
    base = fig2a_builtin.problem
    q = make_program(base, np.array([0.0, -0.5]) * 3.0, 0.0)
    assert np.allclose(q.objective.s, [0, -1.5])
    assert np.array_equal(q.objective.A, base.objective.A)
    assert all(a.form.equals(b.form) for a, b in zip(q.constraints, base.constraints))


def test_contraction_needs_model(fig2a_builtin):
    with pytest.raises(ValueError):
        make_program(fig2a_builtin.problem, [0, -0.5], 1.0)


def test_contraction_shrinks_physical_field(h8):
    model = h8.problem.model
    norms = []
    for a in (0.0, 1.0, 10.0, 100.0, 1000.0):
        U = model.Xbul_inv + a * np.eye(model.n) - model.G0
        norms.append(np.linalg.norm(np.linalg.solve(U, model.e_i)))
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-2 * norms[0]


def test_contract_immediate_when_strong(ball_problem):
    params = VerlanParams()
    st = init_state(ball_problem, params)
    contract(st, ball_problem, params)
    assert st.alpha == 0.0
    assert [h.step_kind for h in st.history] == [StepKind.CONTRACT]


def test_contract_reaches_boundary_on_testbed(h8):
    params = VerlanParams()
    st = init_state(h8.problem, params)
    contract(st, h8.problem, params)
    assert abs(st.rho - 1) <= params.boundary_tol
    assert st.last_strong_dual is not None


def test_contract_pure_qcqp_exhausts(fig2a_builtin):
    params = VerlanParams(gamma=0.0, sigma=0.0, scrape_limit=3)
    st = init_state(fig2a_builtin.problem, params)
    with pytest.raises(VerlanError):
        contract(st, fig2a_builtin.problem, params)


def test_expand_terminal_at_zero(ball_problem):
    params = VerlanParams()
    st = init_state(ball_problem, params)
    _solve(st, ball_problem, None)
    expand(st, ball_problem, params)
    assert st.terminal


def test_expand_step_is_epsilon(h8):
    params = VerlanParams().resolved(h8.problem)
    st = init_state(h8.problem, params)
    st.alpha = 3.0 * params.epsilon
    expand(st, h8.problem, params)
    assert st.alpha == pytest.approx(2.0 * params.epsilon, rel=1e-15)
    assert st.history[-1].step_kind is StepKind.EXPAND


def test_failed_scrape_halves_epsilon_and_reverts(fig2a_builtin):
    base = fig2a_builtin.problem
    params = VerlanParams(gamma=0.0, scrape_limit=4)
    st = init_state(base, params)
    _solve(st, base, None)
    snap_r = np.array([0.1, -0.2])
    st.r = snap_r.copy()
    _snapshot(st)
    st.r = base.objective.s.copy()
    _solve(st, base, None)
    eps = st.epsilon_cur
    assert scrape(st, base, params) == "exhausted"
    assert st.epsilon_cur == pytest.approx(eps / 2)
    assert np.array_equal(st.r, snap_r)
    assert st.history[-1].step_kind is StepKind.REVERT


def test_zero_gamma_leaves_r_unchanged(fig2a_builtin):
    base = fig2a_builtin.problem
    params = VerlanParams(gamma=0.0, scrape_limit=5)
    st = init_state(base, params)
    _solve(st, base, None)
    scrape(st, base, params)
    scrapes = [h for h in st.history if h.step_kind is StepKind.SCRAPE]
    assert len(scrapes) == 5
    assert all(np.array_equal(h.r, base.objective.s) for h in scrapes)


def test_ball_scrape_keeps_boundary(ball_problem):
    params = VerlanParams(sigma=0.5)
    st = init_state(ball_problem, params)
    _solve(st, ball_problem, None)
    assert scrape(st, ball_problem, params) == "boundary"
    assert st.rho == pytest.approx(1.0, abs=1e-6)


def test_scrape_update_forms():
    r, x = np.array([1.0, 0.0]), np.array([0.0, 2.0])
    assert np.allclose(scrape_update(r, x, 0.5, True), [0.5, 1.0])
    assert np.allclose(scrape_update(r, x, 0.5, False), [1.0, 1.0])


def test_fig2a_fifth_modification(fig2a_builtin):
    out = run_verlan(fig2a_builtin.problem, VerlanParams(sigma=0.5, gamma=0.5, convex_mix=True))
    assert out.terminal
    assert out.state.scrape_count == 5


def test_fig2a_terminal(fig2a_builtin):
    out = run_verlan(fig2a_builtin.problem, VerlanParams())
    assert out.terminal
    assert out.state.scrape_count <= 6
    assert np.linalg.norm(out.x_star) == pytest.approx(1.0, abs=1e-3)


def test_ball_terminal_immediately(ball_problem):
    out = run_verlan(ball_problem)
    assert out.terminal and out.r_drift == 0.0
    assert len(out.trajectory) == 1


def test_testbed_terminal_with_structure(h8):
    p = h8.problem
    out = run_verlan(p, VerlanParams(), material=h8.material)
    assert out.terminal
    st_ = out.structure
    assert st_ is not None
    x, val = resimulate(st_.chi_proj, p.model, p.objective)
    for c in p.constraints:
        v = evaluate(c.form, x)
        viol = abs(v) if c.sense.value == "EQ" else max(-v, 0.0)
        assert viol <= 1e-6 * constraint_scale(c.form)
    # weak duality for the inferred design
    assert val <= minimize_dual(p).value + 1e-6


def test_trajectory_and_state_dump(fig2a_builtin):
    import json
    from sionqp.artifacts import read_csv
    out = run_verlan(fig2a_builtin.problem)
    header, rows = read_csv(trajectory_csv(out.trajectory))
    assert header == ["step_index", "step_kind", "alpha", "rho", "x_norm", "dual_value", "r_drift"]
    assert len(rows) == len(out.trajectory)
    d = json.loads(json.dumps(state_dict(out)))
    assert d["terminal"] is True and d["scrapes"] == out.state.scrape_count


def test_strong_test_rejects_outside_points(fig2a_builtin):
    # a dual maximizer far outside F_kappa is not strong duality
    base = fig2a_builtin.problem
    assert boundary_proximity(base, [3.0, 0.0]) > 1.001
