import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sionqp.infer import (MaterialSet, delta_residuals, infer_potential, infer_structure, project_potential,
                          resimulate, support)
from sionqp.physics1d import Grid1D, build_design_scqp, random_designs
from sionqp.scqp import ScatteringModel, constraint_scale
from sionqp.quadform import evaluate


def _scalar(g=0.2 + 0.1j):
    return ScatteringModel([[g]], [1.0], [0.5], (np.eye(1),), ("EQ",))


@pytest.fixture(scope="module")
def testbed():
    mat = MaterialSet(4 + 0.1j)
    p, model = build_design_scqp(Grid1D(32, 1 / 40), mat, 0.4, "global+local")
    return p, model, mat


def test_vacuum_field(testbed):
    _, model, _ = testbed
    chi, sing = infer_potential(np.zeros(model.n), model)
    assert np.all(chi == 0) and not sing.any()


def test_scalar_formula():
    g, p = 0.2 + 0.1j, 0.7 - 0.3j
    chi, _ = infer_potential([p], _scalar(g))
    assert chi[0] == pytest.approx(p / (g * p + 1))


def test_inversion_of_physical_field(testbed, rng):
    _, model, mat = testbed
    chi = random_designs(rng, model.n, mat, 1)[0]
    x, _ = resimulate(chi, model)
    got, sing = infer_potential(x, model)
    S = support(x)
    assert not sing.any()
    assert np.allclose(got[S], chi[S], rtol=1e-9, atol=0)


def test_projection_identity_on_admissible():
    mat = MaterialSet(4 + 1j)
    chi = np.array([0, 0.3, 1.0]) * mat.chi_max
    assert np.allclose(project_potential(chi, mat), chi)


def test_projection_segment_endpoint():
    mat = MaterialSet(4 + 1j)
    assert project_potential([8 + 2j], mat)[0] == pytest.approx(4 + 1j)


def test_projection_binary_nearer_endpoint():
    mat = MaterialSet(4 + 0.1j, binary=True)
    assert project_potential([0.4 * mat.chi_max], mat)[0] == 0
    assert project_potential([0.6 * mat.chi_max], mat)[0] == mat.chi_max
    # exact tie goes to vacuum
    assert project_potential([0.5 * mat.chi_max], mat)[0] == 0


def test_singular_cells_project_to_bulk():
    mat = MaterialSet(2 + 0.5j)
    out = project_potential([np.inf, 1.0], mat, singular=[True, False])
    assert out[0] == mat.chi_max


def test_residuals_zero_at_implied_potential(testbed, rng):
    _, model, mat = testbed
    x = rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n)
    chi, sing = infer_potential(x, model)
    assert not sing.any()
    assert np.abs(delta_residuals(x, chi, model)).max() <= 1e-9 * (1 + np.abs(x).max() ** 2)


def test_residuals_measure_projection_jump(testbed, rng):
    _, model, mat = testbed
    x = rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n)
    st_ = infer_structure(x, model, mat)
    assert st_.residuals.shape == (len(model.witnesses),)
    assert np.abs(st_.residuals).max() > 1e-6


def test_residuals_empty_support(testbed):
    _, model, mat = testbed
    assert delta_residuals(np.zeros(model.n), np.full(model.n, mat.chi_max), model).size == 0


def test_resimulate_vacuum(testbed):
    p, model, _ = testbed
    x, val = resimulate(np.zeros(model.n), model, p.objective)
    assert np.all(x == 0) and val == p.objective.c


def test_resimulate_scalar_closed_form():
    g, u = 0.2 + 0.1j, 1.5 - 0.2j
    x, _ = resimulate(np.array([u]), _scalar(g))
    assert x[0] == pytest.approx(u / (1 - g * u))


def test_material_contains():
    mat = MaterialSet(3 + 1j)
    assert mat.contains([0, 1.5 + 0.5j, 3 + 1j]).all()
    assert not mat.contains([3.3 + 1.1j]).any()
    assert not MaterialSet(3 + 1j, binary=True).contains([1.5 + 0.5j]).any()


def test_structure_csv(testbed, rng):
    from sionqp.artifacts import read_csv
    p, model, mat = testbed
    x, _ = resimulate(random_designs(rng, model.n, mat, 1)[0], model)
    st_ = infer_structure(x, model, mat, p.objective)
    header, rows = read_csv(st_.to_csv(mat))
    assert header == ["cell_index", "chi_re", "chi_im", "t_parameter", "singular_flag"]
    assert len(rows) == model.n


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_physical_fields_satisfy_grey_constraints(seed):
    rng = np.random.default_rng(seed)
    mat = MaterialSet(4 + 0.1j)
    p, model = build_design_scqp(Grid1D(8, 1 / 40), mat, 0.1, "global+local")
    x, _ = resimulate(random_designs(rng, 8, mat, 1)[0], model)
    for c in p.constraints:
        v = evaluate(c.form, x)
        tol = 1e-9 * constraint_scale(c.form) * (1 + np.abs(x).max() ** 2)
        assert (abs(v) if c.sense.value == "EQ" else max(-v, 0.0)) <= tol
