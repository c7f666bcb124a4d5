import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sionqp.quadform import (QuadraticForm, composite, evaluate, evaluate_many, lagrangian, psd_check,
                             realify, stationary_point, symmetrize)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_constant_form():
    q = QuadraticForm(np.zeros((2, 2)), [0, 0], 5.0)
    assert evaluate(q, [3 - 1j, 0.5j]) == 5.0


def test_unit_circle_boundary():
    q = QuadraticForm(np.eye(2), [0, 0], 1.0)
    assert evaluate(q, [1, 0]) == 0.0


def test_g1_hand_value():
    g1 = QuadraticForm(np.diag([0.0, 4.0]), [2.0, -1.5], 4.0)
    assert evaluate(g1, [0, -1 / 3]) == pytest.approx(41 / 9, abs=1e-14)


def test_bilinear_part_stored_hermitian():
    q = QuadraticForm([[1, 2j], [0, 1]], [0, 0])
    assert np.allclose(q.A, q.A.conj().T)


def test_wrong_shapes_rejected():
    with pytest.raises(ValueError):
        QuadraticForm(np.eye(2), [1, 2, 3])
    with pytest.raises(ValueError):
        evaluate(QuadraticForm.zero(2), [1, 2, 3])


@pytest.mark.parametrize("M, want", [
    (np.eye(2), 2 * np.eye(2)),
    (1j * np.eye(2), np.zeros((2, 2))),
    ([[0, 1], [0, 0]], [[0, 1], [1, 0]]),
])
def test_symmetrize(M, want):
    assert np.allclose(symmetrize(M), want)


def test_composite_selection_and_zero():
    a = QuadraticForm(np.eye(2), [1, 0], 2.0)
    b = QuadraticForm(np.diag([1, 3]), [0, 1j], -1.0)
    assert composite([a, b], [1, 0]).equals(a)
    z = composite([a, b], [0, 0])
    assert not np.any(z.A) and not np.any(z.s) and z.c == 0


def test_composite_subset_sum_first_list():
    from sionqp.scqp import encode_subset_sum
    p = encode_subset_sum([1, 2], 3)
    q = composite(p.forms[:2], [1, 1])
    assert np.allclose(q.A, 2 * np.eye(2))
    assert np.allclose(q.s, [1, 1])
    assert q.c == 0


def test_lagrangian_zero_multipliers_is_objective():
    o = QuadraticForm.linear([1, 2j], 0.5)
    assert lagrangian(o, [QuadraticForm(np.eye(2), [0, 0], 1)], [0]).equals(o)


def test_lagrangian_ball():
    L = lagrangian(QuadraticForm.linear([1, 0]), [QuadraticForm(np.eye(2), [0, 0], 1)], [2])
    assert np.allclose(L.A, 2 * np.eye(2)) and np.allclose(L.s, [1, 0]) and L.c == 2


def test_lagrangian_fig2a_matches_pointwise(fig2a_builtin):
    p = fig2a_builtin.problem
    L = lagrangian(p.objective, p.forms, [0, 0.5])
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        want = evaluate(p.objective, x) + 0.5 * evaluate(p.forms[1], x)
        assert evaluate(L, x) == pytest.approx(want, abs=1e-12)
    assert np.allclose(L.A, 0.5 * np.eye(2))


def test_psd_check():
    r = psd_check(np.eye(3))
    assert r.min_eig == pytest.approx(1) and r.is_psd
    r = psd_check(np.diag([1, -1]), tol=1e-9)
    assert r.min_eig == pytest.approx(-1) and not r.is_psd


def test_psd_at_fig2a_dual_optimum(fig2a_builtin):
    from sionqp.dual import minimize_dual
    p = fig2a_builtin.problem
    res = minimize_dual(p)
    L = lagrangian(p.objective, p.expanded(), res.phi_star)
    assert psd_check(L.A, tol=1e-9).is_psd


def test_stationary_point_examples():
    x, ok = stationary_point(QuadraticForm(np.eye(2), [1, 0]))
    assert ok and np.allclose(x, [1, 0])
    x, ok = stationary_point(QuadraticForm(np.diag([1, 0]), [1, 0]))
    assert ok and np.allclose(x, [1, 0])
    _, ok = stationary_point(QuadraticForm(np.diag([1, 0]), [0, 1]))
    assert not ok


def test_stationary_point_rejects_indefinite():
    with pytest.raises(ValueError):
        stationary_point(QuadraticForm(np.diag([1, -1]), [0, 0]))


def _cplx(n):
    return st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite)).map(
        lambda t: t[0] + 1j * t[1])


@settings(max_examples=60, deadline=None)
@given(A=_cplx((3, 3)), s=_cplx(3), c=finite, x=_cplx(3))
def test_value_is_real_and_realify_agrees(A, s, c, x):
    q = QuadraticForm(A, s, c)
    v = evaluate(q, x)
    assert np.isfinite(v)
    r = realify(q)
    y = np.concatenate([x.real, x.imag])
    assert evaluate(r, y) == pytest.approx(v, rel=1e-9, abs=1e-9 * (1 + np.abs(A).sum() * 100))


@settings(max_examples=40, deadline=None)
@given(A=_cplx((2, 2)), s=_cplx(2), X=st.lists(_cplx(2), min_size=1, max_size=5))
def test_evaluate_many_matches_evaluate(A, s, X):
    q = QuadraticForm(A, s, 1.0)
    X = np.array(X)
    want = np.array([evaluate(q, x) for x in X])
    assert np.allclose(evaluate_many(q, X), want, rtol=1e-10, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(M=_cplx((3, 3)), s=_cplx(3))
def test_stationary_point_maximizes_concave_form(M, s):
    A = M @ M.conj().T + 0.1 * np.eye(3)
    q = QuadraticForm(A, s)
    x, ok = stationary_point(q)
    assert ok
    # the gradient s - A x vanishes at the maximizer
    assert np.linalg.norm(s - A @ x) <= 1e-8 * (1 + np.linalg.norm(s)) * np.linalg.cond(A)
