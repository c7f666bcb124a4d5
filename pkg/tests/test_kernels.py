import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sionqp import kernels
from sionqp.kernels import backends
from sionqp.scqp import _pack, encode_subset_sum

BACKENDS = sorted(backends())


def _packed(problem, tol=1e-9):
    o = problem.objective
    return _pack(problem, tol) + (np.ascontiguousarray(np.real(o.A)), np.ascontiguousarray(np.real(o.s)),
                                  float(o.c))


def test_compiled_backend_available():
    # the extension is optional, but the build in this repository ships it
    assert "cython" in backends()
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("S, t, value, mask", [((1, 2), 3, 3.0, 0b11), ((3, 1, 4), 5, 5.0, 0b110),
                                                ((2, 3, 5, 7), 10, 10.0, 0b0111)])
def test_enumerate_subset_sum(name, S, t, value, mask):
    best, m, count = backends()[name].enumerate_binary(*_packed(encode_subset_sum(S, t)))
    assert best == pytest.approx(value, abs=1e-9)
    assert m == mask
    feasible = sum(1 for bits in itertools.product((0, 1), repeat=len(S))
                   if 0 < np.dot(bits, S) <= t)
    assert count == feasible


@pytest.mark.parametrize("name", BACKENDS)
def test_enumerate_infeasible(name):
    best, m, count = backends()[name].enumerate_binary(*_packed(encode_subset_sum([2], 1)))
    assert m == -1 and count == 0 and best == -np.inf


@settings(max_examples=30, deadline=None)
@given(S=st.lists(st.integers(1, 20), min_size=1, max_size=10), frac=st.floats(0.1, 1.0))
def test_backends_agree_on_enumeration(S, frac):
    t = max(1, int(frac * sum(S)))
    args = _packed(encode_subset_sum(S, t))
    outs = [backends()[b].enumerate_binary(*args) for b in BACKENDS]
    for o in outs[1:]:
        assert o[1] == outs[0][1] and o[2] == outs[0][2]
        assert o[0] == pytest.approx(outs[0][0], abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), m=st.integers(2, 30))
def test_backends_agree_on_grid_scan(seed, m):
    from sionqp.problems import fig2a
    rng = np.random.default_rng(seed)
    args = _packed(fig2a().problem)
    axes = np.ascontiguousarray(np.sort(rng.uniform(-1.5, 1.5, size=(2, m)), axis=1))
    outs = [backends()[b].scan_grid(*args, axes) for b in BACKENDS]
    for o in outs[1:]:
        assert np.allclose(o[0], outs[0][0], rtol=1e-12, atol=1e-12)
        assert np.allclose(o[1], outs[0][1], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_grid_scan_order_and_values(name):
    from sionqp.problems import ball
    args = _packed(ball().problem)
    axes = np.array([[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]])
    obj, viol = backends()[name].scan_grid(*args, axes)
    # last coordinate varies fastest; objective 2 x_a
    assert np.allclose(obj, np.repeat([-2.0, 0.0, 2.0], 3))
    inside = viol <= 1.0
    assert inside.tolist() == [False, True, False, True, True, True, False, True, False]


def test_environment_forces_python_backend():
    import os
    import subprocess
    import sys
    env = dict(os.environ, SIONQP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from sionqp import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
