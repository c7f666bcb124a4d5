"""Builtin problems, each shipped with an oracle that is checked when it is built.

Oracles are cheap certificates: an analytic optimum, an exhaustive binary
enumeration, or a feasible point with known objective. The expensive grid
oracle for ``fig2a`` lives in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .infer import MaterialSet, resimulate
from .quadform import QuadraticForm, evaluate
from .scqp import SCQP, SensedConstraint, brute_force_primal, encode_subset_sum, violations


class OracleMismatch(AssertionError):
    pass


@dataclass
class Builtin:
    problem: SCQP
    oracle_value: float
    oracle_x: Optional[np.ndarray]
    oracle_kind: str              # "analytic", "enumeration" or "feasible-point"
    model: object = None
    material: Optional[MaterialSet] = None
    params: dict = field(default_factory=dict)


def _check_point(problem: SCQP, x, value: float, tol: float = 1e-9) -> None:
    v = float(violations(problem, x).max(initial=0.0))
    f = evaluate(problem.objective, x)
    if v > tol or abs(f - value) > tol * (1.0 + abs(value)):
        raise OracleMismatch(f"{problem.label}: oracle point violates by {v:.3e}, objective {f} vs {value}")


def fig2a() -> Builtin:
    """The two-variable program with a gap of 1/3.

    Objective ``-x_b``; constraints ``g1 = 4 + 4 x_a - 3 x_b - 4 x_b^2`` and the unit
    disk, both as equalities. The feasible set is two points, ``(-1, 0)`` with
    objective 0 and a second one near ``(0.49, 0.87)``. The Lagrange dual value is
    1/3, attained with a singular ``A_psi``; its Sion maximizer is ``(-1/2, -1/3)``.
    """
    g1 = QuadraticForm(np.diag([0.0, 4.0]), [2.0, -1.5], 4.0)
    disk = QuadraticForm(np.eye(2), [0.0, 0.0], 1.0)
    header = {
        "senses": ["EQ", "EQ"],
        "sense_resolution": "both constraints as written (= 0); of the nine GE/LE/EQ "
                            "configurations only EQ/EQ gives primal 0 with dual gap 1/3",
        "primal_optimum": {"value": 0.0, "x": [-1.0, 0.0]},
        "dual_value": 1.0 / 3.0,
        "sion_maximizer": [-0.5, -1.0 / 3.0],
        "discrepancy": "the best feasible point is (-1, 0), not (0, 0), and the dual maximizer "
                       "is (-1/2, -1/3), not (0, -1/3); value 0, gap 1/3 and x_b = -1/3 agree",
    }
    p = SCQP(QuadraticForm.linear([0.0, -0.5]),
             (SensedConstraint(g1, "EQ", "g1"), SensedConstraint(disk, "EQ", "disk")),
             [0.0, 1.0], "fig2a", real_variables=True, header=header)
    x = np.array([-1.0, 0.0])
    _check_point(p, x, 0.0)
    return Builtin(p, 0.0, x, "analytic")


def ball() -> Builtin:
    """Maximize ``2 Re x_a`` over the unit ball: value 2 at ``(1, 0)``, strongly dual."""
    disk = QuadraticForm(np.eye(2), [0.0, 0.0], 1.0)
    p = SCQP(QuadraticForm.linear([1.0, 0.0]), (SensedConstraint(disk, "GE", "disk"),), [1.0],
             "ball", real_variables=True, header={"primal_optimum": {"value": 2.0, "x": [1.0, 0.0]}})
    x = np.array([1.0, 0.0])
    _check_point(p, x, 2.0)
    return Builtin(p, 2.0, x, "analytic")


def subset_sum(S=(1, 2), t: int = 3) -> Builtin:
    p = encode_subset_sum(S, t)
    res = brute_force_primal(p, search="binary")
    _check_point(p, res.x, res.value, tol=1e-9)
    return Builtin(p, res.value, res.x, "enumeration", params={"S": list(S), "t": int(t)})


def helmholtz1d(n: int = 32, dx: float = 1.0 / 40.0, chi_max: complex = 4.0 + 0.1j,
                source_pos: float = 0.28, witnesses: str = "global+local", binary: bool = True) -> Builtin:
    """Extracted power from a point source on a 1-D Helmholtz grid.

    The oracle is the field of the solid design (every cell at ``chi_max``), which is
    physically admissible and so must satisfy every constraint; its objective is a
    primal lower bound.
    """
    from .physics1d import Grid1D, build_design_scqp
    grid = Grid1D(n, dx)
    mat = MaterialSet(chi_max, binary)
    p, model = build_design_scqp(grid, mat, source_pos, witnesses, label=f"helmholtz1d n={n}")
    x, val = resimulate(np.full(model.n, mat.chi_max), model, p.objective)
    scale = 1.0 + float(np.abs(x).max()) ** 2
    v = float(violations(p, x).max(initial=0.0))
    if v > 1e-9 * scale:
        raise OracleMismatch(f"physical field violates the constraints by {v:.3e}")
    p.header["primal_lower_bound"] = float(val)
    return Builtin(p, float(val), x, "feasible-point", model, mat,
                   {"n": n, "dx": dx, "chi_max": [chi_max.real, chi_max.imag] if isinstance(chi_max, complex)
                    else [float(chi_max), 0.0], "source_pos": source_pos, "witnesses": witnesses,
                    "binary": binary})


REGISTRY: dict[str, Callable[..., Builtin]] = {
    "fig2a": fig2a,
    "ball": ball,
    "subset-sum": subset_sum,
    "helmholtz1d": helmholtz1d,
}


def load_builtin(name: str, **params) -> Builtin:
    try:
        make = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown builtin problem {name!r}; choose from {sorted(REGISTRY)}") from None
    return make(**params)
