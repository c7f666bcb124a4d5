"""Sion function of an SCQP.

``S(x) = inf_phi L(phi, x)`` over the multiplier cone ``{phi >= 0, A_psi >= 0}``.
It is finite exactly on the Sion set, which contains the convex hull of the
feasible points, and its maximum over ``F_kappa`` equals the dual value.

The bounded variant ``S_b`` restricts the cone to ``||phi||_1 <= b``. It is an
LP in ``phi`` plus the spectrahedral constraint, which is handled by cutting
planes ``v^H A_psi(phi) v >= 0`` from eigenvectors of violated iterates.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .dual import DualResult, SolverOptions, minimize_dual
from .quadform import evaluate, evaluate_many
from .scqp import SCQP, kappa_box

NEG_INF = -np.inf
CUT_TOL = 1e-9
CUT_LIMIT = 500
PLATEAU_TOL = 1e-6


@dataclass
class SionEval:
    value: float
    phi_min: Optional[np.ndarray]
    bound_b: float
    divergence_rate: float
    n_cuts: int = 0


@dataclass
class SionSetReport:
    member: bool
    b_schedule: list
    values: list
    divergence_rate: float = 0.0


@dataclass
class SionProgramResult:
    x_tilde: np.ndarray
    value: float
    kernel_basis: np.ndarray
    dual: DualResult = field(repr=False, default=None)


class CutPool:
    """Eigenvector cuts reusable across evaluations of one problem."""

    def __init__(self, problem: SCQP):
        forms = problem.expanded()
        self.A = np.stack([f.A for f in forms])
        self.Ao = problem.objective.A
        self.rows = []
        self.rhs = []

    def add(self, v) -> None:
        v = v / np.linalg.norm(v)
        # -sum_j phi_j v^H A_j v <= v^H A_o v
        self.rows.append(-np.real(np.einsum("i,jik,k->j", v.conj(), self.A, v)))
        self.rhs.append(float(np.real(np.vdot(v, self.Ao @ v))))

    def __len__(self):
        return len(self.rows)


def _solve_lp(cost, pool: CutPool, b: float, extra=None):
    J = cost.size
    A_ub = [np.ones(J)] + pool.rows
    b_ub = [b] + pool.rhs
    if extra is not None:
        A_ub.append(extra[0])
        b_ub.append(extra[1])
    return linprog(cost, A_ub=np.array(A_ub), b_ub=np.array(b_ub), bounds=(0, None), method="highs")


def eval_sion_bounded(problem: SCQP, x, b: float, pool: Optional[CutPool] = None,
                      tol: float = CUT_TOL, cut_limit: int = CUT_LIMIT) -> SionEval:
    """``S_b(x) = f_o(x) + min { sum_j phi_j f_j(x) : phi >= 0, ||phi||_1 <= b, A_psi >= 0 }``.

    Multipliers live in the expanded space (equality rows as pairs). The
    ``divergence_rate`` is ``dS_b/db`` from the LP marginal of the norm bound; it is
    negative when ``x`` lies outside the Sion set. Degenerate optima are broken by
    a second LP that prefers lower-indexed multipliers. Returns ``+inf`` when no
    multiplier in the ball keeps ``A_psi`` PSD.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    x = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    pool = pool if pool is not None else CutPool(problem)
    forms = problem.expanded()
    fx = np.array([evaluate(f, x) for f in forms])
    fo = evaluate(problem.objective, x)
    res = None
    while True:
        res = _solve_lp(fx, pool, b)
        if res.status == 2:
            return SionEval(np.inf, None, b, 0.0, len(pool))
        if res.status != 0:
            raise RuntimeError(f"LP failed: {res.message}")
        phi = res.x
        Apsi = pool.Ao + np.tensordot(phi, pool.A, axes=1)
        w, V = np.linalg.eigh(Apsi)
        scale = max(1.0, float(np.abs(Apsi).max()))
        if w[0] >= -tol * scale or len(pool) >= cut_limit:
            break
        for k in np.flatnonzero(w < -tol * scale):
            pool.add(V[:, k])
    opt = float(res.fun)
    rate = float(res.ineqlin.marginals[0])
    # tie-break among optimal vertices
    J = fx.size
    pref = 1.0 + np.arange(J) / J
    slack = 1e-12 * (1.0 + abs(opt)) + 1e-12 * float(np.abs(fx).sum())
    tb = _solve_lp(pref, pool, b, extra=(fx, opt + slack))
    if tb.status == 0:
        Apsi = pool.Ao + np.tensordot(tb.x, pool.A, axes=1)
        if np.linalg.eigvalsh(Apsi)[0] >= -tol * max(1.0, float(np.abs(Apsi).max())):
            phi = tb.x
    return SionEval(fo + opt, phi, float(b), rate, len(pool))


def default_b_schedule(problem: SCQP, n_dirs: int = 1000, n_points: int = 1000, seed: int = 0,
                       levels: int = 11) -> list:
    """Geometric ``{1, 2, ..., 2^(levels-1)} * (u - l) / delta``.

    ``u, l`` bound ``f_o`` over sampled points of the ``F_kappa`` bounding box and
    ``delta`` estimates ``min max_x f_phi(x)`` over sampled unit multipliers in the
    cone. Warns when a sampled unit multiplier has ``c_phi <= 0`` and ``s_phi = 0``,
    the case where a finite ``b`` is not guaranteed to suffice.
    """
    rng = np.random.default_rng(seed)
    from .scqp import _real_problem_forms
    _, rforms, doubled = _real_problem_forms(problem)
    center, half = kappa_box(problem, rforms)
    pts = center + half * rng.uniform(-1.0, 1.0, size=(n_points, center.size))
    X = pts[:, : problem.n] + 1j * pts[:, problem.n:] if doubled else pts.astype(complex)
    inside = evaluate_many(problem.f_kappa(), X) >= 0
    if np.any(inside):
        X = X[inside]
    fo = evaluate_many(problem.objective, X)
    u, lo = float(fo.max()), float(fo.min())
    forms = problem.expanded()
    F = np.stack([evaluate_many(f, X) for f in forms])
    J = len(forms)
    dirs = np.vstack([np.eye(J), rng.exponential(size=(n_dirs, J))])
    dirs /= dirs.sum(axis=1, keepdims=True)
    Astack = np.stack([f.A for f in forms])
    svec = np.stack([f.s for f in forms])
    cvec = np.array([f.c for f in forms])
    deltas, finite_ok = [], True
    for d in dirs:
        A = problem.objective.A + np.tensordot(d, Astack, axes=1)
        if np.linalg.eigvalsh(A)[0] < -1e-12 * max(1.0, np.abs(A).max()):
            continue
        if float(d @ cvec) <= 0 and np.linalg.norm(d @ svec) <= 1e-12:
            finite_ok = False
        deltas.append(float((d @ F).max()))
    if not finite_ok:
        warnings.warn("some unit multiplier has c_phi <= 0 and s_phi = 0; "
                      "the b schedule may not reach the plateau", RuntimeWarning)
    pos = [dd for dd in deltas if dd > 0]
    delta = min(pos) if pos else 1.0
    scale = max(u - lo, 1e-12) / delta
    return [scale * 2.0 ** k for k in range(levels)]


def sion_membership(problem: SCQP, x, b_schedule: Optional[Sequence[float]] = None,
                    tol: float = PLATEAU_TOL, pool: Optional[CutPool] = None) -> SionSetReport:
    """Decide Sion-set membership by whether ``S_b(x)`` plateaus as ``b`` grows.

    Member iff ``|S(b_max) - S(b_max / 2)| <= tol (1 + |S(b_max)|)``; otherwise the
    slope of the last segment is reported as the divergence rate.
    """
    if b_schedule is None:
        b_schedule = default_b_schedule(problem)
    bs = [float(b) for b in b_schedule]
    if len(bs) < 3 or any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
        raise ValueError("b_schedule must be increasing with at least 3 points")
    pool = pool if pool is not None else CutPool(problem)
    vals = [eval_sion_bounded(problem, x, b, pool).value for b in bs]
    half = bs[-1] / 2.0
    if half in bs:
        v_half = vals[bs.index(half)]
    else:
        v_half = eval_sion_bounded(problem, x, half, pool).value
    v = vals[-1]
    member = bool(np.isfinite(v) and abs(v - v_half) <= tol * (1.0 + abs(v)))
    rate = 0.0 if member else (vals[-1] - vals[-2]) / (bs[-1] - bs[-2])
    return SionSetReport(member, bs, vals, float(rate))


def solve_sion_program(problem: SCQP, opts: Optional[SolverOptions] = None,
                       kernel_tol: float = 1e-7) -> SionProgramResult:
    """Maximizer of the Sion function via the dual optimum.

    Also returns an orthonormal basis of the numerical kernel of ``A_psi`` at the
    optimum; maximizers are determined only up to such directions.
    """
    res = minimize_dual(problem, opts)
    from .quadform import lagrangian
    A = lagrangian(problem.objective, problem.expanded(), res.phi_star).A
    w, V = np.linalg.eigh(A)
    K = V[:, w <= kernel_tol * max(1.0, float(np.abs(w).max()))]
    return SionProgramResult(res.x_star, res.value, K, res)
