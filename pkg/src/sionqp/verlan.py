"""Contract, expand and scrape: steering an SCQP toward strong duality.

The program ``P(r, alpha)`` replaces the objective's linear part by ``r`` and the
inverse bulk potential by ``X_bulk^-1 + alpha I``. Strong duality is detected by
the dual maximizer reaching the boundary of ``F_kappa`` (``rho >= 1 - tol``).

- contract: raise ``alpha`` level by level, scraping at each level, until the
  dual maximizer reaches the boundary.
- expand: lower ``alpha`` by ``epsilon`` and re-solve.
- scrape: drift ``r`` toward the dual maximizer, ``r <- r + gamma x*`` or the
  convex mix ``r <- (1 - gamma) r + gamma x*``, until the boundary is reached or
  the scrape budget runs out (then halve ``epsilon`` and revert).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .artifacts import csv_text
from .dual import DualResult, SolverOptions, boundary_proximity, minimize_dual
from .quadform import QuadraticForm
from .scqp import SCQP, build_local_constraints


class StepKind(str, Enum):
    START = "START"
    CONTRACT = "CONTRACT"
    EXPAND = "EXPAND"
    SCRAPE = "SCRAPE"
    REVERT = "REVERT"


@dataclass
class VerlanParams:
    sigma: float = 0.5
    gamma: float = 0.5
    epsilon: Optional[float] = None
    boundary_tol: float = 1e-3
    scrape_limit: int = 25
    alpha_schedule: Optional[list] = None
    convex_mix: bool = True
    normalize_r: bool = False
    alpha_max: Optional[float] = None
    max_steps: int = 400
    levels: int = 12

    def __post_init__(self):
        if self.sigma < 0 or self.gamma < 0:
            raise ValueError("scrape rates must be nonnegative")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.boundary_tol < 1:
            raise ValueError("boundary_tol must lie in (0, 1)")
        if self.scrape_limit < 1:
            raise ValueError("scrape_limit must be at least 1")
        if self.alpha_schedule is not None:
            a = [float(v) for v in self.alpha_schedule]
            if a[-1] != 0 or any(x <= y for x, y in zip(a, a[1:])):
                raise ValueError("alpha_schedule must strictly decrease and end at 0")

    def resolved(self, problem: SCQP) -> "VerlanParams":
        """Fill ``alpha_max``, the schedule and ``epsilon`` from the problem."""
        if problem.model is None:
            amax = 0.0
        else:
            amax = self.alpha_max if self.alpha_max is not None else \
                10.0 * float(np.linalg.norm(problem.model.Xbul_inv, 2))
        sched = self.alpha_schedule
        if sched is None:
            if amax > 0:
                # geometric from alpha_max down, then 0
                sched = list(amax * 0.5 ** np.arange(self.levels)) + [0.0]
            else:
                sched = [0.0]
        eps = self.epsilon if self.epsilon is not None else (amax / 8.0 if amax > 0 else 1.0)
        return replace(self, alpha_max=amax, alpha_schedule=[float(a) for a in sched], epsilon=eps)


@dataclass
class VerlanRecord:
    step_kind: StepKind
    r: np.ndarray
    alpha: float
    x_star: np.ndarray
    dual_value: float
    rho: float
    x_norm: float
    r_drift: float = 0.0


@dataclass
class Snapshot:
    r: np.ndarray
    alpha: float
    x_star: np.ndarray
    dual_value: float
    rho: float


@dataclass
class VerlanState:
    r: np.ndarray
    alpha: float
    epsilon_cur: float
    last_strong_dual: Optional[Snapshot] = None
    history: list = field(default_factory=list)
    terminal: bool = False
    x_star: Optional[np.ndarray] = None
    dual_value: float = np.nan
    rho: float = np.nan
    steps: int = 0
    diagnostics: list = field(default_factory=list)

    @property
    def scrape_count(self) -> int:
        return sum(1 for h in self.history if h.step_kind is StepKind.SCRAPE)


@dataclass
class VerlanOutcome:
    state: VerlanState
    terminal: bool
    x_star: np.ndarray
    r_drift: float
    trajectory: list
    structure: object = None
    message: str = ""


class VerlanError(RuntimeError):
    def __init__(self, msg, best_rho=np.nan, state=None):
        super().__init__(msg)
        self.best_rho = best_rho
        self.state = state


def make_program(base: SCQP, r, alpha: float = 0.0) -> SCQP:
    """``P(r, alpha)``: objective linear part ``r``, inverse potential shifted by ``alpha I``."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    obj = base.objective.with_linear(r)
    if alpha == 0:
        return base.with_objective(obj)
    if base.model is None:
        raise ValueError("contraction needs a scattering model; pure QCQPs support only r")
    model = base.model.with_inverse_potential(base.model.Xbul_inv + alpha * np.eye(base.n))
    cons = build_local_constraints(model)
    return SCQP(obj, tuple(cons), base.kappa, base.label, base.real_variables, model, dict(base.header))


def scrape_update(r, x, rate: float, convex_mix: bool) -> np.ndarray:
    if convex_mix:
        return (1.0 - rate) * r + rate * x
    return r + rate * x


def _solve(state: VerlanState, base: SCQP, opts) -> DualResult:
    prog = make_program(base, state.r, state.alpha)
    res = minimize_dual(prog, opts)
    state.steps += 1
    state.x_star = res.x_star
    state.dual_value = res.value
    state.rho = boundary_proximity(prog, res.x_star)
    return res


def _record(state: VerlanState, kind: StepKind, s_o) -> None:
    state.history.append(VerlanRecord(kind, state.r.copy(), state.alpha, state.x_star.copy(),
                                      state.dual_value, state.rho, float(np.linalg.norm(state.x_star)),
                                      float(np.linalg.norm(state.r - s_o))))


def _strong(state: VerlanState, params: VerlanParams) -> bool:
    # a maximizer well outside F_kappa is a failed solve, not strong duality
    return abs(state.rho - 1.0) <= params.boundary_tol


def _snapshot(state: VerlanState) -> None:
    state.last_strong_dual = Snapshot(state.r.copy(), state.alpha, state.x_star.copy(),
                                      state.dual_value, state.rho)


def _revert(state: VerlanState) -> None:
    snap = state.last_strong_dual
    state.r = snap.r.copy()
    state.alpha = snap.alpha
    state.x_star = snap.x_star.copy()
    state.dual_value = snap.dual_value
    state.rho = snap.rho


def init_state(base: SCQP, params: VerlanParams) -> VerlanState:
    params = params.resolved(base)
    return VerlanState(base.objective.s.copy(), 0.0, params.epsilon)


def _normalize(r, s_o, params):
    if params.normalize_r:
        nr = np.linalg.norm(r)
        if nr > 0:
            return r * (np.linalg.norm(s_o) / nr)
    return r


def scrape(state: VerlanState, base: SCQP, params: VerlanParams, opts=None) -> str:
    """One scrape cycle from the current dual solution.

    Returns ``"boundary"`` after a sigma step taken on the boundary, ``"reached"``
    when gamma steps reached it (exit a), or ``"exhausted"`` when the scrape
    budget ran out (exit b: epsilon halved, state reverted).
    """
    params = params.resolved(base)
    s_o = base.objective.s
    if state.x_star is None:
        raise ValueError("scrape needs a dual solution in the state")
    if _strong(state, params):
        state.r = _normalize(scrape_update(state.r, state.x_star, params.sigma, params.convex_mix), s_o, params)
        _solve(state, base, opts)
        _record(state, StepKind.SCRAPE, s_o)
        if _strong(state, params):
            _snapshot(state)
        return "boundary"
    start_norm = float(np.linalg.norm(state.x_star))
    for _ in range(params.scrape_limit):
        state.r = _normalize(scrape_update(state.r, state.x_star, params.gamma, params.convex_mix), s_o, params)
        _solve(state, base, opts)
        _record(state, StepKind.SCRAPE, s_o)
        if _strong(state, params):
            _snapshot(state)
            return "reached"
        if state.steps >= params.max_steps:
            break
    if abs(np.linalg.norm(state.x_star) - start_norm) < 1e-8:
        state.diagnostics.append(f"stall at alpha={state.alpha:.6g}: x* norm unchanged over the scrape budget")
    state.epsilon_cur *= 0.5
    if state.last_strong_dual is not None:
        _revert(state)
        _record(state, StepKind.REVERT, s_o)
    return "exhausted"


def contract(state: VerlanState, base: SCQP, params: VerlanParams, opts=None) -> VerlanState:
    """Find the least contracted level whose scrapes reach the boundary.

    Levels are tried from ``alpha = 0`` upward through the schedule; each level
    starts again from the objective vector held at entry.
    """
    params = params.resolved(base)
    s_o = base.objective.s
    r0 = state.r.copy()
    levels = sorted(params.alpha_schedule)
    if base.model is None:
        levels = [0.0]
    best_rho = -np.inf
    for alpha in levels:
        state.r = r0.copy()
        state.alpha = alpha
        _solve(state, base, opts)
        _record(state, StepKind.CONTRACT, s_o)
        best_rho = max(best_rho, state.rho)
        if _strong(state, params):
            _snapshot(state)
            return state
        for _ in range(params.scrape_limit):
            state.r = _normalize(scrape_update(state.r, state.x_star, params.gamma, params.convex_mix), s_o, params)
            _solve(state, base, opts)
            _record(state, StepKind.SCRAPE, s_o)
            best_rho = max(best_rho, state.rho)
            if _strong(state, params):
                _snapshot(state)
                return state
            if state.steps >= params.max_steps:
                raise VerlanError("step budget exhausted while contracting", best_rho, state)
    raise VerlanError(f"contraction schedule exhausted without strong duality (best rho {best_rho:.6g})",
                      best_rho, state)


def expand(state: VerlanState, base: SCQP, params: VerlanParams, opts=None) -> VerlanState:
    """Lower ``alpha`` by ``epsilon_cur`` (floored at 0), re-solve, flag termination."""
    params = params.resolved(base)
    state.alpha = max(0.0, state.alpha - state.epsilon_cur)
    _solve(state, base, opts)
    _record(state, StepKind.EXPAND, base.objective.s)
    if state.alpha == 0.0 and _strong(state, params):
        state.terminal = True
    return state


def run_verlan(base: SCQP, params: Optional[VerlanParams] = None, opts: Optional[SolverOptions] = None,
               material=None) -> VerlanOutcome:
    """Contract, then alternate expand and scrape until strong duality at ``alpha = 0``.

    The outcome carries the final dual maximizer, the objective drift
    ``||r - s_o||`` and the trajectory. With a scattering model and a material
    set, a terminal run also carries the inferred structure.
    """
    params = (params or VerlanParams()).resolved(base)
    s_o = base.objective.s
    state = init_state(base, params)
    _solve(state, base, opts)
    _record(state, StepKind.START, s_o)
    message = ""
    try:
        if _strong(state, params):
            _snapshot(state)
            state.terminal = True
        else:
            contract(state, base, params, opts)
            if state.alpha == 0.0:
                state.terminal = True
        while not state.terminal:
            if state.steps >= params.max_steps:
                raise VerlanError("step budget exhausted", state.rho, state)
            if state.epsilon_cur < 1e-9 * max(params.alpha_max, 1e-300):
                raise VerlanError("expansion step underflow", state.rho, state)
            expand(state, base, params, opts)
            if state.terminal:
                break
            outcome = scrape(state, base, params, opts)
            if outcome != "exhausted" and state.alpha == 0.0 and _strong(state, params):
                state.terminal = True
    except VerlanError as err:
        message = str(err)
    structure = None
    if state.terminal and material is not None and base.model is not None:
        from .infer import infer_structure
        structure = infer_structure(state.x_star, base.model, material, base.objective)
    return VerlanOutcome(state, state.terminal, state.x_star, float(np.linalg.norm(state.r - s_o)),
                         state.history, structure, message)


def trajectory_csv(records) -> str:
    rows = [(i, h.step_kind.value, h.alpha, h.rho, h.x_norm, h.dual_value, h.r_drift)
            for i, h in enumerate(records)]
    return csv_text(["step_index", "step_kind", "alpha", "rho", "x_norm", "dual_value", "r_drift"], rows)


def state_dict(outcome: VerlanOutcome) -> dict:
    st = outcome.state

    def cv(v):
        return None if v is None else [[float(z.real), float(z.imag)] for z in np.asarray(v)]
    return {"terminal": outcome.terminal, "message": outcome.message, "x_star": cv(outcome.x_star),
            "r": cv(st.r), "alpha": st.alpha, "epsilon": st.epsilon_cur, "rho": st.rho,
            "dual_value": st.dual_value, "r_drift": outcome.r_drift, "steps": st.steps,
            "scrapes": st.scrape_count, "diagnostics": list(st.diagnostics)}
