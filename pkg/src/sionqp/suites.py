"""Seeded randomized property suites.

Each suite returns a :class:`SuiteResult`; the command line runs them through
``check`` and the acceptance tests call them with the stated tolerances.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dual import SolverOptions, boundary_proximity, lemma4_slack, minimize_dual
from .infer import MaterialSet, delta_residuals, infer_potential, resimulate, support
from .quadform import evaluate
from .relax import check_equivalence
from .scqp import brute_force_primal, constraint_scale, encode_subset_sum, random_scqp, violations
from .sion import PLATEAU_TOL, CutPool, default_b_schedule, eval_sion_bounded, sion_membership, solve_sion_program
from .verlan import StepKind, VerlanParams, run_verlan


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: int
    failures: list = field(default_factory=list)
    worst: float = 0.0            # worst observed statistic, suite-specific
    elapsed: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.cases} cases, worst {self.worst:.3e}, {self.elapsed:.1f}s"


def _random_instances(seed: int, count: int, n_max: int = 4, J_max: int = 6, n_eq: bool = True):
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = int(rng.integers(1, n_max + 1))
        J = int(rng.integers(2, J_max + 1))
        eq = int(rng.integers(0, J)) if n_eq else 0
        yield random_scqp(rng, n, J, n_eq=eq, label=f"random#{k}")


def scrape_monotonicity(seed: int = 0, count: int = 100, tol: float = 1e-9) -> SuiteResult:
    """``||x*||`` never drops between consecutive SCRAPE records."""
    t0 = time.perf_counter()
    fails, worst, pairs = [], 0.0, 0
    params = VerlanParams(max_steps=120)
    for p in _random_instances(seed, count):
        out = run_verlan(p, params)
        h = out.trajectory
        for k in range(1, len(h)):
            if h[k].step_kind is not StepKind.SCRAPE or h[k - 1].step_kind is not StepKind.SCRAPE:
                continue
            pairs += 1
            drop = h[k - 1].x_norm - h[k].x_norm
            worst = max(worst, drop)
            if drop > tol:
                fails.append(f"{p.label} step {k}: |x*| {h[k-1].x_norm:.12g} -> {h[k].x_norm:.12g}")
    return SuiteResult("scrape-monotonicity", not fails, pairs, fails, worst, time.perf_counter() - t0)


def _plateau_value(vals, tol: float = PLATEAU_TOL) -> float:
    """``S_b`` at the first ``b`` of the schedule where it has stopped moving."""
    for v0, v1 in zip(vals, vals[1:]):
        if np.isfinite(v1) and abs(v1 - v0) <= tol * (1.0 + abs(v1)):
            return v1
    return vals[-1]


def sion_equals_dual(seed: int = 0, count: int = 50, rel_tol: float = 1e-5) -> SuiteResult:
    """Maximum of the Sion function against ``S_b`` at its maximizer with a plateau ``b``."""
    t0 = time.perf_counter()
    fails, worst = [], 0.0
    for p in _random_instances(seed, count):
        sp = solve_sion_program(p)
        pool = CutPool(p)
        rep = sion_membership(p, sp.x_tilde, default_b_schedule(p, seed=seed), pool=pool)
        v = _plateau_value(rep.values)
        err = abs(sp.value - v) / (1.0 + abs(sp.value))
        worst = max(worst, err)
        if not err <= rel_tol:
            fails.append(f"{p.label}: Sion program {sp.value:.12g}, S_b {v:.12g} (member {rep.member})")
    return SuiteResult("sion-equals-dual", not fails, count, fails, worst, time.perf_counter() - t0)


def _feasible_indicators(S, t):
    p = encode_subset_sum(S, t)
    pts = []
    for bits in itertools.product((0.0, 1.0), repeat=len(S)):
        x = np.array(bits, dtype=complex)
        if violations(p, x).max() <= 1e-12:
            pts.append(x)
    return p, np.array(pts)


SUBSET_SUM_CORPUS = (((1, 2), 3), ((3, 1, 4), 5), ((2, 3, 5, 7), 10), ((1, 2, 3, 4, 5, 6), 9),
                     ((5, 9, 2, 7, 4, 1, 8, 3), 15))


def hull_in_sion_set(seed: int = 0, count: int = 100, tol: float = 1e-6) -> SuiteResult:
    """Convex combinations of feasible subset-sum indicators are Sion members with ``S = f_o``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails, worst = [], 0.0
    insts = [_feasible_indicators(S, t) for S, t in SUBSET_SUM_CORPUS]
    per = [count // len(insts) + (1 if k < count % len(insts) else 0) for k in range(len(insts))]
    for (p, pts), m in zip(insts, per):
        sched = default_b_schedule(p, seed=seed)
        pool = CutPool(p)
        for _ in range(m):
            k = int(rng.integers(1, min(len(pts), 4) + 1))
            idx = rng.choice(len(pts), size=k, replace=False)
            w = rng.dirichlet(np.ones(k))
            x = w @ pts[idx]
            rep = sion_membership(p, x, sched, pool=pool)
            fo = evaluate(p.objective, x)
            err = abs(rep.values[-1] - fo) if np.isfinite(rep.values[-1]) else np.inf
            worst = max(worst, err)
            if not rep.member or not err <= tol * (1.0 + abs(fo)):
                fails.append(f"{p.label} x={np.round(x.real, 4)}: member {rep.member}, S {rep.values[-1]:.10g}, f_o {fo:.10g}")
    return SuiteResult("hull-in-sion-set", not fails, count, fails, worst, time.perf_counter() - t0)


def lemma4_bound(seed: int = 0, count: int = 50, tol: float = 1e-7) -> SuiteResult:
    """``|n/m| s >= r`` at every dual optimum; ``tol`` is relative to the row scales."""
    t0 = time.perf_counter()
    fails, worst = [], 0.0
    for p in _random_instances(seed, count):
        res = minimize_dual(p)
        sl = lemma4_slack(p, res.x_star)
        scale = 1.0 + max(constraint_scale(f) for f in p.expanded()) * (1.0 + np.linalg.norm(res.x_star)) ** 2
        low = float(sl.min()) / scale
        worst = max(worst, -low)
        if low < -tol:
            fails.append(f"{p.label}: slack {sl.min():.3e}")
    return SuiteResult("lemma4-bound", not fails, count, fails, worst, time.perf_counter() - t0)


def sdp_equivalence(seed: int = 0, count: int = 20, tol: float = 1e-5) -> SuiteResult:
    from .problems import ball, fig2a, subset_sum
    t0 = time.perf_counter()
    fails, worst = [], 0.0
    probs = list(_random_instances(seed, count)) + [ball().problem, fig2a().problem, subset_sum((1, 2), 3).problem]
    for p in probs:
        rep = check_equivalence(p, tol=tol)
        worst = max(worst, abs(rep.dual_value - rep.sdp_value) / (1.0 + abs(rep.dual_value)))
        if not rep.passed:
            fails.append(f"{p.label}: " + "; ".join(rep.messages))
    return SuiteResult("sdp-equivalence", not fails, len(probs), fails, worst, time.perf_counter() - t0)


def inference_roundtrip(seed: int = 0, count: int = 50, rel_tol: float = 1e-8,
                        res_tol: float = 1e-9) -> SuiteResult:
    """Resimulate random admissible designs, then infer them back from the field."""
    from .physics1d import Grid1D, build_design_scqp, random_designs
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    grid = Grid1D(32, 1.0 / 40.0)
    mat = MaterialSet(4.0 + 0.1j)
    _, model = build_design_scqp(grid, mat, 0.4, "global+local")
    fails, worst = [], 0.0
    designs = random_designs(rng, model.n, mat, count)
    for k, chi in enumerate(designs):
        x, _ = resimulate(chi, model)
        chi_rec, sing = infer_potential(x, model)
        S = support(x)
        err = float(np.max(np.abs(chi_rec[S] - chi[S]) / np.abs(chi[S]))) if np.any(S) else 0.0
        res = delta_residuals(x, chi_rec, model)
        rmax = float(np.abs(res).max(initial=0.0))
        worst = max(worst, err)
        if err > rel_tol or rmax > res_tol or np.any(sing):
            fails.append(f"design {k}: recovery {err:.3e}, residual {rmax:.3e}, singular {int(sing.sum())}")
    return SuiteResult("inference-roundtrip", not fails, count, fails, worst, time.perf_counter() - t0)


def weak_duality(seed: int = 0, count: int = 30, tol: float = 1e-6) -> SuiteResult:
    """Dual value against exact or lower-bound primal values over the whole corpus."""
    from .physics1d import random_designs
    from .problems import ball, fig2a, helmholtz1d, subset_sum
    t0 = time.perf_counter()
    fails, worst, cases = [], -np.inf, 0

    def record(label, dual, primal):
        nonlocal worst, cases
        cases += 1
        worst = max(worst, primal - dual)
        if dual < primal - tol:
            fails.append(f"{label}: dual {dual:.12g} < primal {primal:.12g}")

    for b in (fig2a(), ball()):
        pr = brute_force_primal(b.problem, "grid")
        record(b.problem.label, minimize_dual(b.problem).value, pr.value)
    for S, t in SUBSET_SUM_CORPUS:
        b = subset_sum(S, t)
        record(b.problem.label, minimize_dual(b.problem).value, b.oracle_value)
    rng = np.random.default_rng(seed)
    for k, p in enumerate(_random_instances(seed, count)):
        search = "grid" if p.n == 1 else "local"
        x0 = np.array([complex(*z) for z in p.header["feasible_point"]])
        pr = brute_force_primal(p, search, resolution=201, hints=[np.concatenate([x0.real, x0.imag])])
        record(p.label, minimize_dual(p).value, pr.value)
    for binary in (False, True):
        b = helmholtz1d(binary=binary)
        D = minimize_dual(b.problem).value
        best = b.oracle_value
        for chi in random_designs(rng, b.model.n, b.material, 50):
            best = max(best, resimulate(chi, b.model, b.problem.objective)[1])
        record(b.problem.label + (" binary" if binary else " grey"), D, best)
    return SuiteResult("weak-duality", not fails, cases, fails, float(worst), time.perf_counter() - t0)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "monotone": scrape_monotonicity,
    "lemma0": sion_equals_dual,
    "lemma1": hull_in_sion_set,
    "lemma4": lemma4_bound,
    "sdp": sdp_equivalence,
    "inference": inference_roundtrip,
    "weak": weak_duality,
}
