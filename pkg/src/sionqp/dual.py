"""Lagrange dual of an SCQP.

For multipliers ``phi`` the Lagrangian ``L(phi, x) = f_o(x) + sum_j phi_j f_j(x)`` has
bilinear part ``A_psi``. On the cone ``A_psi >= 0`` its maximum over ``x`` is

    D(phi) = s_psi^H A_psi^+ s_psi + c_psi

attained at ``x* = A_psi^+ s_psi``. ``D`` is convex, ``dD/dphi_j = f_j(x*)``, and
its minimum upper-bounds the primal optimum.

Multipliers are reported in the expanded space where every equality row is a
pair ``(f, -f)`` with nonnegative weights. Internally the barrier solver works on
one signed multiplier per equality row, which avoids the unbounded direction
that a pair ``(t, t)`` would open.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .quadform import QuadraticForm, composite, evaluate, lagrangian, psd_check, stationary_point
from .scqp import SCQP, Sense


_EPS = np.finfo(float).eps


_CENTERED = 1e-6  # Newton decrement / 2 mu below which a stage counts as centered


class ConeError(ValueError):
    """Multipliers outside the cone ``{phi >= 0, A_psi >= 0}``."""


@dataclass
class DualEval:
    value: float
    x_star: np.ndarray
    grad: np.ndarray
    min_eig_Apsi: float
    in_range: bool


@dataclass
class DualResult:
    phi_star: np.ndarray
    eval: DualEval
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    phi_rows: Optional[np.ndarray] = None
    method: str = "barrier"

    @property
    def value(self) -> float:
        return self.eval.value

    @property
    def x_star(self) -> np.ndarray:
        return self.eval.x_star


@dataclass
class SolverOptions:
    """Dual solver settings.

    ``grad_tol`` and ``psd_margin`` are relative: the stopping test is
    ``grad_tol * (1 + |D|)`` and the PSD floor ``psd_margin * ||A_psi||``.
    ``gap_tol`` ends the barrier path once ``nu * mu <= gap_tol * (1 + |D|)``.
    """
    grad_tol: float = 1e-8
    psd_margin: float = 1e-10
    max_iters: int = 10_000
    step_init: float = 1.0
    backtrack_ratio: float = 0.5
    method: str = "barrier"
    gap_tol: float = 1e-12
    mu_factor: float = 0.1
    center_steps: int = 50
    record_history: bool = True

    def __post_init__(self):
        for name in ("grad_tol", "psd_margin", "max_iters", "step_init", "gap_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack_ratio < 1:
            raise ValueError("backtrack_ratio must lie in (0, 1)")
        if not 0 < self.mu_factor < 1:
            raise ValueError("mu_factor must lie in (0, 1)")
        if self.method not in ("barrier", "gradient"):
            raise ValueError(f"unknown method {self.method!r}")


# -- evaluation ------------------------------------------------------------

def _resolve_phi(problem: SCQP, phi):
    """Return ``(forms, phi, expanded)`` for a multiplier vector in either space."""
    phi = np.asarray(phi, dtype=float).ravel()
    exp_forms = problem.expanded()
    if phi.shape == (len(exp_forms),):
        if np.any(phi < 0):
            raise ConeError("multipliers must be nonnegative")
        return exp_forms, phi, True
    if phi.shape == (len(problem.constraints),):
        ge = ~problem.eq_mask
        if np.any(phi[ge] < 0):
            raise ConeError("inequality multipliers must be nonnegative")
        return problem.forms, phi, False
    raise ValueError(f"multiplier vector has length {phi.size}; expected "
                     f"{len(exp_forms)} (expanded) or {len(problem.constraints)} (per row)")


def eval_dual(problem: SCQP, phi, psd_margin: float = 1e-10, rank_tol: float = 1e-10) -> DualEval:
    """Dual function, inner maximizer and gradient at ``phi``.

    ``phi`` may be given per expanded pair (nonnegative) or per row (equality
    entries signed). The gradient is returned in the same space. When ``s_psi``
    has a component in the kernel of ``A_psi`` the value is ``+inf``.
    """
    forms, phi, expanded = _resolve_phi(problem, phi)
    L = lagrangian(problem.objective, forms, phi)
    A = L.A
    rep = psd_check(A, tol=psd_margin * max(1.0, np.linalg.norm(A, 2)))
    if not rep.is_psd:
        raise ConeError(f"A_psi is indefinite (min eigenvalue {rep.min_eig:.3e})")
    x, in_range = stationary_point(L, rank_tol=rank_tol)
    grad = np.array([evaluate(f, x) for f in forms])
    value = evaluate(L, x) if in_range else np.inf
    return DualEval(float(value), x, grad, rep.min_eig, in_range)


def dual_value(problem: SCQP, phi) -> float:
    return eval_dual(problem, phi).value


def schur_dual_value(problem: SCQP, phi, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Smallest ``alpha`` with ``[[-A_psi, s_psi], [s_psi^H, c_psi - alpha]] <= 0``, by bisection."""
    forms, phi, _ = _resolve_phi(problem, phi)
    L = lagrangian(problem.objective, forms, phi)
    n = L.dim
    rep = psd_check(L.A, tol=1e-10 * max(1.0, np.linalg.norm(L.A, 2)))
    if not rep.is_psd:
        raise ConeError(f"A_psi is indefinite (min eigenvalue {rep.min_eig:.3e})")

    def ok(alpha):
        M = np.zeros((n + 1, n + 1), dtype=complex)
        M[:n, :n] = L.A
        M[:n, n] = -L.s
        M[n, :n] = -L.s.conj()
        M[n, n] = alpha - L.c
        return np.linalg.eigvalsh(M)[0] >= -1e-15 * max(1.0, np.abs(M).max())

    if not np.any(L.s):
        return L.c
    lo, width = L.c, 1.0
    while not ok(lo + width):
        width *= 2.0
        if width > 1e300:
            return np.inf
    hi = lo + width
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * (1.0 + abs(hi)):
            break
    return hi


def boundary_proximity(problem: SCQP, x) -> float:
    """``rho = 1 - f_kappa(x) / max f_kappa``.

    ``rho = 0`` at the center of ``F_kappa`` and 1 on its boundary. Points outside
    ``F_kappa`` give ``rho > 1``; the lower end is clamped at 0.
    """
    fk = problem.f_kappa()
    xc, _ = stationary_point(fk)
    top = evaluate(fk, xc)
    if top <= 0:
        raise ValueError("F_kappa has empty interior")
    return max(0.0, 1.0 - evaluate(fk, np.asarray(x, dtype=complex)) / top)


def lemma4_slack(problem: SCQP, x, gamma: Optional[int] = None) -> np.ndarray:
    """Slack of ``|n/m| f_gamma(x) >= -min(0, f_j(x))`` for every expanded row.

    ``n`` is the most negative eigenvalue of row ``j``'s bilinear part (0 when it
    is PSD) and ``m`` the smallest eigenvalue of the positive-definite row
    ``gamma`` (the first such row by default). A Sion maximizer makes every entry
    nonnegative.
    """
    x = np.asarray(x, dtype=complex)
    rows = problem.expanded()
    if gamma is None:
        for j, f in enumerate(problem.forms):
            if np.linalg.eigvalsh(f.A)[0] > 0:
                gamma = j
                break
        else:
            raise ValueError("no positive-definite constraint row")
    fg = problem.forms[gamma]
    m = float(np.linalg.eigvalsh(fg.A)[0])
    if m <= 0:
        raise ValueError(f"row {gamma} is not positive definite")
    sg = evaluate(fg, x)
    out = []
    for f in rows:
        n = min(0.0, float(np.linalg.eigvalsh(f.A)[0]))
        out.append(abs(n / m) * sg + min(0.0, evaluate(f, x)))
    return np.array(out)


# -- minimization ----------------------------------------------------------

class _Stack:
    """Row forms stacked for fast assembly in the per-row multiplier space."""

    def __init__(self, problem: SCQP):
        self.problem = problem
        self.obj = problem.objective
        self.A = np.stack([f.A for f in problem.forms])
        self.s = np.stack([f.s for f in problem.forms])
        self.c = np.array([f.c for f in problem.forms])
        self.ge = ~problem.eq_mask
        self.n = problem.n
        self.J = len(problem.forms)

    def assemble(self, y):
        A = self.obj.A + np.tensordot(y, self.A, axes=1)
        s = self.obj.s + y @ self.s
        c = self.obj.c + float(y @ self.c)
        return A, s, c


def _chol(A):
    try:
        return sla.cho_factor(A, lower=True, check_finite=False)
    except (np.linalg.LinAlgError, sla.LinAlgError):
        return None


def _start(stack: _Stack, kappa, margin):
    """Strictly interior start ``t (kappa + delta 1_GE)`` with ``t`` scanned upward."""
    k = np.asarray(kappa, dtype=float)
    kmax = max(float(k.max()), 1e-300)
    for delta in (1e-2, 1e-4, 1e-6, 0.0):
        d = k + delta * kmax * stack.ge
        t = 1e-3
        while t < 1e12:
            y = t * d
            A, _, _ = stack.assemble(y)
            lo = np.linalg.eigvalsh(A)[0]
            if lo > margin * max(1.0, np.abs(A).max()) and np.all(y[stack.ge] > 0):
                return y
            t *= 2.0
    raise ValueError("no strictly interior starting point along kappa")


def _settled(xs):
    """Pick the path iterate where consecutive stages agree best.

    Along the central path ``x(mu)`` converges linearly in ``mu``; once ``A_psi``
    becomes numerically singular, roundoff in its kernel component grows like
    ``eps / lambda_min``. The smallest stage-to-stage change marks the crossover.
    """
    if len(xs) < 3:
        return xs[-1]
    diffs = [np.linalg.norm(xs[k] - xs[k - 1]) / (1.0 + np.linalg.norm(xs[k])) for k in range(1, len(xs))]
    k = int(np.argmin(diffs)) + 1
    # ties at roundoff level prefer the later (more converged) stage
    floor = diffs[k - 1]
    for j in range(len(diffs) - 1, k - 1, -1):
        if diffs[j] <= max(floor, 1e-15) * 4.0:
            k = j + 1
            break
    return xs[k]


def _barrier(problem: SCQP, opts: SolverOptions) -> DualResult:
    if problem.kappa is None:
        raise ValueError("dual minimization needs a compactness certificate kappa")
    st = _Stack(problem)
    n, J, ge = st.n, st.J, st.ge
    y = _start(st, problem.kappa, opts.psd_margin)
    trAk = float(np.real(np.trace(np.tensordot(problem.kappa, st.A, axes=1))))
    reg = np.real(np.einsum("jii->j", st.A)) / trAk + ge / max(1.0, float(y.max()))
    nu = n + int(ge.sum())

    def parts(y, mu, need_hess=True):
        A, s, c = st.assemble(y)
        cf = _chol(A)
        if cf is None or np.any(y[ge] <= 0):
            return None
        x = sla.cho_solve(cf, s, check_finite=False)
        D = float(np.real(np.vdot(s, x))) + c
        logdet = 2.0 * float(np.sum(np.log(np.real(np.diag(cf[0])))))
        F = D + mu * (-logdet - np.sum(np.log(y[ge])) + reg @ y)
        if not need_hess:
            return F, D, x
        Ax = st.A @ x
        fvals = 2.0 * np.real(st.s.conj() @ x) - np.real(np.einsum("i,ji->j", x.conj(), Ax)) + st.c
        Wt = (st.s - Ax).T                       # columns w_j = s_j - A_j x
        Z = sla.cho_solve(cf, Wt, check_finite=False)
        H = 2.0 * np.real(Wt.conj().T @ Z)
        Linv = sla.solve_triangular(cf[0], np.eye(n), lower=True, check_finite=False)
        B = Linv @ st.A @ Linv.conj().T          # whitened A_j
        trB = np.real(np.einsum("jii->j", B))
        Bf = B.reshape(J, -1)
        H += mu * np.real(Bf @ Bf.conj().T)      # tr(B_j B_k) for Hermitian B
        g = fvals + mu * (-trB + reg)
        g[ge] -= mu / y[ge]
        H[ge, ge] += mu / y[ge] ** 2
        return F, D, x, g, H

    # initial barrier weight from the dual scale at the start
    p0 = parts(y, 1.0, need_hess=False)
    mu = max(1e-3, abs(p0[1])) / nu
    history, xs, lams, it, converged = [], [], [], 0, False
    while it < opts.max_iters:
        for _ in range(opts.center_steps):
            F, D, x, g, H = parts(y, mu)
            try:
                dy = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                dy = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = float(-g @ dy)
            if dec / (2.0 * mu) <= 1e-12:
                break
            if dec <= 64 * _EPS * (1.0 + abs(F)):
                # F is flat to roundoff; the gradient still is not, so finish with
                # one full Newton step when it stays interior
                if parts(y + dy, mu, need_hess=False) is not None:
                    y = y + dy
                    it += 1
                break
            alpha = 1.0
            neg = dy[ge] < 0
            if np.any(neg):
                alpha = min(1.0, 0.99 * float(np.min(-y[ge][neg] / dy[ge][neg])))
            while alpha > 1e-14:
                trial = parts(y + alpha * dy, mu, need_hess=False)
                if trial is not None and trial[0] <= F - 0.25 * alpha * dec:
                    break
                alpha *= opts.backtrack_ratio
            else:
                break
            y = y + alpha * dy
            it += 1
            if alpha * dec <= 64 * _EPS * (1.0 + abs(F)):
                break
        F, D, x, g, H = parts(y, mu)
        # H may be singular along multiplier directions that leave A_psi fixed
        z = np.linalg.lstsq(H, g, rcond=None)[0]
        consistent = np.linalg.norm(H @ z - g) <= 1e-8 * (1.0 + np.linalg.norm(g))
        lam = float(g @ z) / (2.0 * mu) if consistent else np.inf
        xs.append(x)
        lams.append(lam)
        if opts.record_history:
            history.append((problem.expand_weights(y), D))
        if nu * mu <= opts.gap_tol * (1.0 + abs(D)):
            converged = True
            break
        mu *= opts.mu_factor
    # stages after the first failed centering carry roundoff, not path information
    ok = next((k for k, lam in enumerate(lams) if lam > _CENTERED), len(xs))
    x = _settled(xs[:max(ok, 1)])
    phi = problem.expand_weights(y)
    L = lagrangian(problem.objective, problem.expanded(), phi)
    rows = np.array([evaluate(f, x) for f in problem.expanded()])
    # D at the final multipliers is accurate even when x had to come from an earlier stage
    ev = DualEval(D, x, rows, float(np.linalg.eigvalsh(L.A)[0]), True)
    return DualResult(phi, ev, it, converged, history, y, "barrier")


def _projected_gradient(problem: SCQP, opts: SolverOptions) -> DualResult:
    if problem.kappa is None:
        raise ValueError("dual minimization needs a compactness certificate kappa")
    forms = problem.expanded()
    kap = problem.expand_weights(problem.kappa)

    def try_eval(phi):
        try:
            ev = eval_dual(problem, phi, psd_margin=0.0)
        except ConeError:
            return None
        A = lagrangian(problem.objective, forms, phi).A
        if ev.min_eig_Apsi < opts.psd_margin * max(1.0, np.linalg.norm(A, 2)) or not ev.in_range:
            return None
        return ev

    t = 1e-3
    while True:
        phi = t * kap
        ev = try_eval(phi)
        if ev is not None:
            break
        t *= 2.0
        if t > 1e12:
            raise ValueError("no strictly interior starting point along kappa")
    step = opts.step_init
    history = [(phi.copy(), ev.value)]
    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        pg = phi - np.maximum(0.0, phi - ev.grad)
        if np.linalg.norm(pg) < opts.grad_tol * (1.0 + abs(ev.value)):
            converged = True
            break
        accepted = False
        a = step
        while a > 1e-16:
            trial = np.maximum(0.0, phi - a * ev.grad)
            new = try_eval(trial)
            if new is None:
                # restore definiteness by moving along kappa
                beta = a * 1e-3
                for _ in range(40):
                    restored = trial + beta * kap
                    new = try_eval(restored)
                    if new is not None:
                        trial = restored
                        break
                    beta *= 2.0
            if new is not None:
                drop = ev.value - new.value
                if drop > 1e-4 * float(ev.grad @ (phi - trial)) and drop > 0:
                    accepted = True
                    break
                # below roundoff in D: accept only steps that shrink the projected gradient
                if abs(drop) <= 8 * np.finfo(float).eps * (1.0 + abs(ev.value)):
                    pg_new = trial - np.maximum(0.0, trial - new.grad)
                    if np.linalg.norm(pg_new) < np.linalg.norm(pg):
                        accepted = True
                        break
            a *= opts.backtrack_ratio
        if not accepted:
            break
        phi, ev = trial, new
        step = min(a * 2.0, 1e6)
        if opts.record_history:
            history.append((phi.copy(), ev.value))
    return DualResult(phi, ev, it, converged, history, problem.collapse_weights(phi), "gradient")


def minimize_dual(problem: SCQP, opts: Optional[SolverOptions] = None) -> DualResult:
    """Minimize ``D`` over the multiplier cone.

    The default method follows the log-barrier central path for
    ``D(phi) - mu [log det A_psi + sum log phi_GE]`` with Newton centering and
    ``mu <- mu / 10``. Its maximizer ``x*`` converges to the maximizer of the Sion
    function even when ``A_psi`` is singular at the optimum. ``method="gradient"``
    runs projected gradient descent with backtracking and restoration along
    ``kappa``; it is slower and stalls when the optimum sits on the PSD boundary.
    """
    opts = opts or SolverOptions()
    if opts.method == "gradient":
        return _projected_gradient(problem, opts)
    return _barrier(problem, opts)
