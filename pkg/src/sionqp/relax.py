"""Homogenization and the semidefinite relaxation.

With ``x~ = (x, 1)`` every form becomes ``f(x) = x~^H H x~`` where
``H = [[-A, s], [s^H, c]]``. Replacing ``x~ x~^H`` by a PSD matrix ``B`` with
``B[n, n] = 1`` gives the relaxation ``max tr(H_o B)`` subject to
``tr(H_j B) >= 0`` (or ``= 0``). Its value equals the Lagrange dual value.

:func:`solve_sdp_relaxation_tiny` is a small dense log-barrier solver used as an
independent oracle. It does not depend on the dual solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .dual import SolverOptions, minimize_dual, schur_dual_value
from .quadform import QuadraticForm, evaluate
from .scqp import SCQP, Sense, constraint_scale, residuals, violations


@dataclass
class HomogenizedProgram:
    n_plus_1: int
    H_o: np.ndarray
    H_j: list
    senses: list


@dataclass
class SdpSolution:
    value: float
    B: np.ndarray
    rank_eps: int
    extracted_x: Optional[np.ndarray]
    converged: bool = True
    gap_estimate: float = 0.0
    iterations: int = 0


@dataclass
class SchurTest:
    is_psd: bool
    method: str                     # "schur-A", "schur-D" or "direct"
    min_eig_complement: float
    agrees_with_direct: bool


@dataclass
class EquivalenceReport:
    dual_value: float
    sdp_value: float
    schur_dual_value: float
    rank: int
    extracted: Optional[np.ndarray]
    passed: bool
    gap_vs_bruteforce: Optional[float] = None
    extracted_feasible: Optional[bool] = None
    extracted_objective: Optional[float] = None
    messages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        ext = None if self.extracted is None else [[float(z.real), float(z.imag)] for z in self.extracted]
        return {"dual_value": self.dual_value, "sdp_value": self.sdp_value,
                "schur_dual_value": self.schur_dual_value, "gap_vs_bruteforce": self.gap_vs_bruteforce,
                "rank": self.rank, "extracted": ext, "passed": self.passed,
                "messages": list(self.messages)}


class SdpConvergenceError(RuntimeError):
    def __init__(self, msg, gap_estimate):
        super().__init__(f"{msg} (barrier gap estimate {gap_estimate:.3e})")
        self.gap_estimate = gap_estimate


def homogeneous_matrix(q: QuadraticForm) -> np.ndarray:
    n = q.dim
    H = np.zeros((n + 1, n + 1), dtype=complex)
    H[:n, :n] = -q.A
    H[:n, n] = q.s
    H[n, :n] = q.s.conj()
    H[n, n] = q.c
    return H


def homogenize(problem: SCQP) -> HomogenizedProgram:
    """Block matrices for the objective and every constraint row."""
    return HomogenizedProgram(problem.n + 1, homogeneous_matrix(problem.objective),
                              [homogeneous_matrix(f) for f in problem.forms], list(problem.senses))


def schur_psd_test(A, B, C, D, tol: float = 1e-10) -> SchurTest:
    """PSD test of ``[[A, B], [C, D]]`` through a Schur complement.

    Uses ``A > 0`` and ``D - C A^-1 B >= 0`` when ``A`` is invertible, otherwise
    the mirrored ``D > 0`` and ``A - B D^-1 C >= 0``. Falls back to a direct
    eigendecomposition when both diagonal blocks are singular. The result is
    always cross-checked against the direct test.
    """
    A, B, C, D = (np.atleast_2d(np.asarray(M, dtype=complex)) for M in (A, B, C, D))
    M = np.block([[A, B], [C, D]])
    scale = max(1.0, float(np.abs(M).max()))
    direct = float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0]) >= -tol * scale

    def pd(X):
        return np.linalg.eigvalsh(0.5 * (X + X.conj().T))[0] > tol * scale

    if pd(A):
        S = D - C @ np.linalg.solve(A, B)
        lo = float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0])
        res, method = lo >= -tol * scale, "schur-A"
    elif pd(D):
        S = A - B @ np.linalg.solve(D, C)
        lo = float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0])
        res, method = lo >= -tol * scale, "schur-D"
    else:
        w_a = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
        w_d = np.linalg.eigvalsh(0.5 * (D + D.conj().T))
        if w_a[0] < -tol * scale or w_d[0] < -tol * scale:
            # an indefinite diagonal block already rules out PSD
            return SchurTest(False, "schur-A" if w_a[0] < -tol * scale else "schur-D",
                             float(min(w_a[0], w_d[0])), direct is False)
        lo = float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])
        return SchurTest(direct, "direct", lo, True)
    return SchurTest(bool(res), method, lo, bool(res) == direct)


def _hermitian_basis(N: int) -> np.ndarray:
    basis = []
    for i in range(N):
        E = np.zeros((N, N), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    for i in range(N):
        for j in range(i + 1, N):
            E = np.zeros((N, N), dtype=complex)
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
            F = np.zeros((N, N), dtype=complex)
            F[i, j], F[j, i] = 1j, -1j
            basis.append(F)
    return np.array(basis)


def _inner(H, E):
    # tr(H E) for Hermitian H and each basis matrix E
    return np.real(np.einsum("ij,kji->k", H, E))


def solve_sdp_relaxation_tiny(problem: SCQP, tol: float = 1e-10, max_stages: int = 40,
                              newton_cap: int = 50, rank_tol: float = 1e-6) -> SdpSolution:
    """Dense log-barrier solver for the relaxation (``n <= 12``).

    Equalities (rows marked EQ and ``B[n, n] = 1``) are eliminated through a null
    space basis; inequality slacks enter the barrier. Phase I finds a strictly
    feasible start; the barrier weight grows tenfold per stage with at most
    ``newton_cap`` Newton steps each.
    """
    n = problem.n
    if n > 12:
        raise ValueError(f"tiny SDP oracle limited to n <= 12, got {n}")
    hp = homogenize(problem)
    N = n + 1
    E = _hermitian_basis(N)
    p = E.shape[0]
    Hn = np.zeros((N, N), dtype=complex)
    Hn[n, n] = 1.0
    eq_rows = [H for H, s in zip(hp.H_j, hp.senses) if s is Sense.EQ]
    ge_rows = [H for H, s in zip(hp.H_j, hp.senses) if s is Sense.GE]
    Meq = np.array([_inner(H, E) for H in eq_rows] + [_inner(Hn, E)])
    beq = np.zeros(len(eq_rows) + 1)
    beq[-1] = 1.0
    y0 = np.linalg.lstsq(Meq, beq, rcond=None)[0]
    Z = sla.null_space(Meq)
    B0 = np.tensordot(y0, E, axes=1)
    R = np.tensordot(Z.T, E, axes=1)
    q = R.shape[0]
    G = np.array([_inner(H, R) for H in ge_rows]).reshape(len(ge_rows), q)
    g0 = np.array([float(np.real(np.trace(H @ B0))) for H in ge_rows])
    c = _inner(hp.H_o, R)
    c0 = float(np.real(np.trace(hp.H_o @ B0)))
    m = len(ge_rows)

    def pieces(z, shift):
        # B(z) + shift I and slacks g(z) + shift
        Bz = B0 + np.tensordot(z, R, axes=1) + shift * np.eye(N)
        try:
            Lc = np.linalg.cholesky(Bz)
        except np.linalg.LinAlgError:
            return None
        g = g0 + G @ z + shift
        if m and np.any(g <= 0):
            return None
        return Lc, g

    def newton(z, shift, weight, lin, lin_s, with_s):
        """Minimize ``weight * (lin.z + lin_s*shift) - logdet - sum log g`` from z (and shift)."""
        it = 0
        for it in range(newton_cap):
            pc = pieces(z, shift)
            Lc, g = pc
            Li = sla.solve_triangular(Lc, np.eye(N), lower=True)
            C = Li @ R @ Li.conj().T
            gz = weight * lin - np.real(np.einsum("kii->k", C)) - (G.T @ (1.0 / g) if m else 0.0)
            Cf = C.reshape(q, -1)
            Hz = np.real(Cf @ Cf.conj().T) + (G.T @ (G / g[:, None] ** 2) if m else 0.0)
            if with_s:
                Binv = Li.conj().T @ Li
                gs = weight * lin_s - float(np.real(np.trace(Binv))) - (float(np.sum(1.0 / g)) if m else 0.0)
                Bi2 = Binv @ Binv
                hzs = np.real(np.einsum("kab,ba->k", R, Bi2)) + (G.T @ (1.0 / g ** 2) if m else 0.0)
                hss = float(np.real(np.trace(Bi2))) + (float(np.sum(1.0 / g ** 2)) if m else 0.0)
                grad = np.append(gz, gs)
                Hess = np.block([[Hz, hzs[:, None]], [hzs[None, :], np.array([[hss]])]])
            else:
                grad, Hess = gz, Hz
            try:
                step = -np.linalg.solve(Hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(Hess, grad, rcond=None)[0]
            dec = float(-grad @ step)
            if dec / 2.0 <= 1e-12:
                break

            def obj(zz, ss):
                pc2 = pieces(zz, ss)
                if pc2 is None:
                    return np.inf
                L2, g2 = pc2
                val = weight * (lin @ zz + (lin_s * ss if with_s else 0.0))
                val -= 2.0 * np.sum(np.log(np.real(np.diag(L2))))
                if m:
                    val -= np.sum(np.log(g2))
                return val

            f0 = obj(z, shift)
            a = 1.0
            while a > 1e-14:
                zz = z + a * step[:q]
                ss = shift + a * step[q] if with_s else shift
                if obj(zz, ss) <= f0 - 0.25 * a * dec:
                    break
                a *= 0.5
            else:
                break
            z = zz
            shift = ss
        return z, shift, it

    # phase I: drive the shift negative
    z = np.zeros(q)
    lam0 = float(np.linalg.eigvalsh(B0)[0])
    shift = max(0.0, -lam0, *(-g0 if m else [0.0])) + 1.0
    weight = 1.0
    iters = 0
    for _ in range(max_stages):
        z, shift, it = newton(z, shift, weight, np.zeros(q), 1.0, True)
        iters += it
        if shift < -1e-8:
            break
        weight *= 10.0
    else:
        raise SdpConvergenceError("phase I found no strictly feasible point", shift)
    # back off the shift: the barrier center at shift 0 starts phase II
    if pieces(z, 0.0) is None:
        raise SdpConvergenceError("phase I point lost feasibility", shift)

    nu = N + m
    t = 1.0
    conv = False
    for _ in range(max_stages):
        z, _, it = newton(z, 0.0, t, -c, 0.0, False)
        iters += it
        val = c0 + float(c @ z)
        if nu / t <= tol * (1.0 + abs(val)):
            conv = True
            break
        t *= 10.0
    Bz = B0 + np.tensordot(z, R, axes=1)
    val = c0 + float(c @ z)
    if not conv:
        raise SdpConvergenceError("barrier did not converge", nu / t)
    w = np.linalg.eigvalsh(Bz)
    rank = int(np.sum(w > rank_tol * w[-1]))
    x = extract_rank1(Bz, rank_tol)
    return SdpSolution(val, Bz, rank, x, conv, nu / t, iters)


def extract_rank1(B, tol: float = 1e-6) -> Optional[np.ndarray]:
    """Dehomogenized leading eigenvector of a numerically rank-one ``B``, else None.

    Raises when the leading eigenvector has a vanishing last entry.
    """
    B = np.asarray(B, dtype=complex)
    w, V = np.linalg.eigh(0.5 * (B + B.conj().T))
    if w[-1] <= 0:
        return None
    if w.size > 1 and w[-2] > tol * w[-1]:
        return None
    v = V[:, -1] * np.sqrt(w[-1])
    if abs(v[-1]) < tol:
        raise ValueError("leading eigenvector has a vanishing homogenizing entry")
    return v[:-1] / v[-1]


def check_equivalence(problem: SCQP, tol: float = 1e-5, opts: Optional[SolverOptions] = None,
                      primal_value: Optional[float] = None) -> EquivalenceReport:
    """Compare the Lagrange dual, the Schur-form dual and the SDP relaxation.

    When the SDP optimum is rank one, the extracted point must be feasible with
    an objective matching the common value.
    """
    dual = minimize_dual(problem, opts)
    sdp = solve_sdp_relaxation_tiny(problem)
    schur = schur_dual_value(problem, dual.phi_star)
    val = dual.value
    msgs = []
    ok = True
    lim = tol * (1.0 + abs(val))
    if abs(val - sdp.value) > lim:
        ok = False
        msgs.append(f"dual {val:.10g} vs SDP {sdp.value:.10g}")
    if abs(schur - val) > lim:
        ok = False
        msgs.append(f"Schur-form dual {schur:.10g} vs dual {val:.10g}")
    feas = obj = None
    if sdp.extracted_x is not None:
        x = sdp.extracted_x
        scales = np.array([constraint_scale(f) for f in problem.forms])
        feas = bool(np.max(violations(problem, x) / scales) <= tol)
        obj = evaluate(problem.objective, x)
        if not feas or abs(obj - sdp.value) > lim:
            ok = False
            msgs.append(f"rank-one point infeasible or objective {obj:.10g} off")
    gap = None if primal_value is None else val - primal_value
    return EquivalenceReport(val, sdp.value, schur, sdp.rank_eps, sdp.extracted_x, ok, gap, feas, obj, msgs)
