"""Scattering-constrained quadratic programs.

An SCQP maximizes a quadratic objective subject to quadratic constraints
``f_j(x) >= 0`` (or ``= 0``), where some nonnegative combination ``kappa`` of the
constraints has a positive-definite bilinear part. That combination bounds the
feasible set inside the ellipsoid ``F_kappa = {f_kappa >= 0}``.

This module builds such programs from scattering models, encodes subset-sum,
evaluates residuals and supplies brute-force primal oracles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from . import kernels
from .quadform import QuadraticForm, composite, evaluate, evaluate_many, psd_check


class Sense(str, Enum):
    GE = "GE"
    EQ = "EQ"


@dataclass(frozen=True)
class SensedConstraint:
    form: QuadraticForm
    sense: Sense = Sense.GE
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sense", Sense(self.sense))


@dataclass(frozen=True, eq=False)
class ScatteringModel:
    """Linear scattering system ``(X_bulk^-1 - G0) x = e_i`` plus a witness set.

    ``senses`` holds one of ``"GE"``, ``"LE"`` or ``"EQ"`` per witness. LE rows are
    stored as GE rows of the negated form when constraints are built.
    """
    G0: np.ndarray
    e_i: np.ndarray
    Xbul_inv: np.ndarray
    witnesses: tuple
    senses: tuple
    labels: tuple = ()
    local: bool = True

    def __post_init__(self):
        G0 = np.asarray(self.G0, dtype=complex)
        n = G0.shape[0]
        e_i = np.asarray(self.e_i, dtype=complex).reshape(n)
        Xinv = np.asarray(self.Xbul_inv, dtype=complex)
        if Xinv.ndim == 1:
            Xinv = np.diag(Xinv)
        W = tuple(np.asarray(Q, dtype=complex) for Q in self.witnesses)
        senses = tuple(str(s).upper() for s in self.senses)
        if len(senses) != len(W):
            raise ValueError(f"{len(W)} witnesses but {len(senses)} senses")
        bad = [s for s in senses if s not in ("GE", "LE", "EQ")]
        if bad:
            raise ValueError(f"unknown senses {bad}")
        labels = tuple(self.labels) or tuple(f"w{j}" for j in range(len(W)))
        for name, val in (("G0", G0), ("e_i", e_i), ("Xbul_inv", Xinv), *((f"Q{j}", Q) for j, Q in enumerate(W))):
            val.setflags(write=False)
        object.__setattr__(self, "G0", G0)
        object.__setattr__(self, "e_i", e_i)
        object.__setattr__(self, "Xbul_inv", Xinv)
        object.__setattr__(self, "witnesses", W)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "labels", labels)
        if self.local:
            self.check_locality()

    @property
    def n(self) -> int:
        return self.G0.shape[0]

    @property
    def U(self) -> np.ndarray:
        return self.Xbul_inv - self.G0

    def check_locality(self, tol: float = 1e-12) -> None:
        X = self.Xbul_inv
        if np.max(np.abs(X - np.diag(np.diag(X))), initial=0.0) > tol:
            raise ValueError("local media need a diagonal inverse bulk potential")
        if np.any(np.abs(np.diag(X)) <= tol):
            raise ValueError("inverse bulk potential has zero diagonal entries")
        for j, Q in enumerate(self.witnesses):
            off = Q - np.diag(np.diag(Q))
            if np.max(np.abs(off), initial=0.0) > tol:
                # a non-diagonal witness must still commute with every diagonal projection
                raise ValueError(f"witness {j} does not commute with diagonal projections")

    def with_inverse_potential(self, Xbul_inv) -> "ScatteringModel":
        return ScatteringModel(self.G0, self.e_i, Xbul_inv, self.witnesses, self.senses,
                               self.labels, self.local)


@dataclass(frozen=True, eq=False)
class SCQP:
    """Objective, sensed constraints and compactness certificate.

    ``kappa`` has one nonnegative weight per constraint row (not per expanded
    pair). ``real_variables`` pins imaginary parts to zero for primal oracles;
    dual and relaxation computations are unaffected by it.
    """
    objective: QuadraticForm
    constraints: tuple
    kappa: Optional[np.ndarray] = None
    label: str = ""
    real_variables: bool = False
    model: Optional[ScatteringModel] = None
    header: dict = field(default_factory=dict)

    def __post_init__(self):
        cons = tuple(self.constraints)
        if not cons:
            raise ValueError("an SCQP needs at least one constraint")
        for c in cons:
            if not isinstance(c, SensedConstraint):
                raise TypeError("constraints must be SensedConstraint instances")
            if c.form.dim != self.objective.dim:
                raise ValueError("constraint and objective dimensions differ")
        object.__setattr__(self, "constraints", cons)
        if self.kappa is not None:
            k = np.asarray(self.kappa, dtype=float)
            if k.shape != (len(cons),):
                raise ValueError(f"kappa has shape {k.shape}, expected ({len(cons)},)")
            if np.any(k < 0):
                raise ValueError("kappa must be nonnegative")
            k.setflags(write=False)
            object.__setattr__(self, "kappa", k)

    @property
    def n(self) -> int:
        return self.objective.dim

    @property
    def forms(self) -> list:
        return [c.form for c in self.constraints]

    @property
    def senses(self) -> list:
        return [c.sense for c in self.constraints]

    @property
    def eq_mask(self) -> np.ndarray:
        return np.array([c.sense is Sense.EQ for c in self.constraints])

    def expanded(self) -> list:
        """Constraint forms with every EQ row split into ``(f, -f)``, all read as ``>= 0``."""
        out = []
        for c in self.constraints:
            out.append(c.form)
            if c.sense is Sense.EQ:
                out.append(-c.form)
        return out

    def expand_weights(self, phi_rows) -> np.ndarray:
        """Map per-row multipliers (EQ entries free) to the nonnegative pair space."""
        phi_rows = np.asarray(phi_rows, dtype=float)
        out = []
        for c, p in zip(self.constraints, phi_rows):
            if c.sense is Sense.EQ:
                out.extend([max(p, 0.0), max(-p, 0.0)])
            else:
                out.append(p)
        return np.array(out)

    def collapse_weights(self, phi_pairs) -> np.ndarray:
        """Inverse of :meth:`expand_weights` (pair differences for EQ rows)."""
        phi_pairs = np.asarray(phi_pairs, dtype=float)
        out, i = [], 0
        for c in self.constraints:
            if c.sense is Sense.EQ:
                out.append(phi_pairs[i] - phi_pairs[i + 1])
                i += 2
            else:
                out.append(phi_pairs[i])
                i += 1
        return np.array(out)

    def f_kappa(self) -> QuadraticForm:
        if self.kappa is None:
            raise ValueError(f"problem {self.label!r} has no compactness certificate")
        return composite(self.forms, self.kappa)

    def with_objective(self, objective: QuadraticForm) -> "SCQP":
        return SCQP(objective, self.constraints, self.kappa, self.label, self.real_variables,
                    self.model, dict(self.header))

    def with_constraints(self, constraints, kappa=None) -> "SCQP":
        kappa = self.kappa if kappa is None else kappa
        return SCQP(self.objective, tuple(constraints), kappa, self.label, self.real_variables,
                    self.model, dict(self.header))


@dataclass(frozen=True, eq=False)
class NonlocalDesign:
    """Image-separable bulk potential ``X_bulk = sum_j D_j`` with witnesses ``Q_j``."""
    D: tuple
    P: np.ndarray
    Q: tuple
    j_i: np.ndarray

    def __post_init__(self):
        D = tuple(np.asarray(d, dtype=complex) for d in self.D)
        Q = tuple(np.asarray(q, dtype=complex) for q in self.Q)
        if len(D) != len(Q):
            raise ValueError(f"{len(D)} components but {len(Q)} witnesses")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", np.asarray(self.P, dtype=complex))
        object.__setattr__(self, "j_i", np.asarray(self.j_i, dtype=complex))
        self.check_separable()

    def check_separable(self, tol: float = 1e-10) -> None:
        # each D_j needs a left functional that sees D_j and annihilates the rest
        for j, Dj in enumerate(self.D):
            others = [Dk for k, Dk in enumerate(self.D) if k != j]
            if others:
                L = null_space(np.vstack([Dk.conj().T for Dk in others]))
            else:
                L = np.eye(Dj.shape[0], dtype=complex)
            scale = max(np.linalg.norm(Dj), 1.0)
            if L.size == 0 or np.linalg.norm(L.conj().T @ Dj) <= tol * scale:
                raise ValueError(f"component {j} is not image separable")


def _signed(form: QuadraticForm, sense: str) -> SensedConstraint:
    if sense == "LE":
        return SensedConstraint(-form, Sense.GE)
    return SensedConstraint(form, Sense(sense))


def scattering_form(Q, U, e_i, c: float = 0.0) -> QuadraticForm:
    """``Re[x^H Q e_i - x^H Q U x] + c`` as a quadratic form."""
    Q = np.asarray(Q, dtype=complex)
    QU = Q @ U
    return QuadraticForm(0.5 * (QU + QU.conj().T), 0.5 * (Q @ e_i), c)


def build_local_constraints(model: ScatteringModel) -> list:
    """One constraint per witness of the model; LE rows are negated into GE rows."""
    if model.local:
        model.check_locality()
    U = model.U
    out = []
    for Q, sense, label in zip(model.witnesses, model.senses, model.labels):
        sc = _signed(scattering_form(Q, U, model.e_i), sense)
        out.append(SensedConstraint(sc.form, sc.sense, label))
    return out


def build_nonlocal_constraints(design: NonlocalDesign, Xbul, G0, include_imag: bool = False) -> list:
    """Equality constraints in the scattered current ``j_s``.

    Each witness gives ``j_s^H Q^H P Q [(I - X G0) j_s - X G0 j_i] = 0``; the real
    part is always emitted and the imaginary part on request.
    """
    Xbul = np.asarray(Xbul, dtype=complex)
    G0 = np.asarray(G0, dtype=complex)
    if not np.allclose(sum(design.D), Xbul, atol=1e-12 * max(1.0, np.abs(Xbul).max())):
        raise ValueError("components do not sum to the bulk potential")
    n = Xbul.shape[0]
    XG = Xbul @ G0
    out = []
    for j, Q in enumerate(design.Q):
        M = Q.conj().T @ design.P @ Q
        K = M @ (np.eye(n) - XG)
        b = M @ XG @ design.j_i
        phases = [(1.0, "re")] + ([(-1j, "im")] if include_imag else [])
        for ph, tag in phases:
            Kp, bp = ph * K, ph * b
            f = QuadraticForm(0.5 * (Kp + Kp.conj().T), 0.5 * bp, 0.0)
            out.append(SensedConstraint(f, Sense.EQ, f"nonlocal{j}.{tag}"))
    return out


def encode_subset_sum(S: Sequence[int], t: int) -> SCQP:
    """Quadratic encoding of subset-sum: maximize the chosen total up to ``t``.

    Per entry ``2 Re[x_k] - 2|x_k|^2 = 0`` and ``Im x_k = 0`` force ``x_k`` binary;
    ``Re[1^H x] >= 1`` demands a nonempty subset and ``Re[z^H x] <= t`` caps the sum.
    """
    z = np.asarray(list(S), dtype=float)
    if z.size == 0:
        raise ValueError("subset-sum needs a nonempty set")
    n = z.size
    cons = []
    for k in range(n):
        d = np.zeros((n, n))
        d[k, k] = 1.0
        e = np.zeros(n)
        e[k] = 1.0
        cons.append(SensedConstraint(QuadraticForm(2 * d, e, 0.0), Sense.EQ, f"bin{k}"))
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = -1j
        # [i delta_kk]^s vanishes, leaving the linear part only
        cons.append(SensedConstraint(QuadraticForm(np.zeros((n, n)), e, 0.0), Sense.EQ, f"real{k}"))
    cons.append(SensedConstraint(QuadraticForm.linear(0.5 * np.ones(n), -1.0), Sense.GE, "nonempty"))
    cons.append(SensedConstraint(QuadraticForm.linear(-0.5 * z, float(t)), Sense.GE, "cap"))
    kappa = np.concatenate([np.ones(n), np.zeros(n + 2)])
    objective = QuadraticForm.linear(0.5 * z)
    return SCQP(objective, tuple(cons), kappa, label=f"subset-sum S={list(map(int, z))} t={t}",
                header={"S": [int(v) for v in z], "t": int(t)})


def find_kappa(constraints: Sequence[SensedConstraint], candidate=None, margin: float = 1e-9) -> np.ndarray:
    """Nonnegative row weights whose composite bilinear part is positive definite.

    Tries ``candidate``, then each one-hot row in order, then all ones over the
    rows with a bilinear part, then all ones.
    """
    forms = [c.form for c in constraints]
    J = len(forms)
    tries = []
    if candidate is not None:
        tries.append(np.asarray(candidate, dtype=float))
    tries.extend(np.eye(J))
    tries.append(np.array([0.0 if f.is_linear() else 1.0 for f in forms]))
    tries.append(np.ones(J))
    for k in tries:
        if k.shape != (J,) or np.any(k < 0) or not np.any(k):
            continue
        A = composite(forms, k).A
        lo = psd_check(A).min_eig
        if lo > margin * max(1.0, np.abs(A).max()):
            return k
    raise ValueError("no positive-definite constraint combination found; supply kappa")


def residuals(problem: SCQP, x) -> np.ndarray:
    """Value of each constraint row at ``x`` (compare against its sense)."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (problem.n,):
        raise ValueError(f"point has shape {x.shape}, problem has dim {problem.n}")
    return np.array([evaluate(c.form, x) for c in problem.constraints])


def violations(problem: SCQP, x) -> np.ndarray:
    """Nonnegative violation per row: ``max(0, -f)`` for GE, ``|f|`` for EQ."""
    r = residuals(problem, x)
    return np.where(problem.eq_mask, np.abs(r), np.maximum(-r, 0.0))


def constraint_scale(form: QuadraticForm) -> float:
    return 1.0 + float(np.abs(form.A).max() + np.abs(form.s).max() + abs(form.c))


@dataclass
class PrimalResult:
    value: float
    x: np.ndarray
    method: str
    n_feasible: int = 0
    max_violation: float = 0.0


def _pack(problem: SCQP, tol: float, real_forms: Optional[list] = None):
    forms = problem.forms if real_forms is None else real_forms
    A = np.ascontiguousarray(np.stack([np.real(f.A) for f in forms]))
    s = np.ascontiguousarray(np.stack([np.real(f.s) for f in forms]))
    c = np.array([f.c for f in forms])
    is_eq = problem.eq_mask.astype(np.uint8)
    tols = np.array([tol * constraint_scale(f) for f in problem.forms])
    return A, s, c, is_eq, tols


def _real_problem_forms(problem: SCQP):
    # real coordinates; complex problems become (Re x, Im x)
    from .quadform import realify
    if problem.real_variables:
        obj = QuadraticForm(np.real(problem.objective.A), np.real(problem.objective.s), problem.objective.c)
        return obj, [QuadraticForm(np.real(f.A), np.real(f.s), f.c) for f in problem.forms], False
    return realify(problem.objective), [realify(f) for f in problem.forms], True


def _to_complex(y, doubled):
    y = np.asarray(y, dtype=float)
    if doubled:
        m = y.size // 2
        return y[:m] + 1j * y[m:]
    return y.astype(complex)


def kappa_box(problem: SCQP, real_forms=None):
    """Center and half-widths of the bounding box of ``F_kappa`` in real coordinates."""
    if real_forms is None:
        _, forms, _ = _real_problem_forms(problem)
    else:
        forms = real_forms
    fk = composite(forms, problem.kappa)
    A = np.real(fk.A)
    center = np.linalg.solve(A, np.real(fk.s))
    fmax = float(np.real(fk.s) @ center + fk.c)
    if fmax < 0:
        raise ValueError("F_kappa is empty")
    half = np.sqrt(fmax * np.diag(np.linalg.inv(A)))
    return center, half


def _refine(obj, forms, eq, x0, box):
    cons = []
    for f, is_eq in zip(forms, eq):
        fun = (lambda y, f=f: evaluate(f, y.astype(complex)))
        cons.append({"type": "eq" if is_eq else "ineq", "fun": fun})
    res = minimize(lambda y: -evaluate(obj, y.astype(complex)), x0, method="SLSQP",
                   constraints=cons, bounds=box, options={"ftol": 1e-14, "maxiter": 500})
    return res.x


def brute_force_primal(problem: SCQP, search: str = "grid", resolution: int = 201,
                       tol: float = 1e-6, n_starts: int = 16, seed: int = 0,
                       hints: Sequence = ()) -> PrimalResult:
    """Exhaustive primal oracle.

    ``search="grid"`` scans a ``resolution^d`` tensor grid over the bounding box of
    ``F_kappa`` (``d <= 3`` real coordinates), screens points with a Lipschitz bound
    and refines the best distinct candidates with SLSQP. ``search="binary"``
    enumerates ``{0,1}^n`` exactly. ``search="local"`` runs seeded multi-start
    SLSQP for larger problems; it certifies only a lower bound on the optimum.

    Feasibility means every row violation is at most ``tol`` times the row scale.
    """
    if search == "binary":
        return _binary_primal(problem, tol)
    obj, forms, doubled = _real_problem_forms(problem)
    d = obj.dim
    center, half = kappa_box(problem, forms)
    eq = problem.eq_mask
    scales = np.array([constraint_scale(f) for f in problem.forms])
    box = list(zip(center - half, center + half))

    def feasible(y):
        v = np.array([evaluate(f, y.astype(complex)) for f in forms])
        viol = np.where(eq, np.abs(v), np.maximum(-v, 0.0)) / scales
        return float(viol.max()), v

    starts = [np.asarray(h, dtype=float) for h in hints]
    if search == "grid":
        if d > 3:
            raise ValueError(f"grid search supports at most 3 real coordinates, got {d}")
        axes = np.array([np.linspace(lo, hi, resolution) for lo, hi in box])
        h = axes[:, 1] - axes[:, 0]
        A, s, c, is_eq, _ = _pack(problem, tol, forms)
        R = float(np.linalg.norm(np.abs(center) + half))
        # gradient bound times the distance to the nearest grid point
        lip = np.array([2 * np.linalg.norm(np.real(f.s)) + 2 * np.linalg.norm(np.real(f.A), 2) * R
                        for f in forms])
        screen = lip * 0.5 * np.linalg.norm(h) * 1.01 + tol * scales
        ov, viol = kernels.scan_grid(A, np.ascontiguousarray(s), c, is_eq, screen,
                                     np.ascontiguousarray(np.real(obj.A)),
                                     np.ascontiguousarray(np.real(obj.s)), float(obj.c), axes)
        idx = np.flatnonzero(viol <= 1.0)
        if idx.size:
            order = idx[np.lexsort((idx, -ov[idx]))]
            strides = resolution ** np.arange(d - 1, -1, -1)
            chosen = []
            for p in order:
                y = axes[np.arange(d), (p // strides) % resolution]
                if all(np.max(np.abs(y - q) / h) > 3 for q in chosen):
                    chosen.append(y)
                if len(chosen) >= n_starts:
                    break
            starts.extend(chosen)
    elif search == "local":
        rng = np.random.default_rng(seed)
        starts.extend(center + half * rng.uniform(-1, 1, size=(n_starts, d)))
    else:
        raise ValueError(f"unknown search {search!r}")

    best, best_y, best_v = -np.inf, None, 0.0
    for y0 in starts:
        for y in (y0, _refine(obj, forms, eq, y0, box)):
            v, _ = feasible(y)
            if v <= tol:
                val = evaluate(obj, y.astype(complex))
                if val > best + 1e-12:
                    best, best_y, best_v = val, y, v
    if best_y is None:
        raise ValueError("no feasible candidate found at this resolution")
    return PrimalResult(float(best), _to_complex(best_y, doubled), search, len(starts), best_v)


def _binary_primal(problem: SCQP, tol: float) -> PrimalResult:
    n = problem.n
    if n > 24:
        raise ValueError(f"binary enumeration limited to n <= 24, got {n}")
    A, s, c, is_eq, tols = _pack(problem, tol)
    o = problem.objective
    best, mask, count = kernels.enumerate_binary(
        A, s, c, is_eq, tols, np.ascontiguousarray(np.real(o.A)),
        np.ascontiguousarray(np.real(o.s)), float(o.c))
    if mask < 0:
        raise ValueError("no feasible binary point")
    x = np.array([(mask >> k) & 1 for k in range(n)], dtype=complex)
    # recompute exactly; the incremental walk may carry rounding
    viol = violations(problem, x) / np.array([constraint_scale(f) for f in problem.forms])
    return PrimalResult(evaluate(o, x), x, "binary", int(count), float(viol.max()))


def random_scqp(rng: np.random.Generator, n: int, J: int, n_eq: int = 0,
                objective: str = "linear", label: str = "") -> SCQP:
    """Random feasible SCQP in the scattering template.

    ``U = V - iW`` with ``W`` positive definite; row 0 uses witness ``iI`` so its
    bilinear part is ``W`` and serves as ``kappa``. Offsets are set from a random
    point ``x0`` so that ``x0`` is feasible. ``objective`` is ``"linear"`` or
    ``"concave"`` (bilinear part PSD).
    """
    if J < 1 or n < 1:
        raise ValueError("need n >= 1 and J >= 1")
    n_eq = min(n_eq, J - 1)

    def crandn(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    M = crandn(n, n)
    W = M @ M.conj().T / n + 0.2 * np.eye(n)
    Vh = crandn(n, n)
    V = 0.5 * (Vh + Vh.conj().T)
    U = V - 1j * W
    e = crandn(n)
    x0 = 0.5 * crandn(n) / np.sqrt(n)
    senses = [Sense.GE] * (J - n_eq) + [Sense.EQ] * n_eq
    cons = []
    for j in range(J):
        Q = 1j * np.eye(n) if j == 0 else crandn(n, n) / np.sqrt(n)
        f = scattering_form(Q, U, e)
        v0 = evaluate(f, x0)
        margin = 0.0 if senses[j] is Sense.EQ else float(rng.uniform(0.0, 1.0))
        cons.append(SensedConstraint(QuadraticForm(f.A, f.s, margin - v0), senses[j], f"r{j}"))
    s_o = crandn(n)
    if objective == "linear":
        obj = QuadraticForm.linear(s_o)
    elif objective == "concave":
        B = crandn(n, n) / np.sqrt(n)
        obj = QuadraticForm(0.5 * B @ B.conj().T, s_o, 0.0)
    else:
        raise ValueError(f"unknown objective kind {objective!r}")
    kappa = np.zeros(J)
    kappa[0] = 1.0
    return SCQP(obj, tuple(cons), kappa, label or f"random n={n} J={J}",
                header={"feasible_point": [[float(z.real), float(z.imag)] for z in x0]})


# -- serialization ---------------------------------------------------------

def _cmat(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _cvec(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _read_c(a):
    a = np.asarray(a, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def form_to_dict(q: QuadraticForm) -> dict:
    return {"A": _cmat(q.A), "s": _cvec(q.s), "c": q.c}


def form_from_dict(d: dict) -> QuadraticForm:
    return QuadraticForm(_read_c(d["A"]), _read_c(d["s"]), float(d["c"]))


def to_dict(problem: SCQP) -> dict:
    return {
        "label": problem.label,
        "n": problem.n,
        "objective": form_to_dict(problem.objective),
        "constraints": [dict(form_to_dict(c.form), sense=c.sense.value, label=c.label)
                        for c in problem.constraints],
        "kappa": None if problem.kappa is None else [float(k) for k in problem.kappa],
        "real_variables": problem.real_variables,
        "header": problem.header,
    }


def from_dict(d: dict) -> SCQP:
    cons = tuple(SensedConstraint(form_from_dict(c), c.get("sense", "GE"), c.get("label", ""))
                 for c in d["constraints"])
    obj = form_from_dict(d["objective"])
    if obj.dim != int(d["n"]):
        raise ValueError("header n does not match objective dimension")
    return SCQP(obj, cons, d.get("kappa"), d.get("label", ""), bool(d.get("real_variables", False)),
                header=dict(d.get("header", {})))


def dumps(problem: SCQP) -> str:
    return json.dumps(to_dict(problem), indent=1)


def loads(text: str) -> SCQP:
    return from_dict(json.loads(text))
