"""Complex Hermitian quadratic forms.

A form carries ``(A, s, c)`` and evaluates as

    f(x) = 2 Re[s^H x] - x^H A x + c

with ``A`` Hermitian and ``c`` real. Every objective, constraint, composite
constraint and Lagrangian in the package is one of these.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    A: np.ndarray
    s: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        s = np.atleast_1d(np.asarray(self.s, dtype=complex))
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"bilinear part must be square, got {A.shape}")
        if s.shape != (A.shape[0],):
            raise ValueError(f"linear part has shape {s.shape}, expected ({A.shape[0]},)")
        c = float(np.real(self.c))
        # stored Hermitian by construction
        A = 0.5 * (A + A.conj().T)
        A.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @classmethod
    def zero(cls, dim: int) -> "QuadraticForm":
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0.0)

    @classmethod
    def linear(cls, s, c=0.0) -> "QuadraticForm":
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return cls(np.zeros((s.size, s.size)), s, c)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        _check_same_dim(self, other)
        return QuadraticForm(self.A + other.A, self.s + other.s, self.c + other.c)

    def __neg__(self) -> "QuadraticForm":
        return QuadraticForm(-self.A, -self.s, -self.c)

    def __sub__(self, other: "QuadraticForm") -> "QuadraticForm":
        return self + (-other)

    def scale(self, t: float) -> "QuadraticForm":
        return QuadraticForm(t * self.A, t * self.s, t * self.c)

    def with_linear(self, s) -> "QuadraticForm":
        return QuadraticForm(self.A, s, self.c)

    def is_linear(self) -> bool:
        return not np.any(self.A)

    def equals(self, other: "QuadraticForm") -> bool:
        return (np.array_equal(self.A, other.A) and np.array_equal(self.s, other.s)
                and self.c == other.c)


@dataclass(frozen=True)
class PsdReport:
    min_eig: float
    is_psd: bool
    tol: float


def _check_same_dim(*forms: QuadraticForm) -> None:
    dims = {q.dim for q in forms}
    if len(dims) > 1:
        raise ValueError(f"forms have mismatched dimensions {sorted(dims)}")


def evaluate(q: QuadraticForm, x) -> float:
    """Value of ``q`` at a single point ``x``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (q.dim,):
        raise ValueError(f"point has shape {x.shape}, form has dim {q.dim}")
    return float(2.0 * np.real(np.vdot(q.s, x)) - np.real(np.vdot(x, q.A @ x)) + q.c)


def evaluate_many(q: QuadraticForm, X) -> np.ndarray:
    """Values of ``q`` at the rows of ``X`` (shape ``(N, dim)``)."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != q.dim:
        raise ValueError(f"points have shape {X.shape}, form has dim {q.dim}")
    lin = 2.0 * np.real(X @ q.s.conj())
    quad = np.real(np.einsum("ni,ni->n", X.conj(), X @ q.A.T))
    return lin - quad + q.c


def symmetrize(M) -> np.ndarray:
    """Return ``M + M^H``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"symmetrize needs a square matrix, got shape {M.shape}")
    return M + M.conj().T


def composite(constraints: Sequence[QuadraticForm], phi) -> QuadraticForm:
    """Weighted sum ``sum_j phi_j f_j`` of constraint forms."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (len(constraints),):
        raise ValueError(f"{len(constraints)} constraints but {phi.shape} weights")
    if not constraints:
        raise ValueError("composite of an empty constraint list has no dimension")
    _check_same_dim(*constraints)
    A = np.tensordot(phi, np.stack([q.A for q in constraints]), axes=1)
    s = phi @ np.stack([q.s for q in constraints])
    c = float(phi @ np.array([q.c for q in constraints]))
    return QuadraticForm(A, s, c)


def lagrangian(objective: QuadraticForm, constraints: Sequence[QuadraticForm], phi) -> QuadraticForm:
    """Lagrangian form ``f_o + sum_j phi_j f_j``; keeps the objective's own offset."""
    if not constraints:
        return objective
    _check_same_dim(objective, *constraints)
    return objective + composite(constraints, phi)


def psd_check(M, tol: float = 1e-9) -> PsdReport:
    M = np.asarray(M, dtype=complex)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    lo = float(w[0])
    return PsdReport(lo, lo >= -tol, tol)


def stationary_point(q: QuadraticForm, rank_tol: float = DEFAULT_RANK_TOL):
    """Maximizer ``A^+ s`` of a concave form.

    Eigenvalues below ``rank_tol * max_eig`` count as zero. Returns ``(x, in_range)``;
    ``in_range`` is False when ``s`` has a kernel component larger than
    ``rank_tol * |s|``, in which case the form is unbounded above.
    """
    w, V = np.linalg.eigh(q.A)
    scale = max(float(np.max(np.abs(w))), 0.0)
    cut = rank_tol * scale
    if w[0] < -max(cut, rank_tol):
        raise ValueError(f"bilinear part is not PSD (min eigenvalue {w[0]:.3e})")
    keep = w > cut
    coef = V.conj().T @ q.s
    x = V[:, keep] @ (coef[keep] / w[keep])
    s_norm = float(np.linalg.norm(q.s))
    kernel_part = float(np.linalg.norm(coef[~keep]))
    in_range = kernel_part <= rank_tol * s_norm or kernel_part == 0.0
    return x, bool(in_range)


def realify(q: QuadraticForm) -> QuadraticForm:
    """Equivalent real form in ``(Re x, Im x)`` coordinates (dimension doubles)."""
    Ar, Ai = q.A.real, q.A.imag
    A = np.block([[Ar, -Ai], [Ai, Ar]])
    s = np.concatenate([q.s.real, q.s.imag])
    return QuadraticForm(A, s, q.c)
