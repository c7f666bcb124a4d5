"""Structure inference from polarization fields.

Any field ``x`` defines a diagonal potential ``chi_k = x_k / ((G0 x)_k + e_i_k)``
that reproduces it exactly. Projecting that potential onto the admissible
materials gives a design, which is then re-simulated to get its true objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .artifacts import csv_text
from .quadform import QuadraticForm, evaluate
from .scqp import ScatteringModel


@dataclass(frozen=True)
class MaterialSet:
    """Admissible susceptibilities: the segment ``t chi_max`` or the pair ``{0, chi_max}``."""
    chi_max: complex
    binary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "chi_max", complex(self.chi_max))
        if self.chi_max == 0:
            raise ValueError("chi_max must be nonzero")

    def contains(self, chi, tol: float = 1e-12) -> np.ndarray:
        chi = np.asarray(chi, dtype=complex)
        t = np.real(chi * np.conj(self.chi_max)) / abs(self.chi_max) ** 2
        on_line = np.abs(chi - t * self.chi_max) <= tol * abs(self.chi_max)
        if self.binary:
            return on_line & ((np.abs(t) <= tol) | (np.abs(t - 1) <= tol))
        return on_line & (t >= -tol) & (t <= 1 + tol)


@dataclass
class InferredStructure:
    chi_raw: np.ndarray
    chi_proj: np.ndarray
    residuals: np.ndarray
    objective_resim: float
    singular: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    x_resim: Optional[np.ndarray] = None

    def t_parameter(self, mat: MaterialSet) -> np.ndarray:
        return np.real(self.chi_proj * np.conj(mat.chi_max)) / abs(mat.chi_max) ** 2

    def to_csv(self, mat: MaterialSet) -> str:
        t = self.t_parameter(mat)
        sing = self.singular if self.singular.size else np.zeros(self.chi_proj.size, dtype=bool)
        rows = [(k, z.real, z.imag, tk, bool(sk)) for k, (z, tk, sk) in enumerate(zip(self.chi_proj, t, sing))]
        return csv_text(["cell_index", "chi_re", "chi_im", "t_parameter", "singular_flag"], rows)

    def to_dict(self) -> dict:
        def cv(v):
            return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]
        return {"chi_raw": cv(np.where(np.isfinite(self.chi_raw), self.chi_raw, 0)),
                "chi_proj": cv(self.chi_proj), "residuals": [float(r) for r in self.residuals],
                "objective_resim": self.objective_resim,
                "singular": [int(s) for s in self.singular]}


class SingularSystemError(RuntimeError):
    pass


def _dtol(x, model: ScatteringModel) -> float:
    Gx = model.G0 @ x
    return 1e-12 * (np.max(np.abs(model.e_i), initial=0.0) + np.max(np.abs(Gx), initial=0.0))


def infer_potential(x, model: ScatteringModel):
    """Implied susceptibility per cell and a mask of singular cells.

    Cells with a vanishing denominator and vanishing field are vacuum; a
    vanishing denominator with a finite field is singular (value ``inf``).
    """
    x = np.asarray(x, dtype=complex)
    den = model.G0 @ x + model.e_i
    tol = _dtol(x, model)
    small = np.abs(den) < tol
    chi = np.zeros_like(x)
    ok = ~small
    chi[ok] = x[ok] / den[ok]
    singular = small & (np.abs(x) >= tol)
    chi[singular] = np.inf
    return chi, singular


def project_potential(chi_raw, mat: MaterialSet, singular=None) -> np.ndarray:
    """Nearest admissible susceptibility per cell (complex-plane distance).

    Singular cells map to ``chi_max``. Binary ties go to vacuum.
    """
    chi = np.asarray(chi_raw, dtype=complex).copy()
    sing = np.zeros(chi.shape, dtype=bool) if singular is None else np.asarray(singular, dtype=bool)
    sing = sing | ~np.isfinite(chi)
    chi[sing] = 0.0
    cm = mat.chi_max
    if mat.binary:
        out = np.where(np.abs(chi) <= np.abs(chi - cm), 0.0, cm).astype(complex)
    else:
        t = np.clip(np.real(chi * np.conj(cm)) / abs(cm) ** 2, 0.0, 1.0)
        out = t * cm
    out[sing] = cm
    return out


def support(x, rel_tol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    scale = np.max(np.abs(x), initial=0.0)
    return np.abs(x) > rel_tol * scale if scale > 0 else np.zeros(x.shape, dtype=bool)


def delta_residuals(x, chi_probe, model: ScatteringModel) -> np.ndarray:
    """``x^H [Q_j (X_probe^-1 - X_x^-1)]^s x`` per witness, restricted to ``supp(x)``.

    ``X_x^-1 = ((G0 x)_k + e_i_k) / x_k`` on the support, so probing with the
    implied potential itself gives zero. Empty support gives an empty result.
    """
    x = np.asarray(x, dtype=complex)
    chi_probe = np.asarray(chi_probe, dtype=complex)
    S = support(x)
    if not np.any(S):
        return np.zeros(0)
    if np.any(np.abs(chi_probe[S]) == 0) or not np.all(np.isfinite(chi_probe[S])):
        raise ValueError("probe potential vanishes or is singular on the support of x")
    return _jump(x, chi_probe, model, S)


def _jump(x, chi_probe, model, S):
    xs = x[S]
    implied_inv = (model.G0 @ x + model.e_i)[S] / xs
    d = 1.0 / chi_probe[S] - implied_inv
    out = []
    for Q in model.witnesses:
        M = Q[np.ix_(S, S)] * d[None, :]
        out.append(float(np.real(np.vdot(xs, (M + M.conj().T) @ xs))))
    return np.array(out)


def resimulate(chi, model: ScatteringModel, objective: Optional[QuadraticForm] = None):
    """Solve ``(I - G0 X) e_t = e_i``; return ``(x_phys, objective value or None)``."""
    chi = np.asarray(chi, dtype=complex)
    n = model.n
    if chi.shape != (n,):
        raise ValueError(f"design has {chi.size} cells, model has {n}")
    M = np.eye(n) - model.G0 * chi[None, :]
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSystemError(f"scattering system is singular (condition {cond:.3e})")
    e_t = np.linalg.solve(M, model.e_i)
    x = chi * e_t
    val = None if objective is None else evaluate(objective, x)
    return x, val


def infer_structure(x, model: ScatteringModel, mat: MaterialSet,
                    objective: Optional[QuadraticForm] = None) -> InferredStructure:
    """Implied potential, its projection, jump residuals and the re-simulated objective.

    Residuals probe with the projected design on cells where both the field and
    the projected susceptibility are nonzero.
    """
    x = np.asarray(x, dtype=complex)
    chi_raw, sing = infer_potential(x, model)
    chi_proj = project_potential(chi_raw, mat, sing)
    keep = support(x) & (np.abs(chi_proj) > 0)
    if np.any(keep):
        res = _jump(x, chi_proj, model, keep)
    else:
        res = np.zeros(len(model.witnesses))
    x_phys, val = resimulate(chi_proj, model, objective)
    return InferredStructure(chi_raw, chi_proj, res, float(val) if val is not None else float("nan"),
                             sing, x_phys)
