"""One-dimensional Helmholtz scattering testbed.

Solver units: fields are dimensionless and the free Green operator absorbs the
``k^2`` and cell-volume factors, so the scattering solve reads

    (I - G0 X) e_t = e_i,    x = X e_t

with ``X`` the diagonal susceptibility. The outgoing 1-D kernel is
``G0[l, m] = (i k dx / 2) exp(i k dx |l - m|)``; a point source at ``pos``
radiates ``e_i(l) = a (i k / 2) exp(i k |x_l - pos|)``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .infer import MaterialSet
from .quadform import QuadraticForm, psd_check
from .scqp import SCQP, ScatteringModel, build_local_constraints


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with cell centers at ``x_l = l dx`` (lengths in wavelengths)."""
    n: int = 32
    dx: float = 1.0 / 40.0
    k: float = 2.0 * np.pi
    design_span: tuple = (0, None)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid needs at least one cell")
        if self.k <= 0:
            raise ValueError("wavenumber must be positive")
        if self.dx > 1.0 / 20.0 + 1e-15:
            raise ValueError(f"cell size {self.dx} exceeds the 1/20 wavelength resolution floor")
        lo, hi = self.design_span
        hi = self.n if hi is None else hi
        if not 0 <= lo < hi <= self.n:
            raise ValueError(f"design span {self.design_span} outside the grid")
        object.__setattr__(self, "design_span", (int(lo), int(hi)))

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def design_cells(self) -> np.ndarray:
        return np.arange(*self.design_span)


def green_1d(grid: Grid1D) -> np.ndarray:
    idx = np.arange(grid.n)
    d = np.abs(idx[:, None] - idx[None, :])
    return (1j * grid.k * grid.dx / 2.0) * np.exp(1j * grid.k * grid.dx * d)


def dipole_source(grid: Grid1D, pos: float, amplitude: complex = 1.0) -> np.ndarray:
    return amplitude * (1j * grid.k / 2.0) * np.exp(1j * grid.k * np.abs(grid.positions - pos))


def asym(M) -> np.ndarray:
    """Anti-Hermitian part ``(M - M^H) / 2i``."""
    M = np.asarray(M, dtype=complex)
    return (M - M.conj().T) / 2j


def witness_set(n: int, kind: str = "global") -> tuple:
    """``I`` and ``iI``, plus every ``delta_kk`` and ``i delta_kk`` when ``kind`` includes local."""
    W = [np.eye(n, dtype=complex), 1j * np.eye(n)]
    labels = ["I", "iI"]
    if kind in ("global+local", "local"):
        for k in range(n):
            d = np.zeros((n, n), dtype=complex)
            d[k, k] = 1.0
            W.extend([d, 1j * d])
            labels.extend([f"d{k}", f"id{k}"])
    elif kind != "global":
        raise ValueError(f"unknown witness set {kind!r}")
    return tuple(W), tuple(labels)


def sense_for(Q, chi_max: complex, binary: bool) -> str:
    """Constraint sense implied by grey-scale media for a diagonal witness.

    For ``chi = t chi_max`` with ``t in (0, 1]`` the physical field gives
    ``Re[q (1/chi - 1/chi_max)] |x|^2``, whose sign is that of ``Re[q / chi_max]``.
    """
    if binary:
        return "EQ"
    q = np.diag(np.asarray(Q))
    vals = np.real(q / chi_max)
    if np.all(vals >= 0):
        return "GE"
    if np.all(vals <= 0):
        return "LE"
    return "EQ"


@dataclass(frozen=True)
class DesignSpec:
    grid: Grid1D
    chi_max: complex
    source_pos: float
    witnesses: str = "global"
    binary: bool = False
    amplitude: complex = 1.0

    def to_json(self) -> str:
        d = asdict(self)
        d["grid"]["design_span"] = list(self.grid.design_span)
        d["chi_max"] = [self.chi_max.real, self.chi_max.imag]
        d["amplitude"] = [complex(self.amplitude).real, complex(self.amplitude).imag]
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "DesignSpec":
        d = json.loads(text)
        g = d["grid"]
        grid = Grid1D(g["n"], g["dx"], g["k"], tuple(g["design_span"]))
        return cls(grid, complex(*d["chi_max"]), float(d["source_pos"]), d["witnesses"],
                   bool(d["binary"]), complex(*d["amplitude"]))


def build_design_scqp(grid: Grid1D, mat: MaterialSet, source, witnesses: str = "global",
                      amplitude: complex = 1.0, label: str = ""):
    """Extracted-power design program and its scattering model.

    ``source`` is a position (point source) or an explicit incident field. The
    objective ``f_o(x) = Im[e_i^H x] / 2`` uses ``s_o = (i/4) e_i``. Constraint
    senses follow :func:`sense_for`. ``kappa`` selects the ``iI`` row, whose
    bilinear part is ``Asym(G0) - Im(1/chi_max) I``.
    """
    cells = grid.design_cells
    G = green_1d(grid)[np.ix_(cells, cells)]
    if np.isscalar(source) or np.ndim(source) == 0:
        e_full = dipole_source(grid, float(source), amplitude)
    else:
        e_full = np.asarray(source, dtype=complex)
        if e_full.shape != (grid.n,):
            raise ValueError("incident field must have one entry per cell")
    e_i = e_full[cells]
    n = cells.size
    W, labels = witness_set(n, witnesses)
    senses = tuple(sense_for(Q, mat.chi_max, mat.binary) for Q in W)
    model = ScatteringModel(G, e_i, np.full(n, 1.0 / mat.chi_max), W, senses, labels)
    cons = build_local_constraints(model)
    kappa = np.zeros(len(cons))
    kappa[labels.index("iI")] = 1.0
    Ak = cons[labels.index("iI")].form.A
    if not psd_check(Ak).min_eig > 0:
        raise ValueError("the iI row is not positive definite; choose a lossy material or another witness")
    obj = QuadraticForm.linear(0.25j * e_i)
    header = {"n": grid.n, "dx": grid.dx, "k": grid.k, "chi_max": [mat.chi_max.real, mat.chi_max.imag],
              "binary": mat.binary, "witnesses": witnesses,
              "source_pos": None if not np.isscalar(source) else float(source)}
    problem = SCQP(obj, tuple(cons), kappa, label or f"helmholtz1d n={grid.n}", model=model, header=header)
    return problem, model


def solve_physical(model: ScatteringModel, chi) -> np.ndarray:
    """Polarization ``x = X (I - G0 X)^-1 e_i`` of a diagonal design."""
    from .infer import resimulate
    return resimulate(chi, model)[0]


def random_designs(rng: np.random.Generator, n: int, mat: MaterialSet, count: int,
                   binary: Optional[bool] = None) -> np.ndarray:
    """``count`` admissible designs, one per row."""
    binary = mat.binary if binary is None else binary
    if binary:
        t = rng.integers(0, 2, size=(count, n)).astype(float)
    else:
        t = rng.uniform(0.0, 1.0, size=(count, n))
    return t * mat.chi_max
