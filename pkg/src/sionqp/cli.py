"""Command line: solve duals, run verlan, scan Sion sets, infer structures, run checks.

Every command writes its artifacts under ``--out`` and is reproducible from the
configuration and the seed. Exit codes: 0 success, 1 bad input, 2 dual solver
did not converge, 3 verlan budget exhausted, 4 a property check failed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .artifacts import csv_text, write_json, write_text
from .dual import SolverOptions, boundary_proximity, minimize_dual
from .verlan import VerlanParams

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_BUDGET, EXIT_CHECK = 0, 1, 2, 3, 4
COMMANDS = ("solve-dual", "verlan", "sion-scan", "infer", "sdp-check", "check")


class ConfigError(ValueError):
    pass


@dataclass
class ProblemSpec:
    """A builtin name or a path to a problem JSON, plus builtin parameters."""
    name: str = "fig2a"
    subset: Optional[list] = None
    target: Optional[int] = None
    n: Optional[int] = None
    dx: Optional[float] = None
    chi_max: Optional[list] = None     # [re, im]
    source_pos: Optional[float] = None
    witnesses: Optional[str] = None
    binary: Optional[bool] = None


@dataclass
class ScanSpec:
    resolution: int = 101
    b: Optional[float] = None          # default: largest b of the default schedule
    bounds: Optional[list] = None      # [lo0, hi0, lo1, hi1]; default: F_kappa box


@dataclass
class RunConfig:
    command: str = "solve-dual"
    seed: int = 0
    output_dir: str = "out"
    quiet: bool = False
    problem: ProblemSpec = field(default_factory=ProblemSpec)
    solver: SolverOptions = field(default_factory=SolverOptions)
    verlan: VerlanParams = field(default_factory=VerlanParams)
    scan: ScanSpec = field(default_factory=ScanSpec)
    suite: str = "all"
    field_path: Optional[str] = None   # polarization field for ``infer``

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        nested = {"problem": ProblemSpec, "solver": SolverOptions, "verlan": VerlanParams, "scan": ScanSpec}
        kw = {}
        for key, val in d.items():
            if key not in {f.name for f in fields(cls)}:
                raise ConfigError(f"unknown configuration key {key!r}")
            if key in nested:
                kw[key] = _build(nested[key], val, key)
            else:
                kw[key] = val
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"malformed configuration JSON: {err}") from None
        return cls.from_dict(d)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        if self.scan.resolution < 2:
            raise ConfigError("scan resolution must be at least 2")
        from .suites import SUITES
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from all, {', '.join(SUITES)}")


def _build(kind, val, key):
    if not isinstance(val, dict):
        raise ConfigError(f"{key} must be an object")
    names = {f.name for f in fields(kind)}
    bad = set(val) - names
    if bad:
        raise ConfigError(f"unknown {key} keys: {sorted(bad)}")
    try:
        return kind(**val)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {key} settings: {err}") from None


# -- problem loading ---------------------------------------------------------

def load_problem(spec: ProblemSpec):
    """Return ``(problem, builtin-or-None)``."""
    from .problems import REGISTRY, load_builtin
    from .scqp import loads
    if spec.name in REGISTRY:
        params = {}
        if spec.name == "subset-sum":
            if spec.subset is not None:
                params["S"] = tuple(int(v) for v in spec.subset)
            if spec.target is not None:
                params["t"] = int(spec.target)
        elif spec.name == "helmholtz1d":
            for key in ("n", "dx", "source_pos", "witnesses", "binary"):
                v = getattr(spec, key)
                if v is not None:
                    params[key] = v
            if spec.chi_max is not None:
                params["chi_max"] = complex(*spec.chi_max)
        try:
            b = load_builtin(spec.name, **params)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad parameters for {spec.name}: {err}") from None
        return b.problem, b
    if not os.path.exists(spec.name):
        raise ConfigError(f"{spec.name!r} is neither a builtin problem nor a file")
    with open(spec.name) as f:
        try:
            return loads(f.read()), None
        except (KeyError, ValueError, TypeError) as err:
            raise ConfigError(f"malformed problem file: {err}") from None


def _cv(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _say(cfg: RunConfig, msg: str) -> None:
    if not cfg.quiet:
        print(msg)


# -- commands ------------------------------------------------------------------

def cmd_solve_dual(cfg: RunConfig) -> int:
    p, b = load_problem(cfg.problem)
    res = minimize_dual(p, cfg.solver)
    out = {
        "problem": p.label,
        "value": res.value,
        "x_star": _cv(res.x_star),
        "phi_star": [float(v) for v in res.phi_star],
        "phi_rows": None if res.phi_rows is None else [float(v) for v in res.phi_rows],
        "converged": res.converged,
        "iterations": res.iterations,
        "method": res.method,
        "min_eig_Apsi": res.eval.min_eig_Apsi,
        "rho": boundary_proximity(p, res.x_star) if p.kappa is not None else None,
    }
    if b is not None:
        out["oracle"] = {"value": b.oracle_value, "kind": b.oracle_kind,
                         "x": None if b.oracle_x is None else _cv(b.oracle_x)}
        out["gap"] = res.value - b.oracle_value
        out["header"] = p.header
    write_json(os.path.join(cfg.output_dir, "dual_result.json"), out)
    J = len(p.expanded())
    rows = [(k, D, *phi) for k, (phi, D) in enumerate(res.history)]
    write_text(os.path.join(cfg.output_dir, "dual_history.csv"),
               csv_text(["step", "dual_value"] + [f"phi_{j}" for j in range(J)], rows))
    _say(cfg, f"{p.label}: dual value {res.value:.12g} after {res.iterations} iterations"
              + ("" if res.converged else " (not converged)"))
    if b is not None:
        _say(cfg, f"  oracle {b.oracle_value:.12g} ({b.oracle_kind}), gap {out['gap']:.6g}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_verlan(cfg: RunConfig) -> int:
    from .infer import infer_structure
    from .verlan import run_verlan, state_dict, trajectory_csv
    p, b = load_problem(cfg.problem)
    mat = None if b is None else b.material
    out = run_verlan(p, cfg.verlan, cfg.solver, material=mat)
    d = cfg.output_dir
    write_text(os.path.join(d, "trajectory.csv"), trajectory_csv(out.trajectory))
    summary = state_dict(out)
    summary["problem"] = p.label
    x_best = out.x_star
    if not out.terminal and out.state.last_strong_dual is not None:
        # best state: the last strongly dual snapshot
        x_best = out.state.last_strong_dual.x_star
        summary["best_state"] = {"alpha": out.state.last_strong_dual.alpha,
                                 "rho": out.state.last_strong_dual.rho,
                                 "dual_value": out.state.last_strong_dual.dual_value,
                                 "x_star": _cv(x_best)}
    structure = out.structure
    if structure is None and mat is not None and p.model is not None:
        structure = infer_structure(x_best, p.model, mat, p.objective)
    if structure is not None:
        write_text(os.path.join(d, "structure.csv"), structure.to_csv(mat))
        summary["structure"] = {"objective_resim": structure.objective_resim,
                                "from_terminal_state": out.terminal}
    else:
        rows = [(k, z.real, z.imag) for k, z in enumerate(np.asarray(x_best, dtype=complex))]
        write_text(os.path.join(d, "structure.csv"), csv_text(["index", "x_re", "x_im"], rows))
    write_json(os.path.join(d, "summary.json"), summary)
    _say(cfg, f"{p.label}: {'TERMINAL' if out.terminal else 'not terminal'} after {out.state.steps} solves, "
              f"{out.state.scrape_count} scrapes, |x*| {np.linalg.norm(out.x_star):.6g}, rho {out.state.rho:.6g}")
    if out.message:
        _say(cfg, "  " + out.message)
    return EXIT_OK if out.terminal else EXIT_BUDGET


def _scan_axes(p, spec: ScanSpec):
    from .scqp import _real_problem_forms, kappa_box
    _, rforms, doubled = _real_problem_forms(p)
    dim = 2 * p.n if doubled else p.n
    if dim != 2:
        raise ConfigError(f"sion-scan needs a problem with two real coordinates, got {dim}")
    if spec.bounds is not None:
        lo0, hi0, lo1, hi1 = (float(v) for v in spec.bounds)
    else:
        c, h = kappa_box(p, rforms)
        lo0, hi0, lo1, hi1 = c[0] - h[0], c[0] + h[0], c[1] - h[1], c[1] + h[1]
    g0 = np.linspace(lo0, hi0, spec.resolution)
    g1 = np.linspace(lo1, hi1, spec.resolution)
    return g0, g1, doubled


def sion_scan(p, spec: ScanSpec, seed: int = 0):
    """Rows ``(x0, x1, S_b, member, divergence_rate)`` over a 2-D grid.

    Membership compares ``S_b`` with ``S_{b/2}`` at the plateau tolerance; the
    divergence rate is the LP marginal ``dS_b/db``.
    """
    from .sion import PLATEAU_TOL, CutPool, default_b_schedule, eval_sion_bounded
    g0, g1, doubled = _scan_axes(p, spec)
    b = spec.b if spec.b is not None else default_b_schedule(p, seed=seed)[-1]
    pool = CutPool(p)
    rows = []
    for u in g0:
        for v in g1:
            x = np.array([u + 1j * v]) if doubled else np.array([u, v], dtype=complex)
            full = eval_sion_bounded(p, x, b, pool)
            half = eval_sion_bounded(p, x, b / 2.0, pool)
            S = full.value
            member = bool(np.isfinite(S) and abs(S - half.value) <= PLATEAU_TOL * (1.0 + abs(S)))
            rows.append((float(u), float(v), S, member, full.divergence_rate))
    return rows


def cmd_sion_scan(cfg: RunConfig) -> int:
    p, _ = load_problem(cfg.problem)
    rows = sion_scan(p, cfg.scan, cfg.seed)
    write_text(os.path.join(cfg.output_dir, "sion_scan.csv"),
               csv_text(["x0", "x1", "value", "member", "divergence_rate"], rows))
    inside = sum(r[3] for r in rows)
    _say(cfg, f"{p.label}: {inside} of {len(rows)} grid points in the Sion set")
    return EXIT_OK


def _read_field(path: str) -> np.ndarray:
    with open(path) as f:
        text = f.read()
    try:
        d = json.loads(text)
        v = d["x_star"] if isinstance(d, dict) else d
        return np.array([complex(*z) for z in v])
    except (json.JSONDecodeError, KeyError, TypeError) as err:
        raise ConfigError(f"cannot read a field from {path}: {err}") from None


def cmd_infer(cfg: RunConfig) -> int:
    from .infer import infer_structure
    p, b = load_problem(cfg.problem)
    if p.model is None or b is None or b.material is None:
        raise ConfigError("infer needs a physical builtin problem such as helmholtz1d")
    if cfg.field_path:
        x = _read_field(cfg.field_path)
        if x.shape != (p.n,):
            raise ConfigError(f"field has {x.size} entries, the problem has {p.n}")
    else:
        x = minimize_dual(p, cfg.solver).x_star
    st = infer_structure(x, p.model, b.material, p.objective)
    write_text(os.path.join(cfg.output_dir, "structure.csv"), st.to_csv(b.material))
    write_json(os.path.join(cfg.output_dir, "structure.json"), st.to_dict())
    _say(cfg, f"{p.label}: resimulated objective {st.objective_resim:.12g}, "
              f"{int(st.singular.sum())} singular cells")
    return EXIT_OK


def cmd_sdp_check(cfg: RunConfig) -> int:
    from .relax import check_equivalence
    p, b = load_problem(cfg.problem)
    rep = check_equivalence(p, opts=cfg.solver, primal_value=None if b is None else b.oracle_value)
    write_json(os.path.join(cfg.output_dir, "sdp_check.json"), rep.to_dict())
    _say(cfg, f"{p.label}: dual {rep.dual_value:.12g}, SDP {rep.sdp_value:.12g}, rank {rep.rank}, "
              + ("PASS" if rep.passed else "FAIL " + "; ".join(rep.messages)))
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_check(cfg: RunConfig) -> int:
    from .suites import SUITES
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    results = []
    for name in names:
        r = SUITES[name](seed=cfg.seed)
        results.append((name, r))
        _say(cfg, r.line())
    rows = [(name, int(r.passed), r.cases, len(r.failures), r.worst) for name, r in results]
    write_text(os.path.join(cfg.output_dir, "check_summary.csv"),
               csv_text(["suite", "passed", "cases", "failures", "worst"], rows))
    failed = [(name, r) for name, r in results if not r.passed]
    # the summary table always goes to stdout
    print(f"{'suite':<10} {'result':<6} {'cases':>6} {'fail':>5} {'worst':>11}")
    for name, r in results:
        print(f"{name:<10} {'PASS' if r.passed else 'FAIL':<6} {r.cases:>6} {len(r.failures):>5} {r.worst:>11.3e}")
    if failed:
        print("failed properties: " + ", ".join(name for name, _ in failed))
        for name, r in failed:
            for msg in r.failures[:10]:
                print(f"  {name}: {msg}")
        return EXIT_CHECK
    return EXIT_OK


HANDLERS = {
    "solve-dual": cmd_solve_dual,
    "verlan": cmd_verlan,
    "sion-scan": cmd_sion_scan,
    "infer": cmd_infer,
    "sdp-check": cmd_sdp_check,
    "check": cmd_check,
}


# -- argument parsing ----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # bad arguments are bad input, not solver outcomes
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _complex(text):
    try:
        z = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a complex number such as 4+0.1j, got {text!r}") from None
    return [z.real, z.imag]


def _bool(text):
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON RunConfig; flags given on the command line override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("--quiet", action="store_const", const=True)

    prob = _Parser(add_help=False)
    prob.add_argument("--problem", help="builtin name (fig2a, ball, subset-sum, helmholtz1d) or a problem JSON")
    prob.add_argument("--set", dest="subset", type=_ints, help="subset-sum values, e.g. 1,2")
    prob.add_argument("--target", type=int)
    prob.add_argument("--n", type=int)
    prob.add_argument("--dx", type=float)
    prob.add_argument("--chi-max", type=_complex)
    prob.add_argument("--source-pos", type=float)
    prob.add_argument("--witnesses", choices=["global", "local", "global+local"])
    prob.add_argument("--binary", type=_bool)
    prob.add_argument("--method", choices=["barrier", "gradient"])

    ap = _Parser(prog="sionqp", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("solve-dual", parents=[common, prob], help="minimize the Lagrange dual")
    v = sub.add_parser("verlan", parents=[common, prob], help="contract, expand and scrape toward strong duality")
    v.add_argument("--sigma", type=float)
    v.add_argument("--gamma", type=float)
    v.add_argument("--epsilon", type=float)
    v.add_argument("--boundary-tol", type=float)
    v.add_argument("--scrape-limit", type=int)
    v.add_argument("--alpha-max", type=float)
    v.add_argument("--convex-mix", type=_bool)
    v.add_argument("--normalize-r", type=_bool)
    v.add_argument("--max-steps", type=int)
    s = sub.add_parser("sion-scan", parents=[common, prob], help="grid scan of S_b over a 2-D problem")
    s.add_argument("--resolution", type=int)
    s.add_argument("--b", type=float)
    s.add_argument("--bounds", type=lambda t: [float(x) for x in t.split(",")],
                   help="lo0,hi0,lo1,hi1 (default: bounding box of F_kappa)")
    i = sub.add_parser("infer", parents=[common, prob], help="infer a structure from a polarization field")
    i.add_argument("--field", dest="field_path", help="JSON with x_star as [re, im] pairs (default: dual x*)")
    sub.add_parser("sdp-check", parents=[common, prob], help="compare the dual with the SDP relaxation")
    c = sub.add_parser("check", parents=[common], help="run the randomized property suites")
    c.add_argument("--suite", help="all, monotone, lemma0, lemma1, lemma4, sdp, inference or weak")
    return ap


_VERLAN_FLAGS = ("sigma", "gamma", "epsilon", "boundary_tol", "scrape_limit", "alpha_max",
                 "convex_mix", "normalize_r", "max_steps")
_PROBLEM_FLAGS = ("subset", "target", "n", "dx", "chi_max", "source_pos", "witnesses", "binary")


def config_from_args(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config) as f:
                d = json.loads(f.read())
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"malformed configuration JSON: {err}") from None
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
    else:
        d = {}
    d["command"] = args.command
    for key in ("seed", "output_dir", "quiet", "suite", "field_path"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    prob = dict(d.get("problem", {}))
    if getattr(args, "problem", None) is not None:
        prob["name"] = args.problem
    for key in _PROBLEM_FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            prob[key] = v
    d["problem"] = prob
    if getattr(args, "method", None) is not None:
        d["solver"] = dict(d.get("solver", {}), method=args.method)
    ver = dict(d.get("verlan", {}))
    for key in _VERLAN_FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            ver[key] = v
    d["verlan"] = ver
    scan = dict(d.get("scan", {}))
    for key in ("resolution", "b", "bounds"):
        v = getattr(args, key, None)
        if v is not None:
            scan[key] = v
    d["scan"] = scan
    return RunConfig.from_dict(d)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        os.makedirs(cfg.output_dir, exist_ok=True)
        write_text(os.path.join(cfg.output_dir, "config.json"), cfg.to_json() + "\n")
        return HANDLERS[cfg.command](cfg)
    except ConfigError as err:
        print(f"sionqp: error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
