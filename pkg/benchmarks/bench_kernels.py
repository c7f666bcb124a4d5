"""Time the brute-force kernels on each available backend.

Usage: python benchmarks/bench_kernels.py [--n-binary 16] [--grid 201] [--repeat 3]
"""
import argparse
import time

import numpy as np

from sionqp.kernels import backends
from sionqp.scqp import _pack, encode_subset_sum
from sionqp.problems import fig2a


def _packed(problem):
    o = problem.objective
    return _pack(problem, 1e-9) + (np.ascontiguousarray(np.real(o.A)), np.ascontiguousarray(np.real(o.s)),
                                   float(o.c))


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-binary", type=int, default=16, help="subset-sum size for binary enumeration")
    ap.add_argument("--grid", type=int, default=201, help="samples per axis for the 2-D grid scan")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    S = [int(v) for v in rng.integers(1, 50, size=args.n_binary)]
    ss = encode_subset_sum(S, int(sum(S) // 2))
    packed_ss = _packed(ss)
    f2 = fig2a().problem
    packed_f2 = _packed(f2)
    axes = np.ascontiguousarray(np.tile(np.linspace(-1.0, 1.0, args.grid), (2, 1)))

    ref = {}
    print(f"{'kernel':<18} {'backend':<8} {'seconds':>10} {'speedup':>8}")
    for name, call in (
        (f"enumerate n={args.n_binary}", lambda k: k.enumerate_binary(*packed_ss)),
        (f"scan {args.grid}^2", lambda k: k.scan_grid(*packed_f2, axes)),
    ):
        base = None
        for bname, mod in sorted(backends().items(), key=lambda kv: kv[0] != "python"):
            t, out = _best(lambda: call(mod), args.repeat)
            base = t if base is None else base
            if name in ref and not _agree(ref[name], out):
                print(f"  backends disagree on {name}")
            ref.setdefault(name, out)
            print(f"{name:<18} {bname:<8} {t:>10.4f} {base / t:>7.1f}x")


def _agree(a, b):
    if isinstance(a, tuple) and isinstance(a[0], np.ndarray):
        return all(np.allclose(x, y, rtol=1e-12, atol=1e-12) for x, y in zip(a, b))
    return a[1] == b[1] and a[2] == b[2] and abs(a[0] - b[0]) <= 1e-9 * (1 + abs(a[0]))


if __name__ == "__main__":
    main()
