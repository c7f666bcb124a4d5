"""Pure numpy brute-force kernels (fallback for the compiled ``_kernels``).

Both backends take the same packed arrays for real-variable forms:

- ``A``: (J, n, n) real symmetric bilinear parts
- ``s``: (J, n) real linear parts
- ``c``: (J,) offsets
- ``is_eq``: (J,) uint8, 1 for equality rows
- ``tol``: (J,) feasibility tolerance per row
- ``oA, os, oc``: objective form
"""
import numpy as np

_CHUNK = 1 << 15


def _eval_rows(A, s, c, X):
    # X: (N, n) -> (J, N)
    lin = 2.0 * (s @ X.T)
    quad = np.einsum("ni,jik,nk->jn", X, A, X, optimize=True)
    return lin - quad + c[:, None]


def _violation(vals, is_eq, tol):
    # scaled violation: <= 1 means within tolerance
    eq = is_eq.astype(bool)[:, None]
    v = np.where(eq, np.abs(vals), np.maximum(-vals, 0.0))
    return np.max(v / tol[:, None], axis=0) if vals.shape[0] else np.zeros(vals.shape[1])


def enumerate_binary(A, s, c, is_eq, tol, oA, os, oc):
    """Best objective over feasible ``x in {0,1}^n``.

    Returns ``(best_value, best_mask, n_feasible)``; ``best_mask`` is -1 when
    nothing is feasible. Ties within ``1e-9 (1 + |best|)`` go to the smaller mask.
    """
    n = s.shape[1] if s.ndim == 2 and s.shape[0] else os.shape[0]
    total = 1 << n
    bits = np.arange(n, dtype=np.int64)
    best, best_mask, count = -np.inf, -1, 0
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        X = ((masks[:, None] >> bits) & 1).astype(float)
        ok = _violation(_eval_rows(A, s, c, X), is_eq, tol) <= 1.0
        if not ok.any():
            continue
        count += int(ok.sum())
        obj = _eval_rows(oA[None], os[None], np.array([oc]), X[ok])[0]
        for val, m in zip(obj, masks[ok]):
            ttol = 1e-9 * (1.0 + abs(best)) if np.isfinite(best) else 0.0
            if val > best + ttol or (abs(val - best) <= ttol and m < best_mask):
                best, best_mask = float(val), int(m)
    return best, best_mask, count


def scan_grid(A, s, c, is_eq, tol, oA, os, oc, axes):
    """Objective and scaled violation at every point of a tensor grid.

    ``axes`` is (n, m): the same number of samples per coordinate. Points are
    ordered with the last coordinate fastest. Returns ``(objective, violation)``.
    """
    axes = np.asarray(axes, dtype=float)
    n, m = axes.shape
    total = m ** n
    obj = np.empty(total)
    viol = np.empty(total)
    strides = m ** np.arange(n - 1, -1, -1)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK))
        digits = (idx[:, None] // strides) % m
        X = axes[np.arange(n), digits]
        obj[idx] = _eval_rows(oA[None], os[None], np.array([oc]), X)[0]
        viol[idx] = _violation(_eval_rows(A, s, c, X), is_eq, tol)
    return obj, viol
