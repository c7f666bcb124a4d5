# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled brute-force kernels; same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()


def enumerate_binary(const double[:, :, ::1] A, const double[:, ::1] s, const double[::1] c,
                     const unsigned char[::1] is_eq, const double[::1] tol,
                     const double[:, ::1] oA, const double[::1] os, double oc):
    # Gray-code walk: one bit flips per step, forms and A x are updated in O(J n)
    cdef Py_ssize_t J = A.shape[0]
    cdef Py_ssize_t n = os.shape[0]
    cdef long long total = 1LL << n
    cdef long long step, gray = 0, mask, best_mask = -1, count = 0
    cdef Py_ssize_t j, i, k
    cdef double best = -INFINITY, ttol, val, delta, sgn
    cdef double[::1] vals = np.array(c, dtype=np.float64, copy=True)
    cdef double[:, ::1] w = np.zeros((J, n))
    cdef double ov = oc
    cdef double[::1] ow = np.zeros(n)
    cdef bint ok
    cdef unsigned char[::1] x = np.zeros(n, dtype=np.uint8)

    for step in range(total):
        if step > 0:
            # bit that changes between gray(step-1) and gray(step)
            k = 0
            while not ((step >> k) & 1):
                k += 1
            sgn = -1.0 if x[k] else 1.0
            for j in range(J):
                delta = 2.0 * s[j, k] - 2.0 * w[j, k] - A[j, k, k] if sgn > 0 else \
                    -2.0 * s[j, k] + 2.0 * w[j, k] - A[j, k, k]
                vals[j] += delta
                for i in range(n):
                    w[j, i] += sgn * A[j, i, k]
            delta = 2.0 * os[k] - 2.0 * ow[k] - oA[k, k] if sgn > 0 else \
                -2.0 * os[k] + 2.0 * ow[k] - oA[k, k]
            ov += delta
            for i in range(n):
                ow[i] += sgn * oA[i, k]
            x[k] = 0 if x[k] else 1
            gray ^= (1LL << k)
        ok = True
        for j in range(J):
            if is_eq[j]:
                if fabs(vals[j]) > tol[j]:
                    ok = False
                    break
            elif vals[j] < -tol[j]:
                ok = False
                break
        if not ok:
            continue
        count += 1
        mask = gray
        ttol = 1e-9 * (1.0 + fabs(best)) if best > -INFINITY else 0.0
        if ov > best + ttol or (fabs(ov - best) <= ttol and mask < best_mask):
            best = ov
            best_mask = mask
    return best, best_mask, count


def scan_grid(const double[:, :, ::1] A, const double[:, ::1] s, const double[::1] c,
              const unsigned char[::1] is_eq, const double[::1] tol,
              const double[:, ::1] oA, const double[::1] os, double oc, const double[:, ::1] axes):
    cdef Py_ssize_t J = A.shape[0]
    cdef Py_ssize_t n = axes.shape[0]
    cdef Py_ssize_t m = axes.shape[1]
    cdef long long total = 1, p, rem
    cdef Py_ssize_t d, j, i, k
    cdef double v, q, worst, r
    for d in range(n):
        total *= m
    obj_arr = np.empty(total)
    viol_arr = np.empty(total)
    cdef double[::1] obj = obj_arr
    cdef double[::1] viol = viol_arr
    cdef double[::1] x = np.empty(n)
    for p in range(total):
        rem = p
        for d in range(n - 1, -1, -1):
            x[d] = axes[d, rem % m]
            rem //= m
        v = oc
        for i in range(n):
            q = 0.0
            for k in range(n):
                q += oA[i, k] * x[k]
            v += 2.0 * os[i] * x[i] - x[i] * q
        obj[p] = v
        worst = 0.0
        for j in range(J):
            v = c[j]
            for i in range(n):
                q = 0.0
                for k in range(n):
                    q += A[j, i, k] * x[k]
                v += 2.0 * s[j, i] * x[i] - x[i] * q
            if is_eq[j]:
                r = fabs(v) / tol[j]
            else:
                r = (-v if v < 0 else 0.0) / tol[j]
            if r > worst:
                worst = r
        viol[p] = worst
    return obj_arr, viol_arr
