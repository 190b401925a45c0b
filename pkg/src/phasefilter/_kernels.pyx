# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: dense complex products, Jacobi rotation sweeps,
and the quadratic discrepancy corner sweep.

Semantics match ``_kernels_py.py`` exactly; see that module for the
reference definitions and commentary.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.string cimport memmove

cnp.import_array()


def matmul_naive(cnp.complex128_t[:, ::1] a, cnp.complex128_t[:, ::1] b):
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t k = a.shape[1]
    cdef Py_ssize_t n = b.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros((m, n), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] c = out
    cdef Py_ssize_t i, j, t
    cdef double complex av
    for i in range(m):
        for t in range(k):
            av = a[i, t]
            for j in range(n):
                c[i, j] = c[i, j] + av * b[t, j]
    return out


def matmul_blocked(cnp.complex128_t[:, ::1] a, cnp.complex128_t[:, ::1] b, Py_ssize_t block=64):
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t k = a.shape[1]
    cdef Py_ssize_t n = b.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros((m, n), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] c = out
    cdef Py_ssize_t i0, k0, j0, i1, k1, j1, i, j, t
    cdef double complex av
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        for k0 in range(0, k, block):
            k1 = min(k0 + block, k)
            for j0 in range(0, n, block):
                j1 = min(j0 + block, n)
                for i in range(i0, i1):
                    for t in range(k0, k1):
                        av = a[i, t]
                        for j in range(j0, j1):
                            c[i, j] = c[i, j] + av * b[t, j]
    return out


def jacobi_sweep(cnp.complex128_t[:, ::1] a, cnp.complex128_t[:, ::1] v, double skip):
    """One cyclic sweep of two-sided complex Jacobi rotations, in place."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, r
    cdef int rotations = 0
    cdef double mag, tau, t, c, s
    cdef double complex apq, phase, sp, spc, xp, xq
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            mag = sqrt(apq.real * apq.real + apq.imag * apq.imag)
            # The 1e-150 floor keeps 1/mag finite; anything that small is
            # numerically zero at every scale this solver is used at.
            if mag <= skip or mag < 1e-150:
                continue
            rotations += 1
            phase = apq / mag
            tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            if tau >= 0.0:
                t = 1.0 / (tau + sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
            c = 1.0 / sqrt(1.0 + t * t)
            s = t * c
            sp = s * phase
            spc = sp.conjugate()

            for r in range(n):
                xp = a[r, p]
                xq = a[r, q]
                a[r, p] = c * xp - spc * xq
                a[r, q] = sp * xp + c * xq
            for r in range(n):
                xp = a[p, r]
                xq = a[q, r]
                a[p, r] = c * xp - sp * xq
                a[q, r] = spc * xp + c * xq
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real

            for r in range(n):
                xp = v[r, p]
                xq = v[r, q]
                v[r, p] = c * xp - spc * xq
                v[r, q] = sp * xp + c * xq
    return rotations


def star2d_anchored(xs_in, ys_in):
    """Exact anchored star discrepancy of 2-D points (O(N^2) corner sweep)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs_arr = np.ascontiguousarray(xs_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ys_arr = np.ascontiguousarray(ys_in, dtype=np.float64)
    cdef Py_ssize_t n = xs_arr.shape[0]
    if n == 0:
        raise ValueError("empty point set")
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.argsort(xs_arr, kind="stable")
    xs_arr = np.ascontiguousarray(xs_arr[order])
    ys_arr = np.ascontiguousarray(ys_arr[order])
    cdef double[::1] xs = xs_arr
    cdef double[::1] ys = ys_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(n, dtype=np.float64)
    cdef double[::1] prefix = buf
    cdef double inv_n = 1.0 / n
    cdef Py_ssize_t size = 0
    cdef double best = 0.0, u, val, y, uy
    cdef Py_ssize_t i = 0, j, t, lo, hi, mid, pos, r
    cdef int bound
    while i < n:
        u = xs[i]
        j = i
        while j < n and xs[j] == u:
            j += 1
        for bound in range(2):
            if bound:
                for t in range(i, j):
                    y = ys[t]
                    lo = 0
                    hi = size
                    while lo < hi:
                        mid = (lo + hi) >> 1
                        if prefix[mid] < y:
                            lo = mid + 1
                        else:
                            hi = mid
                    pos = lo
                    if pos < size:
                        memmove(&prefix[pos + 1], &prefix[pos], (size - pos) * sizeof(double))
                    prefix[pos] = y
                    size += 1
            val = fabs(size * inv_n - u)
            if val > best:
                best = val
            for r in range(size):
                uy = u * prefix[r]
                val = fabs(r * inv_n - uy)
                if val > best:
                    best = val
                val = fabs((r + 1) * inv_n - uy)
                if val > best:
                    best = val
        i = j
    for r in range(n):
        val = fabs(r * inv_n - prefix[r])
        if val > best:
            best = val
        val = fabs((r + 1) * inv_n - prefix[r])
        if val > best:
            best = val
    return best
