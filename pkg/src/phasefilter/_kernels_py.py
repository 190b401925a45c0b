"""Pure-Python implementations of the hot kernels.

These mirror the compiled extension in ``_kernels.pyx`` function for
function.  They exist so the package works without a C compiler; the
compiled module is preferred at import time (see ``backend.py``).  All
routines operate on C-contiguous ``complex128`` / ``float64`` arrays and
are single threaded, so results are deterministic for fixed inputs.
"""

from __future__ import annotations

import math

import numpy as np


def matmul_naive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Triple-loop matrix product, the reference semantics for all strategies."""
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    a_rows = a.tolist()
    b_rows = b.tolist()
    out = np.empty((m, n), dtype=np.complex128)
    for i in range(m):
        ai = a_rows[i]
        acc = [0j] * n
        for t in range(k):
            av = ai[t]
            bt = b_rows[t]
            for j in range(n):
                acc[j] += av * bt[j]
        out[i, :] = acc
    return out


def matmul_blocked(a: np.ndarray, b: np.ndarray, block: int = 64) -> np.ndarray:
    """Cache-blocked product; accumulates block panels in k-ascending order."""
    m, k = a.shape
    _, n = b.shape
    out = np.zeros((m, n), dtype=np.complex128)
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        for k0 in range(0, k, block):
            k1 = min(k0 + block, k)
            a_blk = a[i0:i1, k0:k1]
            for j0 in range(0, n, block):
                j1 = min(j0 + block, n)
                out[i0:i1, j0:j1] += a_blk @ b[k0:k1, j0:j1]
    return out


def jacobi_sweep(a: np.ndarray, v: np.ndarray, skip: float) -> int:
    """One cyclic sweep of two-sided complex Jacobi rotations, in place.

    ``a`` is Hermitian; ``v`` accumulates the rotations (``v @ R``).
    Off-diagonal entries with magnitude at most ``skip`` are left alone.
    Returns the number of rotations applied.
    """
    n = a.shape[0]
    rotations = 0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            mag = abs(apq)
            # The 1e-150 floor keeps 1/mag finite; anything that small is
            # numerically zero at every scale this solver is used at.
            if mag <= skip or mag < 1e-150:
                continue
            rotations += 1
            phase = apq / mag
            tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            if tau >= 0.0:
                t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            sp = s * phase
            spc = sp.conjugate()

            col_p = a[:, p].copy()
            col_q = a[:, q].copy()
            a[:, p] = c * col_p - spc * col_q
            a[:, q] = sp * col_p + c * col_q
            row_p = a[p, :].copy()
            row_q = a[q, :].copy()
            a[p, :] = c * row_p - sp * row_q
            a[q, :] = spc * row_p + c * row_q
            # Pin the analytically known entries to kill rounding drift.
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = complex(a[p, p].real, 0.0)
            a[q, q] = complex(a[q, q].real, 0.0)

            vcol_p = v[:, p].copy()
            vcol_q = v[:, q].copy()
            v[:, p] = c * vcol_p - spc * vcol_q
            v[:, q] = sp * vcol_p + c * vcol_q
    return rotations


def star2d_anchored(xs: np.ndarray, ys: np.ndarray) -> float:
    """Exact anchored star discrepancy of 2-D points, by corner enumeration.

    Boxes are [0, v1) x [0, v2); the supremum over v is attained in the
    limit at corners drawn from the data coordinates (plus 1.0).  The sweep
    visits x-levels in increasing order maintaining the y-sorted prefix,
    which gives the classical O(N^2) enumeration.
    """
    n = xs.shape[0]
    if n == 0:
        raise ValueError("empty point set")
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    ys = ys[order]
    inv_n = 1.0 / n

    prefix = np.empty(n, dtype=np.float64)
    size = 0
    best = 0.0
    i = 0
    while i < n:
        u = xs[i]
        j = i
        while j < n and xs[j] == u:
            j += 1
        # v1 = u with the strict prefix {x < u}, then v1 -> u+ with {x <= u}.
        for bound in (0, 1):
            if bound:
                for t in range(i, j):
                    pos = int(np.searchsorted(prefix[:size], ys[t]))
                    prefix[pos + 1 : size + 1] = prefix[pos:size]
                    prefix[pos] = ys[t]
                    size += 1
            q = prefix[:size]
            cand = abs(size * inv_n - u)
            if cand > best:
                best = cand
            if size:
                ranks = np.arange(size, dtype=np.float64)
                lo = np.abs(ranks * inv_n - u * q).max()
                hi = np.abs((ranks + 1.0) * inv_n - u * q).max()
                if lo > best:
                    best = lo
                if hi > best:
                    best = hi
        i = j
    # Final corner v1 = 1.0 with every point inside the x-range.
    q = prefix[:n]
    ranks = np.arange(n, dtype=np.float64)
    best = max(
        best,
        abs(1.0 - 1.0),
        np.abs(ranks * inv_n - q).max(),
        np.abs((ranks + 1.0) * inv_n - q).max(),
    )
    return float(best)


__all__ = [
    "matmul_naive",
    "matmul_blocked",
    "jacobi_sweep",
    "star2d_anchored",
]
