"""Brute-force reference eigensolver and eigenvector-matching utilities.

The solver is an independent check on the filtering pipeline, so it shares
no code path with it: cyclic complex Jacobi rotations driven to a fixed
off-diagonal threshold, with nothing imported from the filter modules.
Intended for n <= 64; it works above that but the O(n^3)-per-sweep cost and
the pedestrian kernels make it slow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import DomainError, OracleError, ScaleError, ShapeError
from .linalg import HermitianInput, as_matrix, as_square, as_vector

_MAX_SWEEPS = 100
_OFF_REL_TOL = 1e-13
_HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with matching unit eigenvector columns.

    Each column's phase is fixed so its largest-magnitude entry is real and
    positive, making the decomposition deterministic up to eigenvalue ties.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int
    off_diagonal: float

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _off_norm(a: np.ndarray) -> float:
    # Summed directly over the off-diagonal entries: the tempting
    # ``fro(a)^2 - fro(diag)^2`` shortcut cancels catastrophically once the
    # matrix is nearly diagonal and would floor out around norm(a)*sqrt(eps).
    sq = np.abs(a) ** 2
    np.fill_diagonal(sq, 0.0)
    return math.sqrt(float(sq.sum()))


def jacobi_eigh(h) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Sweeps annihilate each off-diagonal element in turn with a unitary
    2x2 rotation; convergence is declared when the off-diagonal Frobenius
    norm falls below 1e-13 times the input's Frobenius norm.  Raises
    OracleError if 100 sweeps do not get there.
    """
    if isinstance(h, HermitianInput):
        m = h.matrix
    else:
        m = as_square(h, "h")
        asym = np.abs(m - m.conj().T).max()
        if asym > _HERMITIAN_TOL:
            raise DomainError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
        m = (m + m.conj().T) * 0.5
    n = m.shape[0]
    if n > 512:
        raise ScaleError(f"the brute-force oracle is desk-scale only (n <= 512), got {n}")
    a = np.array(m, dtype=np.complex128, order="C", copy=True)
    v = np.eye(n, dtype=np.complex128)

    fro0 = float(np.linalg.norm(a))
    tol = max(_OFF_REL_TOL * fro0, 1e-300)
    skip = tol / (2.0 * n * n)

    off = _off_norm(a)
    sweeps = 0
    while off > tol:
        if sweeps >= _MAX_SWEEPS:
            raise OracleError(
                f"Jacobi failed to converge in {_MAX_SWEEPS} sweeps "
                f"(off-diagonal {off:.3e}, tolerance {tol:.3e})"
            )
        kernels.jacobi_sweep(a, v, skip)
        sweeps += 1
        off = _off_norm(a)

    values = np.diag(a).real.copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = np.ascontiguousarray(v[:, order])
    for j in range(n):
        col = vectors[:, j]
        k = int(np.argmax(np.abs(col)))
        pivot = col[k]
        if abs(pivot) > 0:
            vectors[:, j] = col * (pivot.conjugate() / abs(pivot))
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenDecomposition(values, vectors, sweeps, off)


def oracle_exp(h, scale: float = 2.0 * math.pi) -> np.ndarray:
    """Exact ``exp(1j * scale * h)`` assembled from the Jacobi decomposition."""
    decomp = h if isinstance(h, EigenDecomposition) else jacobi_eigh(h)
    phases = np.exp(1j * scale * decomp.eigenvalues)
    return (decomp.eigenvectors * phases) @ decomp.eigenvectors.conj().T


def phase_distance(x, y) -> float:
    """Distance between vectors minimized over a global phase on ``y``.

    Equals ``min_phi norm(x - e^{1j*phi} * y)``, which is
    ``sqrt(|x|^2 + |y|^2 - 2 |<x, y>|)``.
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"need equal-length vectors, got {x.shape} and {y.shape}")
    nx = float(np.vdot(x, x).real)
    ny = float(np.vdot(y, y).real)
    overlap = abs(np.vdot(x, y))
    return math.sqrt(max(nx + ny - 2.0 * overlap, 0.0))


def _assign_min_cost(cost: np.ndarray) -> list[int]:
    """Minimum-cost assignment of each row to a distinct column (rows <= cols)."""
    k, n = cost.shape
    inf = math.inf
    u = [0.0] * (k + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, k + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    row_to_col = [0] * k
    for j in range(1, n + 1):
        if match[j]:
            row_to_col[match[j] - 1] = j - 1
    return row_to_col


def match_eigenvectors(candidates, decomp: EigenDecomposition):
    """Assign candidate columns to distinct reference eigenvectors.

    Solves the minimum-total-cost assignment under :func:`phase_distance`,
    so two candidates can never claim the same reference column.  Returns
    ``(indices, distances)`` where ``indices[j]`` is the matched eigenvector
    index for candidate column ``j``.
    """
    if isinstance(candidates, np.ndarray) and candidates.ndim == 2:
        cand = as_matrix(candidates, "candidates")
    else:
        # A sequence of vectors stacks as *columns*; np.asarray would lay
        # them out as rows, silently transposing the square case.
        vecs = [as_vector(c, "candidate") for c in candidates]
        if not vecs:
            raise ShapeError("need at least one candidate")
        cand = np.column_stack(vecs)
    if cand.shape[0] != decomp.n:
        raise ShapeError(
            f"candidate length {cand.shape[0]} does not match dimension {decomp.n}"
        )
    if cand.shape[1] > decomp.n:
        raise ShapeError(
            f"more candidates ({cand.shape[1]}) than eigenvectors ({decomp.n})"
        )
    k = cand.shape[1]
    cost = np.empty((k, decomp.n), dtype=np.float64)
    for j in range(k):
        for i in range(decomp.n):
            cost[j, i] = phase_distance(cand[:, j], decomp.eigenvectors[:, i])
    cols = _assign_min_cost(cost)
    indices = np.array(cols, dtype=np.int64)
    distances = cost[np.arange(k), indices]
    return indices, distances


def measure_separation(source) -> float:
    """Smallest circular distance between fractional parts of eigenvalues.

    Accepts an EigenDecomposition or a 1-D array of eigenvalues.  Returns
    0.5 (the largest possible circular distance) when there is a single
    eigenvalue, since no pair constrains the filter.
    """
    if isinstance(source, EigenDecomposition):
        values = source.eigenvalues
    else:
        values = np.ascontiguousarray(source, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ShapeError(f"eigenvalues must be a nonempty 1-D array, got {values.shape}")
    if values.size == 1:
        return 0.5
    frac = np.sort(np.mod(values, 1.0))
    gaps = np.diff(frac)
    wrap = 1.0 - (frac[-1] - frac[0])
    best = float(min(gaps.min(), wrap))
    return min(best, 0.5)
