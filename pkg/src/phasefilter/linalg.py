"""Dense complex linear algebra used by the phase-estimation filter.

Everything here operates on ``complex128`` numpy arrays.  Vectors are 1-D
arrays, matrices are C-contiguous 2-D arrays.  The three matrix-product
strategies share one contract (they agree to within a small multiple of
machine epsilon) so the product backend stays pluggable; the ``naive``
strategy is the reference semantics the other two are tested against.

All routines are single threaded and deterministic: the same inputs give
bitwise-identical outputs on a fixed platform regardless of context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import DomainError, ScaleError, ShapeError

#: Largest value of ``|scale| * norm(a)`` accepted by :func:`taylor_exp`.
MAX_EXP_NORM = 8.0

#: Matrix dimensions strictly below this use the naive kernel inside Strassen.
STRASSEN_CUTOVER = 64

_HERMITIAN_TOL = 1e-12
_PSD_TOL = -1e-10


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D complex128 array or raise ShapeError."""
    arr = np.ascontiguousarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ShapeError(f"{name} must be a nonempty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array or raise ShapeError."""
    arr = np.ascontiguousarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def as_square(m, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    return arr


def operator_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(as_matrix(m), 2))


@dataclass(frozen=True)
class PrecisionBudget:
    """Fixed-point working precision for the bit-budget experiments.

    ``bits`` is the number of fractional bits kept after each matrix
    product; entries are rounded to the nearest multiple of ``2**-bits``
    with ties to even.
    """

    bits: int

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 8:
            raise DomainError(f"precision budget needs at least 8 bits, got {self.bits}")


@dataclass(frozen=True)
class HermitianInput:
    """A validated Hermitian PSD matrix plus the metadata the filter needs.

    ``norm_bound`` is an upper bound on the spectral norm and ``separation``
    is the smallest circular distance between the fractional parts of two
    eigenvalues (``None`` when not declared and not measured).  The stored
    matrix is exactly Hermitian: construction replaces ``m`` with
    ``(m + m†)/2`` after checking the asymmetry is within tolerance.
    ``perturbation_norm`` is a diagnostic set on matrices produced by
    ``randomness.perturb``: the spectral norm of the noise actually added.
    """

    matrix: np.ndarray
    norm_bound: float
    separation: float | None = None
    perturbation_norm: float | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def create(
        cls,
        matrix,
        norm_bound: float | None = None,
        separation: float | None = None,
        validate_spectrum: bool | None = None,
    ) -> "HermitianInput":
        """Validate and wrap ``matrix``.

        Spectrum validation (positive semidefiniteness plus the measured
        separation) runs the brute-force eigensolver, so by default it is
        only performed at oracle scale (n <= 64); above that the caller's
        declared separation is trusted.
        """
        m = as_square(matrix)
        n = m.shape[0]
        asym = np.abs(m - m.conj().T).max()
        if asym > _HERMITIAN_TOL:
            raise DomainError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
        m = (m + m.conj().T) * 0.5
        m.setflags(write=False)

        computed_norm = float(np.linalg.norm(m, 2))
        if norm_bound is None:
            norm_bound = computed_norm
        elif norm_bound < computed_norm * (1.0 - 1e-12):
            raise DomainError(
                f"declared norm bound {norm_bound} is below the actual norm {computed_norm}"
            )

        if validate_spectrum is None:
            validate_spectrum = n <= 64
        if validate_spectrum:
            from .oracle import jacobi_eigh, measure_separation

            unchecked = cls(m, float(norm_bound), None)
            decomp = jacobi_eigh(unchecked)
            lo = decomp.eigenvalues.min()
            if lo < _PSD_TOL:
                raise DomainError(f"matrix is not PSD (min eigenvalue {lo:.3e})")
            measured = measure_separation(decomp)
            if separation is not None and separation > measured + 1e-9:
                raise DomainError(
                    f"declared separation {separation} exceeds the measured value {measured:.3e}"
                )
            separation = measured
        return cls(m, float(norm_bound), separation)


def _pad_even(m: np.ndarray) -> np.ndarray:
    r = m.shape[0] + (m.shape[0] & 1)
    c = m.shape[1] + (m.shape[1] & 1)
    if (r, c) == m.shape:
        return m
    out = np.zeros((r, c), dtype=np.complex128)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def _strassen(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, k = a.shape
    n = b.shape[1]
    if max(m, k, n) < STRASSEN_CUTOVER:
        return kernels.matmul_naive(a, b)
    a = _pad_even(a)
    b = _pad_even(b)
    h1, h2 = a.shape[0] // 2, a.shape[1] // 2
    h3 = b.shape[1] // 2
    a11, a12 = a[:h1, :h2], a[:h1, h2:]
    a21, a22 = a[h1:, :h2], a[h1:, h2:]
    b11, b12 = b[:h2, :h3], b[:h2, h3:]
    b21, b22 = b[h2:, :h3], b[h2:, h3:]

    p1 = _strassen(np.ascontiguousarray(a11 + a22), np.ascontiguousarray(b11 + b22))
    p2 = _strassen(np.ascontiguousarray(a21 + a22), np.ascontiguousarray(b11))
    p3 = _strassen(np.ascontiguousarray(a11), np.ascontiguousarray(b12 - b22))
    p4 = _strassen(np.ascontiguousarray(a22), np.ascontiguousarray(b21 - b11))
    p5 = _strassen(np.ascontiguousarray(a11 + a12), np.ascontiguousarray(b22))
    p6 = _strassen(np.ascontiguousarray(a21 - a11), np.ascontiguousarray(b11 + b12))
    p7 = _strassen(np.ascontiguousarray(a12 - a22), np.ascontiguousarray(b21 + b22))

    out = np.empty((a.shape[0], b.shape[1]), dtype=np.complex128)
    out[:h1, :h3] = p1 + p4 - p5 + p7
    out[:h1, h3:] = p3 + p5
    out[h1:, :h3] = p2 + p4
    out[h1:, h3:] = p1 - p2 + p3 + p6
    return np.ascontiguousarray(out[:m, :n])


MATMUL_STRATEGIES = ("naive", "blocked", "strassen")


def matmul(a, b, strategy: str = "blocked") -> np.ndarray:
    """Dense complex matrix product under the selected strategy.

    ``naive`` is the literal triple loop, ``blocked`` the cache-friendly
    variant, and ``strassen`` the seven-product recursion that cuts over to
    the naive kernel below 64x64.  All three agree within a small multiple
    of machine epsilon times ``norm(a) * norm(b)``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions mismatch: {a.shape} x {b.shape}")
    if strategy == "naive":
        return kernels.matmul_naive(a, b)
    if strategy == "blocked":
        return kernels.matmul_blocked(a, b)
    if strategy == "strassen":
        return _strassen(a, b)
    raise DomainError(f"unknown matmul strategy {strategy!r}")


def power_by_squaring(
    u,
    exponent: int,
    strategy: str = "blocked",
    budget: PrecisionBudget | None = None,
) -> np.ndarray:
    """``u`` raised to a nonnegative integer power in O(log exponent) products.

    With a precision budget, every intermediate product is truncated to the
    budgeted number of fractional bits, mirroring fixed-point arithmetic.
    """
    u = as_square(u, "u")
    if not isinstance(exponent, (int, np.integer)) or exponent < 0:
        raise DomainError(f"exponent must be a nonnegative integer, got {exponent!r}")
    result = np.eye(u.shape[0], dtype=np.complex128)
    base = u
    e = int(exponent)
    while e:
        if e & 1:
            result = matmul(result, base, strategy)
            if budget is not None:
                result = truncate(result, budget)
        e >>= 1
        if e:
            base = matmul(base, base, strategy)
            if budget is not None:
                base = truncate(base, budget)
    return result


def taylor_tail_bound(norm_cx: float, terms: int) -> float:
    """Upper bound on ``sum_{m >= terms} x^m / m!`` for ``x = norm_cx >= 0``."""
    if norm_cx < 0:
        raise DomainError("norm must be nonnegative")
    if norm_cx == 0.0:
        return 0.0
    head = terms * math.log(norm_cx) - math.lgamma(terms + 1)
    ratio = norm_cx / (terms + 1.0)
    if ratio < 1.0:
        geo = math.exp(head) / (1.0 - ratio)
    else:
        geo = math.inf
    return min(geo, math.exp(norm_cx))


def terms_for_tail(norm_cx: float, target: float, max_terms: int = 600) -> int:
    """Smallest term count whose truncation tail bound is at most ``target``."""
    if target <= 0:
        raise DomainError("tail target must be positive")
    s = 2
    while s <= max_terms:
        if taylor_tail_bound(norm_cx, s) <= target:
            return s
        s += 1
    raise ScaleError(
        f"no term count up to {max_terms} reaches tail {target:.3e} at norm {norm_cx:.3f}"
    )


def taylor_exp(a, terms: int, scale: float = 2.0 * math.pi, strategy: str = "blocked") -> np.ndarray:
    """Truncated Taylor series for ``exp(1j * scale * a)``.

    Evaluates ``sum_{m < terms} (1j * scale * a)^m / m!`` by Horner's rule,
    which costs ``terms - 1`` matrix products and never materialises a
    factorial.  Requires ``|scale| * norm(a) <= 8``; the truncation error is
    bounded by :func:`taylor_tail_bound` at ``|scale| * norm(a)``.
    """
    if isinstance(a, HermitianInput):
        m = a.matrix
        bound = a.norm_bound
    else:
        m = as_square(a, "a")
        bound = float(np.linalg.norm(m, 2))
    if not isinstance(terms, (int, np.integer)) or terms < 1:
        raise DomainError(f"terms must be a positive integer, got {terms!r}")
    scaled = abs(scale) * bound
    if scaled > MAX_EXP_NORM:
        raise DomainError(
            f"|scale| * norm = {scaled:.3f} exceeds the supported limit {MAX_EXP_NORM}"
        )
    n = m.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    x = (1j * scale) * m
    acc = eye.copy()
    for k in range(int(terms) - 1, 0, -1):
        acc = eye + matmul(x, acc, strategy) / k
    return acc


def filter_step(v, uv):
    """One phase-estimation filter step.

    Given a state ``v`` and its image ``uv = U^m v``, returns the pair
    ``w0 = (v + uv)/2`` and ``w1 = (v - uv)/2``.  Norms satisfy
    ``|w0|^2 + |w1|^2 = (|v|^2 + |uv|^2)/2`` exactly in exact arithmetic.
    Accepts vectors or matrices (columns filtered independently).
    """
    v = np.ascontiguousarray(v, dtype=np.complex128)
    uv = np.ascontiguousarray(uv, dtype=np.complex128)
    if v.shape != uv.shape:
        raise ShapeError(f"state and image shapes differ: {v.shape} vs {uv.shape}")
    if v.ndim not in (1, 2) or v.size == 0:
        raise ShapeError(f"state must be a nonempty vector or matrix, got shape {v.shape}")
    if not (np.all(np.isfinite(v.view(np.float64))) and np.all(np.isfinite(uv.view(np.float64)))):
        raise DomainError("filter input contains non-finite entries")
    w0 = (v + uv) * 0.5
    w1 = (v - uv) * 0.5
    return w0, w1


def truncate(m, budget) -> np.ndarray:
    """Round real and imaginary parts to the budgeted fractional bits.

    ``budget`` is a PrecisionBudget or a bare positive bit count (handy for
    one-off roundings below the budget type's 8-bit floor).  Rounding is to
    the nearest multiple of ``2**-bits`` with ties to even; at 53 bits and
    beyond it is the identity on double-precision data with entries in
    [-1, 1].  For an n x n unitary the perturbation has spectral norm at
    most ``sqrt(n) * 2**-bits``.
    """
    arr = np.asarray(m, dtype=np.complex128)
    bits = budget.bits if isinstance(budget, PrecisionBudget) else budget
    if not isinstance(bits, (int, np.integer)) or bits < 1:
        raise DomainError(f"bit count must be a positive integer, got {bits!r}")
    if bits >= 1024:
        return arr.copy()
    scale = float(2 ** int(bits))
    return (np.round(arr.real * scale) + 1j * np.round(arr.imag * scale)) / scale
