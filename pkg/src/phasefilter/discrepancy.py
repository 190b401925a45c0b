"""Fractional-part sequences and how uniformly they fill the unit box.

The measurements here quantify "looks like i.i.d. uniform draws" for the
deterministic sequences the filter's phase arithmetic produces: multiples
of a lattice vector mod 1, and multiples of (perturbed) eigenvalues.

Two box conventions appear throughout.  ``anchored`` boxes are
``[0, v_1) x ... x [0, v_s)``; ``free`` boxes are arbitrary products of
subintervals.  The free-box supremum is what the theory works with, the
anchored one is what is cheap to compute exactly; they differ by at most a
factor ``2**s`` (inclusion-exclusion of at most 2^s anchored corners per
free box), so either serves as a uniformity certificate up to a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import DomainError, ScaleError, ShapeError, UnsupportedScaleError
from .randomness import PerturbationSpec, RngHandle

#: Exact star discrepancy cost is O(N log N) in 1-D and O(N^2) in 2-D;
#: these caps keep worst-case runs in the seconds range.
EXACT_LIMIT_1D = 1_000_000
EXACT_LIMIT_2D = 16_384

#: Largest modulus accepted by multiples_sequence (also a memory bound).
MAX_MODULUS = 2**31

BOX_FAMILIES = ("anchored", "free")


@dataclass(frozen=True)
class FracSequence:
    """N points in [0,1)^s, stored as an (N, s) float array."""

    points: np.ndarray

    @classmethod
    def create(cls, points) -> "FracSequence":
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ShapeError(f"points must form a nonempty (N, s) array, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points contain non-finite coordinates")
        if pts.min() < 0.0 or pts.max() >= 1.0:
            raise DomainError("coordinates must lie in [0, 1)")
        pts.setflags(write=False)
        return cls(pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class SequenceReport:
    """A uniformity measurement attached to the sequence it describes."""

    sequence: FracSequence
    discrepancy_estimate: float
    estimate_kind: str
    r_sum: float | None = None

    def __post_init__(self):
        if self.estimate_kind not in ("exact", "monte-carlo-lower-bound"):
            raise DomainError(f"unknown estimate kind {self.estimate_kind!r}")
        if not 0.0 <= self.discrepancy_estimate <= 1.0:
            raise DomainError(
                f"discrepancy must lie in [0, 1], got {self.discrepancy_estimate!r}"
            )


def multiples_sequence(g, modulus: int) -> FracSequence:
    """The lattice sequence ``frac(g * n / modulus)`` for ``n = 0..modulus-1``.

    Products are taken in exact integer arithmetic (``g`` is reduced mod
    ``modulus`` first), so coordinates are exact rationals over ``modulus``.
    """
    gv = np.atleast_1d(np.asarray(g, dtype=np.int64))
    if gv.ndim != 1 or gv.size == 0:
        raise ShapeError(f"g must be a nonempty integer vector, got shape {gv.shape}")
    if not isinstance(modulus, (int, np.integer)) or not 2 <= modulus <= MAX_MODULUS:
        raise DomainError(f"modulus must be an integer in [2, {MAX_MODULUS}], got {modulus!r}")
    m = int(modulus)
    gv = np.mod(gv, m)
    n = np.arange(m, dtype=np.int64)
    prods = np.mod(n[:, None] * gv[None, :], m)
    return FracSequence.create(prods.astype(np.float64) / m)


def eigen_multiples_sequence(lambdas, m_count: int) -> FracSequence:
    """Points ``(frac(m*lambda_1), ..., frac(m*lambda_s))`` for ``m = 0..m_count-1``."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=np.float64))
    if lam.ndim != 1 or lam.size == 0:
        raise ShapeError(f"lambdas must be a nonempty real vector, got shape {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise DomainError("lambdas contain non-finite values")
    if not isinstance(m_count, (int, np.integer)) or m_count < 1:
        raise DomainError(f"m_count must be a positive integer, got {m_count!r}")
    m = np.arange(int(m_count), dtype=np.float64)
    pts = np.mod(m[:, None] * lam[None, :], 1.0)
    # mod can round a tiny negative input up to exactly 1.0; that is the
    # same circle point as 0.
    pts[pts >= 1.0] = 0.0
    return FracSequence.create(pts)


def shift_mod1(seq: FracSequence, offset) -> FracSequence:
    """Translate every point by ``offset`` modulo 1 (per coordinate)."""
    off = np.asarray(offset, dtype=np.float64)
    pts = np.mod(seq.points + off, 1.0)
    pts[pts >= 1.0] = 0.0
    return FracSequence.create(pts)


def _star1d_anchored(x: np.ndarray) -> float:
    n = x.shape[0]
    xs = np.sort(x)
    k = np.arange(1, n + 1, dtype=np.float64)
    over = (k / n - xs).max()
    under = (xs - (k - 1.0) / n).max()
    return float(max(over, under, 0.0))


def _star1d_free(x: np.ndarray) -> float:
    # Over all subintervals the supremum splits into the best surplus plus
    # the best deficit of the anchored deviation function.
    n = x.shape[0]
    xs = np.sort(x)
    k = np.arange(1, n + 1, dtype=np.float64)
    surplus = max(0.0, float((k / n - xs).max()))
    deficit = max(0.0, float((xs - (k - 1.0) / n).max()))
    return min(surplus + deficit, 1.0)


def star_discrepancy_exact(seq: FracSequence, boxes: str = "anchored") -> float:
    """Exact star discrepancy by enumerating critical boxes.

    ``boxes="anchored"`` is the corner family [0, v); the supremum is
    attained at data coordinates, giving the sorted-points formula in 1-D
    and an O(N^2) corner sweep in 2-D.  ``boxes="free"`` (all subintervals,
    the family the theory states its bounds for) is available in 1-D.
    Beyond these sizes and dimensions, use :func:`star_discrepancy_mc`.
    """
    if boxes not in BOX_FAMILIES:
        raise DomainError(f"boxes must be one of {BOX_FAMILIES}, got {boxes!r}")
    s = seq.dim
    n = seq.n
    if s == 1:
        if n > EXACT_LIMIT_1D:
            raise UnsupportedScaleError(f"exact 1-D discrepancy capped at N={EXACT_LIMIT_1D}")
        col = seq.points[:, 0]
        return _star1d_anchored(col) if boxes == "anchored" else _star1d_free(col)
    if s == 2:
        if boxes == "free":
            raise UnsupportedScaleError("free-box exact discrepancy is 1-D only")
        if n > EXACT_LIMIT_2D:
            raise UnsupportedScaleError(f"exact 2-D discrepancy capped at N={EXACT_LIMIT_2D}")
        return float(kernels.star2d_anchored(seq.points[:, 0].copy(), seq.points[:, 1].copy()))
    raise UnsupportedScaleError(f"exact discrepancy supports s <= 2, got s={s}")


def star_discrepancy_mc(
    seq: FracSequence, trials: int, rng: RngHandle, boxes: str = "anchored"
) -> float:
    """Lower bound on the star discrepancy from random candidate boxes.

    Takes the max of ``|empirical fraction - volume|`` over ``trials``
    boxes drawn from the chosen family.  Never exceeds the exact value for
    the same family, and is nondecreasing in ``trials`` for a fixed stream.
    """
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    if boxes not in BOX_FAMILIES:
        raise DomainError(f"boxes must be one of {BOX_FAMILIES}, got {boxes!r}")
    pts = seq.points
    n, s = pts.shape
    g = rng.generator
    if boxes == "anchored":
        corners = g.uniform(size=(int(trials), s))
        best = 0.0
        for v in corners:
            frac = float(np.all(pts < v, axis=1).mean())
            best = max(best, abs(frac - float(np.prod(v))))
        return best
    edges = g.uniform(size=(int(trials), 2, s))
    best = 0.0
    for pair in edges:
        lo = np.minimum(pair[0], pair[1])
        hi = np.maximum(pair[0], pair[1])
        inside = np.all((pts >= lo) & (pts < hi), axis=1)
        best = max(best, abs(float(inside.mean()) - float(np.prod(hi - lo))))
    return best


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_VALID_BELOW = 3_317_044_064_679_887_385_961_981


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n below 3.3e24."""
    if not isinstance(n, (int, np.integer)):
        raise DomainError(f"primality test needs an integer, got {n!r}")
    n = int(n)
    if n >= _MR_VALID_BELOW:
        raise UnsupportedScaleError(f"witness set only certifies n < {_MR_VALID_BELOW}")
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n == w:
            return True
        if n % w == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def choose_modulus(epsilon: float, l: int):
    """Least prime ``p >= epsilon**(-l/2)`` and the modulus ``M = p**3``.

    Returns ``(M, p)``.  Raises ScaleError when M would exceed 2**62 (the
    caller must raise epsilon); the construction guarantees
    ``epsilon**(-1.5*l) <= M``.
    """
    if not (isinstance(epsilon, float) and 0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must be a float in (0, 1), got {epsilon!r}")
    if not isinstance(l, (int, np.integer)) or l < 1:
        raise DomainError(f"l must be a positive integer, got {l!r}")
    threshold = epsilon ** (-0.5 * float(l))
    if not math.isfinite(threshold) or threshold >= 2.0**62:
        raise ScaleError(f"modulus for epsilon={epsilon}, l={l} overflows the 2^62 budget")
    p = max(2, math.ceil(threshold))
    while not is_prime(p):
        p += 1
    m = p**3
    if m > 2**62:
        raise ScaleError(f"modulus {m} exceeds the 2^62 budget; raise epsilon")
    return m, p


def niederreiter_r_sum(g, modulus: int, cutoff: int = 5_000_000) -> float:
    """The dual-lattice figure of merit ``R(g, P)``.

    Sums ``1 / prod_i max(1, |h_i|)`` over nonzero integer vectors ``h``
    with entries in ``[-P/2, P/2)`` satisfying ``h . g == 0 (mod P)``.
    Full enumeration costs O(P^s); ``cutoff`` bounds the number of vectors
    visited before the call is refused.
    """
    gv = np.atleast_1d(np.asarray(g, dtype=np.int64))
    if gv.ndim != 1 or gv.size == 0:
        raise ShapeError(f"g must be a nonempty integer vector, got shape {gv.shape}")
    if not isinstance(modulus, (int, np.integer)) or modulus < 1:
        raise DomainError(f"modulus must be a positive integer, got {modulus!r}")
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 1:
        raise DomainError(f"cutoff must be a positive integer, got {cutoff!r}")
    s = gv.size
    p = int(modulus)
    if s > 3 or p > 512 or p**s > int(cutoff):
        raise UnsupportedScaleError(
            f"R(g,P) enumeration needs s <= 3, P <= 512 and P^s <= cutoff; "
            f"got s={s}, P={p}, cutoff={int(cutoff)}"
        )
    gv = np.mod(gv, p)
    hs = np.arange(-(p // 2), p - p // 2, dtype=np.int64)
    inv_r = 1.0 / np.maximum(1, np.abs(hs)).astype(np.float64)
    zero_at = p // 2  # index of h = 0 in hs

    if s == 1:
        ok = np.mod(hs * gv[0], p) == 0
        ok[zero_at] = False
        return float(inv_r[ok].sum())
    if s == 2:
        dots = np.mod(hs[:, None] * gv[0] + hs[None, :] * gv[1], p)
        ok = dots == 0
        ok[zero_at, zero_at] = False
        w = inv_r[:, None] * inv_r[None, :]
        return float(w[ok].sum())
    total = 0.0
    pair = np.mod(hs[:, None] * gv[1] + hs[None, :] * gv[2], p)
    w = inv_r[:, None] * inv_r[None, :]
    for i, h1 in enumerate(hs):
        ok = np.mod(pair + h1 * gv[0], p) == 0
        if h1 == 0:
            ok[zero_at, zero_at] = False
        total += inv_r[i] * float(w[ok].sum())
    return total


def pseudorandomness_trial(
    lambdas,
    spec: PerturbationSpec | None,
    m_count: int,
    s: int,
    rng: RngHandle,
    mc_trials: int = 2000,
) -> SequenceReport:
    """Perturb eigenvalues, build their multiples sequence, measure uniformity.

    Each coordinate gets independent Gaussian noise of standard deviation
    ``epsilon**exponent`` (``spec=None`` means no perturbation, the
    degenerate control case).  The discrepancy is exact when the scale
    permits, otherwise the Monte Carlo lower bound.
    """
    lam = np.atleast_1d(np.asarray(lambdas, dtype=np.float64))
    if lam.size != s:
        raise ShapeError(f"expected {s} eigenvalues, got {lam.size}")
    if spec is not None:
        lam = lam + spec.scale * rng.generator.standard_normal(lam.size)
    seq = eigen_multiples_sequence(lam, m_count)
    try:
        value = star_discrepancy_exact(seq)
        kind = "exact"
    except UnsupportedScaleError:
        value = star_discrepancy_mc(seq, mc_trials, rng)
        kind = "monte-carlo-lower-bound"
    return SequenceReport(seq, value, kind)
