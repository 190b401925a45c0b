"""Seeded randomness: Haar vectors, Gaussian perturbations, inverse CDF.

All sampling goes through :class:`RngHandle`, a thin wrapper over a
counter-based generator (Philox) so that a given seed reproduces the same
stream on every platform.  Handles are cheap to derive: ``child(i)`` gives
an independent stream for worker ``i`` without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .linalg import HermitianInput

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: gaussian_inverse_cdf accuracy is limited by double-precision erf.
MAX_CDF_BITS = 48


@dataclass(frozen=True)
class RngHandle:
    """A seeded, deterministic random stream.

    Equal ``(seed, spawn_key)`` pairs produce bitwise-identical streams.
    A handle is single-owner: never share one across threads — derive a
    child per worker instead.
    """

    seed: int
    spawn_key: tuple = ()
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=tuple(self.spawn_key))
        object.__setattr__(self, "_generator", np.random.Generator(np.random.Philox(ss)))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def child(self, index: int) -> "RngHandle":
        """Independent stream ``index`` derived from this handle's identity."""
        if not isinstance(index, (int, np.integer)) or index < 0:
            raise DomainError(f"child index must be a nonnegative integer, got {index!r}")
        return RngHandle(self.seed, tuple(self.spawn_key) + (int(index),))


@dataclass(frozen=True)
class PerturbationSpec:
    """Noise scale ``epsilon ** exponent`` for the random Hermitian kicks."""

    epsilon: float
    exponent: int

    def __post_init__(self):
        if not (isinstance(self.epsilon, float) and 0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must be a float in (0, 1), got {self.epsilon!r}")
        if not isinstance(self.exponent, (int, np.integer)) or self.exponent < 2:
            raise DomainError(f"exponent must be an integer >= 2, got {self.exponent!r}")
        if self.epsilon**self.exponent == 0.0:
            raise DomainError(
                f"epsilon**exponent underflows to zero ({self.epsilon}**{self.exponent})"
            )

    @property
    def scale(self) -> float:
        return self.epsilon ** int(self.exponent)


def haar_unit_vector(n: int, rng: RngHandle) -> np.ndarray:
    """Unit vector drawn from the rotation-invariant distribution on C^n.

    Normalizes an i.i.d. standard complex Gaussian vector, which gives the
    unique unitarily invariant law on the sphere.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    g = rng.generator
    while True:
        z = g.standard_normal((int(n), 2))
        v = z[:, 0] + 1j * z[:, 1]
        norm = float(np.linalg.norm(v))
        if norm > 1e-150:
            return v / norm


def gaussian_hermitian(n: int, rng: RngHandle) -> np.ndarray:
    """``G + G†`` for ``G`` with i.i.d. standard complex Gaussian entries.

    Standard complex Gaussian means ``X + 1j*Y`` with X, Y independent real
    N(0, 1), so diagonal entries of the output are real N(0, 4) and
    off-diagonal entries have conjugate symmetry exactly (IEEE addition
    commutes with conjugation entry by entry).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    z = rng.generator.standard_normal((int(n), int(n), 2))
    g = z[:, :, 0] + 1j * z[:, :, 1]
    return g + g.conj().T


def perturb(a: HermitianInput, spec: PerturbationSpec, rng: RngHandle) -> HermitianInput:
    """Add the random Hermitian kick ``epsilon**exponent * (G + G†)``.

    The result stays exactly Hermitian.  Its ``norm_bound`` grows by the
    realized noise norm, its ``separation`` shrinks by twice that norm
    (eigenvalues move by at most the perturbation's spectral norm), and
    ``perturbation_norm`` records the realized norm for diagnostics.
    """
    noise = spec.scale * gaussian_hermitian(a.n, rng)
    realized = float(np.linalg.norm(noise, 2))
    m = a.matrix + noise
    m.setflags(write=False)
    sep = None if a.separation is None else max(a.separation - 2.0 * realized, 0.0)
    return HermitianInput(m, a.norm_bound + realized, sep, realized)


def gaussian_cdf(x: float) -> float:
    """Standard Gaussian CDF via erf."""
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def _gaussian_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def gaussian_inverse_cdf(z: float, bits: int) -> float:
    """Solve ``Phi(x) = z`` so that ``|Phi(result) - z| <= 2**-bits``.

    Newton iteration on the erf-based CDF, safeguarded by bisection on a
    bracketing interval.  ``bits`` beyond 48 would promise more accuracy
    than double-precision erf delivers and is rejected.
    """
    if not (isinstance(z, float) and 0.0 < z < 1.0):
        raise DomainError(f"z must be a float in (0, 1), got {z!r}")
    if not isinstance(bits, (int, np.integer)) or not 1 <= bits <= MAX_CDF_BITS:
        raise DomainError(f"bits must be an integer in [1, {MAX_CDF_BITS}], got {bits!r}")
    tol = 2.0 ** -int(bits)

    # Abramowitz-Stegun style rational start, then Newton.
    zz = min(z, 1.0 - z)
    t = math.sqrt(-2.0 * math.log(zz))
    x = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t)
    if z < 0.5:
        x = -x

    lo, hi = -40.0, 40.0
    for _ in range(200):
        err = gaussian_cdf(x) - z
        if abs(err) <= tol:
            return x
        if err > 0.0:
            hi = min(hi, x)
        else:
            lo = max(lo, x)
        pdf = _gaussian_pdf(x)
        if pdf > 0.0:
            step = err / pdf
            nxt = x - step
        else:
            nxt = math.inf
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        x = nxt
    err = gaussian_cdf(x) - z
    if abs(err) <= tol:
        return x
    raise DomainError(f"inverse CDF did not reach 2^-{bits} accuracy at z={z!r}")
