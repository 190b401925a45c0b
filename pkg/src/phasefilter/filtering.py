"""Filter semantics: bands, the attenuation law, schedules, one inner pass.

A filter step maps ``v`` to ``(v + U^m v)/2``, which scales the component
at eigenphase x by (1 + cos 2*pi*m*x)/2.  Repeated p times and then
renormalized, phases near 0 survive (the pass band B') while phases
outside a wider band B are crushed below delta/n^3.  This module owns the
p/t/M/epsilon bookkeeping that makes those two statements simultaneously
true, plus the single "perturb, exponentiate, power, filter, normalize"
iteration everything else is built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discrepancy import choose_modulus
from .errors import DomainError, FilteredToZeroError, ScaleError
from .linalg import (
    HermitianInput,
    PrecisionBudget,
    as_vector,
    filter_step,
    matmul,
    power_by_squaring,
    taylor_exp,
    terms_for_tail,
    truncate,
)
from .oracle import EigenDecomposition
from .randomness import PerturbationSpec, RngHandle, perturb

#: Half-widths are clamped here when the band formulas exceed it (small n).
MAX_HALF_WIDTH = 0.49

#: States whose norm falls below this during filtering count as annihilated.
UNDERFLOW_FLOOR = 1e-100

BAND_KINDS = ("B", "B-prime")
SCHEDULE_MODES = ("paper-formula", "manual-override")


@dataclass(frozen=True)
class Band:
    """A circular neighborhood of phase 0: pass band B' or stop edge B."""

    half_width: float
    kind: str

    def __post_init__(self):
        if self.kind not in BAND_KINDS:
            raise DomainError(f"band kind must be one of {BAND_KINDS}, got {self.kind!r}")
        if not 0.0 < self.half_width <= 0.5:
            raise DomainError(f"half width must be in (0, 0.5], got {self.half_width!r}")


def stop_band(n: int, a: float) -> Band:
    """The band B with half-width ``1/(2 * ln(n)^a)``, clamped to 0.49."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not a > 0.0:
        raise DomainError(f"band exponent must be positive, got {a!r}")
    hw = 1.0 / (2.0 * math.log(n) ** a)
    return Band(min(hw, MAX_HALF_WIDTH), "B")


def pass_band(n: int, a: float, delta: float) -> Band:
    """The band B' = B shrunk by ``1/sqrt(2 * ln(n^3/delta))``."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1), got {delta!r}")
    b = stop_band(n, a)
    shrink = math.sqrt(2.0 * math.log(n**3 / delta))
    return Band(b.half_width / shrink, "B-prime")


def predicted_attenuation(x: float, p: int) -> float:
    """``((1 + cos(2 pi x)) / 2) ** p``: survival of a component after p steps.

    Survival is in squared-norm units (the projection probability): one
    step takes an eigencomponent's squared magnitude down by exactly
    ``(1 + cos(2 pi x))/2``; amplitudes shrink by the square root of that.
    """
    if not (isinstance(x, (float, np.floating)) and 0.0 <= x < 1.0):
        raise DomainError(f"phase must be a real in [0, 1), got {x!r}")
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise DomainError(f"step count must be a positive integer, got {p!r}")
    base = (1.0 + math.cos(2.0 * math.pi * x)) / 2.0
    return base ** int(p)


def in_band(x: float, band: Band) -> bool:
    """Whether phase ``x`` lies within circular distance half_width of 0."""
    if not (isinstance(x, (float, np.floating)) and 0.0 <= x < 1.0):
        raise DomainError(f"phase must be a real in [0, 1), got {x!r}")
    return min(x, 1.0 - x) <= band.half_width


def repetitions_for_bands(n: int, a: float, delta: float) -> int:
    """Largest p keeping the pass band's worst case at or above 1/e.

    The pass-band edge condition ``cos(pi*h')^(2p) >= 1/e`` gives
    ``p <= 1/(-2 ln cos(pi h'))``; taking the floor maximizes stop-band
    rejection while preserving the 1/e guarantee.  Raises if no p also
    drives phases outside B below ``delta/n^3`` (never at supported
    scales; the two requirements leave roughly a factor-2 window).
    """
    hp = pass_band(n, a, delta).half_width
    hb = stop_band(n, a).half_width
    p = max(1, math.floor(1.0 / (-2.0 * math.log(math.cos(math.pi * hp)))))
    edge = predicted_attenuation(hb, p)
    if edge > delta / n**3:
        raise DomainError(
            f"no repetition count satisfies both band guarantees at n={n}, a={a}, "
            f"delta={delta} (stop-band edge {edge:.3e} > {delta / n**3:.3e})"
        )
    return p


def _epsilon_floor(l: int) -> float:
    # Smallest epsilon whose l-th power stays a normal double with margin.
    return 10.0 ** (-280.0 / l)


@dataclass(frozen=True)
class FilterSchedule:
    """All knobs of the filtering loop, either derived or hand-set.

    ``paper-formula`` mode derives every field from (n, delta, nu); at
    practical sizes its epsilon is so small that the modulus M = p^3
    overflows, raising ScaleError — manual-override mode is the supported
    path for experiments, and every report records which mode produced it.
    """

    n: int
    a: float
    p: int
    t: int
    m_range: int
    l: int
    epsilon: float
    delta: float
    nu: float
    mode: str
    clamped: bool = False

    def __post_init__(self):
        if self.mode not in SCHEDULE_MODES:
            raise DomainError(f"mode must be one of {SCHEDULE_MODES}, got {self.mode!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        for name in ("p", "t", "m_range", "l"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise DomainError(f"{name} must be a positive integer, got {val!r}")
        if self.l < 2:
            raise DomainError(f"l must be at least 2, got {self.l}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must be in (0, 1), got {self.delta!r}")
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise DomainError(f"a must be positive and finite, got {self.a!r}")
        if not (math.isfinite(self.nu) and self.nu > 0.0):
            raise DomainError(f"nu must be positive and finite, got {self.nu!r}")

    @classmethod
    def paper_formula(
        cls, n: int, delta: float, nu: float = 1.0, l: int = 2,
        separation: float | None = None,
    ) -> "FilterSchedule":
        """Derive the full schedule from (n, delta, nu) and the separation.

        a = 1/nu; p solves the band edge condition; t = ceil(nu ln n / ln ln n)
        clamped to >= 2; epsilon = min(2^(-ln(n)^(8a)), separation) floored at
        representability; M comes from the least prime >= epsilon^(-l/2).
        """
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise DomainError(f"n must be an integer >= 2, got {n!r}")
        if not (math.isfinite(nu) and nu > 0.0):
            raise DomainError(f"nu must be positive and finite, got {nu!r}")
        a = 1.0 / nu
        p = repetitions_for_bands(n, a, delta)

        loglog = math.log(math.log(n))
        t_raw = math.ceil(nu * math.log(n) / loglog) if loglog > 0.0 else 0
        t = max(2, t_raw)
        clamped = t != t_raw or stop_band(n, a).half_width == MAX_HALF_WIDTH

        exponent = math.log(n) ** (8.0 * a)
        eps = 2.0**-exponent if exponent < 1000.0 else 0.0
        if separation is not None:
            eps = min(eps, separation)
        floor = _epsilon_floor(l)
        if eps < floor:
            eps = floor
            clamped = True
        m_range, _ = choose_modulus(eps, int(l))
        return cls(int(n), a, p, t, m_range, int(l), eps, float(delta), float(nu),
                   "paper-formula", clamped)

    @classmethod
    def manual(
        cls, n: int, p: int, t: int, m_range: int, epsilon: float, delta: float,
        l: int = 2, nu: float = 1.0, a: float | None = None,
    ) -> "FilterSchedule":
        """Hand-set schedule for experiments; every field as given."""
        return cls(int(n), 1.0 / nu if a is None else float(a), int(p), int(t),
                   int(m_range), int(l), float(epsilon), float(delta), float(nu),
                   "manual-override", False)

    def bands(self) -> tuple[Band, Band]:
        """The (B, B') pair this schedule's n, a, delta define."""
        return stop_band(self.n, self.a), pass_band(self.n, self.a, self.delta)

    def perturbation(self) -> PerturbationSpec:
        return PerturbationSpec(self.epsilon, self.l)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "a": self.a, "p": self.p, "t": self.t, "M": self.m_range,
            "l": self.l, "epsilon": self.epsilon, "delta": self.delta,
            "nu": self.nu, "mode": self.mode, "clamped": self.clamped,
        }


@dataclass(frozen=True)
class IterationTrace:
    """Diagnostics from one inner iteration.

    ``component_history`` is filled only when an eigenbasis is passed in
    for tracking (test builds); row k holds |<v_i, state>| after k filter
    steps, before any normalization.
    """

    m: int
    w0_norm: float
    component_history: np.ndarray | None = None


def _apply(u: np.ndarray, w: np.ndarray, strategy: str) -> np.ndarray:
    return matmul(u, w.reshape(-1, 1), strategy)[:, 0]


def inner_iteration(
    a_prev: HermitianInput,
    v,
    schedule: FilterSchedule,
    rng: RngHandle,
    strategy: str = "blocked",
    budget: PrecisionBudget | None = None,
    forced_m: int | None = None,
    u_override: Callable[[HermitianInput], np.ndarray] | None = None,
    track: EigenDecomposition | None = None,
):
    """One pass of the filtering loop; returns ``(a_next, v_next, trace)``.

    Perturbs the matrix, builds ``U = exp(2 pi i A)`` by Taylor series with
    truncation error at most ``epsilon / M`` (or via ``u_override``, e.g.
    the oracle exponential in exactness tests), draws ``m`` uniform in
    ``{1..M}``, forms ``U^m`` by repeated squaring, applies ``p`` filter
    steps keeping the ``w0`` branch, and normalizes.  If the state's norm
    falls below 1e-100 at any step the phase content was entirely outside
    the pass band; callers restart from a fresh vector on that error.
    """
    w = as_vector(v, "v")
    if a_prev.n != w.shape[0]:
        raise DomainError(f"vector length {w.shape[0]} does not match n={a_prev.n}")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > 1e-9:
        raise DomainError(f"state must be unit norm, got {norm!r}")

    a_next = perturb(a_prev, schedule.perturbation(), rng)

    if u_override is not None:
        u = np.ascontiguousarray(u_override(a_next), dtype=np.complex128)
    else:
        target = schedule.epsilon / schedule.m_range
        terms = terms_for_tail(2.0 * math.pi * a_next.norm_bound, target)
        u = taylor_exp(a_next, terms, 2.0 * math.pi, strategy)
    if budget is not None:
        u = truncate(u, budget)

    if forced_m is None:
        m = int(rng.generator.integers(1, schedule.m_range + 1))
    else:
        if not 1 <= forced_m <= schedule.m_range:
            raise DomainError(f"forced m must be in [1, {schedule.m_range}], got {forced_m}")
        m = int(forced_m)
    um = power_by_squaring(u, m, strategy, budget)

    history = None
    if track is not None:
        history = np.empty((schedule.p + 1, track.n), dtype=np.float64)
        history[0] = np.abs(track.eigenvectors.conj().T @ w)
    for step in range(schedule.p):
        w, _ = filter_step(w, _apply(um, w, strategy))
        w_norm = float(np.linalg.norm(w))
        if w_norm < UNDERFLOW_FLOOR:
            raise FilteredToZeroError(
                f"state annihilated at filter step {step + 1} of {schedule.p} (m={m})"
            )
        if track is not None:
            history[step + 1] = np.abs(track.eigenvectors.conj().T @ w)

    w0_norm = float(np.linalg.norm(w))
    v_next = w / w0_norm
    return a_next, v_next, IterationTrace(m, w0_norm, history)
