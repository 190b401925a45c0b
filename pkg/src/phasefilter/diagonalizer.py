"""Batched recovery of the full eigenbasis.

One round filters n phase-rotated copies of a single random vector: column
k carries an extra per-step phase ``e^{2 pi i m theta_k}``, which shifts
every eigenphase of that column by ``m * theta_k`` — so different columns
pass different eigenvectors through the same shared ``U^m``.  Columns that
pass the Rayleigh residual test are harvested, duplicates are dropped, and
fresh rounds run until all n eigenvectors are collected (a coupon-collector
loop) or the round budget runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .filtering import UNDERFLOW_FLOOR, FilterSchedule
from .linalg import (
    HermitianInput,
    PrecisionBudget,
    as_matrix,
    as_vector,
    matmul,
    power_by_squaring,
    taylor_exp,
    terms_for_tail,
    truncate,
)
from .oracle import EigenDecomposition, phase_distance
from .randomness import RngHandle, haar_unit_vector, perturb
from .sampler import _validate_input, build_u0, residual


@dataclass(frozen=True)
class PhaseBatch:
    """n columns filtering in parallel, each with its own grid phase.

    ``theta_numerators[k]`` holds the integer ``m_k`` defining column k's
    phase ``theta_k = m_k / m_range``; keeping the integer avoids rounding
    drift when computing ``D^m`` as ``exp(2 pi i (m * m_k mod M) / M)``.
    Dead columns (annihilated mid-round) stay zero until the next round.
    """

    v0: np.ndarray
    theta_numerators: np.ndarray
    m_range: int
    columns: np.ndarray
    alive: np.ndarray

    @classmethod
    def start(cls, v0, theta_numerators, m_range: int) -> "PhaseBatch":
        v0 = as_vector(v0, "v0")
        if abs(float(np.linalg.norm(v0)) - 1.0) > 1e-9:
            raise DomainError("v0 must be unit norm")
        nums = np.asarray(theta_numerators, dtype=np.int64)
        if nums.ndim != 1 or nums.size == 0:
            raise ShapeError(f"theta numerators must be a nonempty vector, got {nums.shape}")
        if not isinstance(m_range, (int, np.integer)) or m_range < 1:
            raise DomainError(f"m_range must be a positive integer, got {m_range!r}")
        if nums.min() < 0 or nums.max() >= m_range:
            raise DomainError("theta numerators must lie in [0, m_range)")
        cols = np.tile(v0[:, None], (1, nums.size))
        return cls(v0, nums, int(m_range), cols, np.ones(nums.size, dtype=bool))

    @property
    def thetas(self) -> np.ndarray:
        return self.theta_numerators / self.m_range

    @property
    def width(self) -> int:
        return self.columns.shape[1]


def batch_filter_round(
    a0: HermitianInput,
    batch: PhaseBatch,
    schedule: FilterSchedule,
    rng: RngHandle,
    strategy: str = "blocked",
    budget: PrecisionBudget | None = None,
    forced_m: int | None = None,
    u_override=None,
    normalize: bool = True,
) -> PhaseBatch:
    """One shared-m filtering round over all live columns.

    Perturbs ``a0``, exponentiates with the epsilon/M error budget, draws
    one m for the whole batch, then applies ``V <- (V + U^m V D^m)/2``
    p times and renormalizes each column.  Per-column renormalization
    commutes with the steps (it is a right-diagonal scaling), so doing it
    once at the end is exact.  Columns whose norm underflows are zeroed
    and marked dead for this round.  ``normalize=False`` keeps the raw
    filtered columns so attenuation magnitudes can be inspected.
    """
    if batch.columns.shape[0] != a0.n:
        raise ShapeError(f"batch is {batch.columns.shape[0]}-dimensional, matrix is {a0.n}")
    a_pert = perturb(a0, schedule.perturbation(), rng)
    if u_override is not None:
        u = np.ascontiguousarray(u_override(a_pert), dtype=np.complex128)
    else:
        target = schedule.epsilon / schedule.m_range
        terms = terms_for_tail(2.0 * math.pi * a_pert.norm_bound, target)
        u = taylor_exp(a_pert, terms, 2.0 * math.pi, strategy)
    if budget is not None:
        u = truncate(u, budget)
    if forced_m is None:
        m = int(rng.generator.integers(1, schedule.m_range + 1))
    else:
        if not 1 <= forced_m <= schedule.m_range:
            raise DomainError(f"forced m must be in [1, {schedule.m_range}], got {forced_m}")
        m = int(forced_m)
    um = power_by_squaring(u, m, strategy, budget)
    # D^m on the exact grid: phases (m * m_k mod M) / M.
    grid = (m * batch.theta_numerators) % batch.m_range
    dm = np.exp(2j * np.pi * grid / batch.m_range)

    v = batch.columns.copy()
    alive = batch.alive.copy()
    for _ in range(schedule.p):
        v = (v + matmul(um, v, strategy) * dm[None, :]) * 0.5
        norms = np.linalg.norm(v, axis=0)
        dead = alive & (norms < UNDERFLOW_FLOOR)
        if dead.any():
            alive[dead] = False
            v[:, dead] = 0.0
    if normalize:
        norms = np.linalg.norm(v, axis=0)
        v[:, alive] /= norms[alive]
    return PhaseBatch(batch.v0, batch.theta_numerators, batch.m_range, v, alive)


def harvest(
    batch: PhaseBatch,
    u0: np.ndarray,
    delta: float,
    collected=(),
    accept_residual: float | None = None,
) -> list:
    """Columns passing the residual test, minus duplicates.

    A candidate is dropped if its phase-invariant distance to any vector in
    ``collected`` (or an earlier harvested candidate) is at most 2*delta —
    two delta-accurate copies of one eigenvector sit within that radius.
    """
    u0 = as_matrix(u0, "u0")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1), got {delta!r}")
    threshold = delta if accept_residual is None else float(accept_residual)
    if not 0.0 < threshold <= delta:
        raise DomainError(f"accept threshold must be in (0, delta={delta}], got {threshold!r}")
    kept = list(collected)
    fresh = []
    for k in range(batch.width):
        if not batch.alive[k]:
            continue
        col = batch.columns[:, k]
        if residual(col, u0) > threshold:
            continue
        if any(phase_distance(col, prev) <= 2.0 * delta for prev in kept):
            continue
        kept.append(col)
        fresh.append(col)
    return fresh


@dataclass(frozen=True)
class DiagOutcome:
    """What the outer loop recovered and how long it took.

    ``matched`` is per-oracle-index and only filled in diagnostic runs.
    ``converged`` is False when the round budget ran out first; the
    partial collection is still returned.
    """

    eigenvectors: list
    matched: np.ndarray | None
    outer_rounds: int
    total_filter_iterations: int
    converged: bool


def diagonalize(
    a: HermitianInput,
    schedule: FilterSchedule,
    rng: RngHandle,
    max_outer: int | None = None,
    strategy: str = "blocked",
    budget: PrecisionBudget | None = None,
    accept_residual: float | None = None,
    match_against: EigenDecomposition | None = None,
) -> DiagOutcome:
    """Collect all n eigenvectors via repeated batched filtering rounds.

    Each outer round draws a fresh start vector and fresh grid phases,
    runs ``t`` filter rounds, and harvests.  Success is n collected
    vectors; hitting ``max_outer`` (default ``ceil(20 n ln n)``, several
    coupon-collector times) returns the partial set with
    ``converged=False`` instead of raising.
    """
    _validate_input(a, schedule)
    n = a.n
    if n < 2:
        raise DomainError("diagonalization needs n >= 2")
    if max_outer is None:
        max_outer = math.ceil(20.0 * n * math.log(n))
    if not isinstance(max_outer, (int, np.integer)) or max_outer < 1:
        raise DomainError(f"max_outer must be a positive integer, got {max_outer!r}")

    u0 = build_u0(a, schedule, strategy, budget)
    collected: list = []
    rounds = 0
    filter_iterations = 0
    g = rng.generator
    while rounds < int(max_outer) and len(collected) < n:
        rounds += 1
        v0 = haar_unit_vector(n, rng)
        nums = g.integers(0, schedule.m_range, size=n)
        batch = PhaseBatch.start(v0, nums, schedule.m_range)
        alive_any = True
        for _ in range(schedule.t):
            batch = batch_filter_round(a, batch, schedule, rng, strategy, budget)
            filter_iterations += schedule.p
            if not batch.alive.any():
                alive_any = False
                break
        if not alive_any:
            continue
        collected.extend(
            harvest(batch, u0, schedule.delta, collected, accept_residual)
        )

    matched = None
    if match_against is not None:
        matched = np.zeros(match_against.n, dtype=bool)
        for vec in collected:
            dists = [
                phase_distance(vec, match_against.eigenvectors[:, i])
                for i in range(match_against.n)
            ]
            matched[int(np.argmin(dists))] = True
    return DiagOutcome(
        eigenvectors=collected,
        matched=matched,
        outer_rounds=rounds,
        total_filter_iterations=filter_iterations,
        converged=len(collected) >= n,
    )
