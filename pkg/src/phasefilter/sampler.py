"""End-to-end eigenvector sampling with an intrinsic acceptance test.

The sampler filters a Haar-random start vector through ``t`` inner
iterations and accepts if the Rayleigh residual against ``U0`` (the
exponential of the *unperturbed* input) is at most the threshold.  On a
failed attempt it restarts from the same initial vector with fresh noise
and fresh power draws, so a fixed seed fully determines the outcome.

The residual criterion is oracle-free but still certifies closeness: for a
spectrum whose exponentiated eigenvalues are pairwise ``g``-separated on
the unit circle, an accepted vector lies within ``2*sqrt(2)*residual/g``
of a true eigenvector (at most one eigenvalue can sit within ``g/2`` of
the Rayleigh quotient, and the residual squared is the quotient's variance
over the eigencomponent distribution, which bounds the stray mass).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FilteredToZeroError, NonConvergenceError, ShapeError
from .filtering import FilterSchedule, inner_iteration
from .linalg import (
    HermitianInput,
    PrecisionBudget,
    as_square,
    as_vector,
    matmul,
    taylor_exp,
    terms_for_tail,
    truncate,
)
from .oracle import EigenDecomposition, phase_distance
from .randomness import RngHandle, haar_unit_vector

#: Inputs with operator norm beyond this are rejected; the exponentiation
#: and band machinery assume O(1)-normed matrices.
MAX_INPUT_NORM = 4.0


@dataclass(frozen=True)
class SampleOutcome:
    """A successful sample plus how much work it took.

    ``matched_index`` is only set when a reference decomposition was
    supplied for diagnostics.  ``wall_time`` is excluded from determinism
    comparisons; everything else is a pure function of the seed.
    """

    vector: np.ndarray
    residual: float
    restarts: int
    iterations_used: int
    matched_index: int | None
    wall_time: float


def residual(v, u0) -> float:
    """The acceptance functional ``norm((v† U0 v) v - U0 v)``.

    Zero exactly when ``v`` is an eigenvector of ``U0``; invariant under a
    global phase on ``v``.
    """
    v = as_vector(v, "v")
    u0 = as_square(u0, "u0")
    if u0.shape[0] != v.shape[0]:
        raise ShapeError(f"dimension mismatch: vector {v.shape[0]}, matrix {u0.shape[0]}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-8:
        raise DomainError(f"residual needs a unit vector, got norm {norm!r}")
    uv = matmul(u0, v.reshape(-1, 1))[:, 0]
    mu = np.vdot(v, uv)
    return float(np.linalg.norm(mu * v - uv))


def default_max_restarts(n: int, nu: float) -> int:
    """``ceil(10 * n**nu)``, matching the advertised n^-nu success rate."""
    return math.ceil(10.0 * float(n) ** nu)


def build_u0(
    a: HermitianInput,
    schedule: FilterSchedule,
    strategy: str = "blocked",
    budget: PrecisionBudget | None = None,
) -> np.ndarray:
    """The reference exponential of the unperturbed input.

    Taylor series truncated so the error is at most ``epsilon / M``, the
    same budget the filtering loop uses for its exponentials.
    """
    terms = terms_for_tail(2.0 * math.pi * a.norm_bound, schedule.epsilon / schedule.m_range)
    u0 = taylor_exp(a, terms, 2.0 * math.pi, strategy)
    if budget is not None:
        u0 = truncate(u0, budget)
    return u0


def _validate_input(a: HermitianInput, schedule: FilterSchedule) -> None:
    if a.n != schedule.n:
        raise DomainError(f"schedule is for n={schedule.n} but the matrix has n={a.n}")
    if a.norm_bound > MAX_INPUT_NORM:
        raise DomainError(
            f"operator norm bound {a.norm_bound} exceeds the supported {MAX_INPUT_NORM}"
        )
    if a.separation is None or a.separation <= 0.0:
        raise DomainError(
            "the input promise requires a positive eigenphase separation "
            f"(got {a.separation!r}); validate or declare it on the HermitianInput"
        )


def sample_eigenvector(
    a: HermitianInput,
    schedule: FilterSchedule,
    rng: RngHandle,
    max_restarts: int | None = None,
    strategy: str = "blocked",
    budget: PrecisionBudget | None = None,
    accept_residual: float | None = None,
    perturb_from_initial: bool = False,
    reset_chain_on_restart: bool = True,
    match_against: EigenDecomposition | None = None,
) -> SampleOutcome:
    """Draw one approximate eigenvector of ``a``; see module docstring.

    ``accept_residual`` tightens (never loosens) the acceptance threshold
    below ``schedule.delta`` — pass ``delta * g / 4`` with ``g`` the
    circle-gap ``2*sin(pi*separation)`` to certify eigenvector distance
    ``delta`` rather than distance ``4*delta/g``.  ``perturb_from_initial``
    makes every inner iteration perturb the original matrix instead of the
    accumulated one; restarts always reuse the same initial vector, and
    ``reset_chain_on_restart=False`` keeps the accumulated matrix across
    restarts instead of rewinding it.
    """
    _validate_input(a, schedule)
    threshold = schedule.delta if accept_residual is None else float(accept_residual)
    if not 0.0 < threshold <= schedule.delta:
        raise DomainError(
            f"accept threshold must be in (0, delta={schedule.delta}], got {threshold!r}"
        )
    if max_restarts is None:
        max_restarts = default_max_restarts(a.n, schedule.nu)
    if not isinstance(max_restarts, (int, np.integer)) or max_restarts < 1:
        raise DomainError(f"max_restarts must be a positive integer, got {max_restarts!r}")

    started = time.perf_counter()
    u0 = build_u0(a, schedule, strategy, budget)
    v0 = haar_unit_vector(a.n, rng)

    best = math.inf
    iterations = 0
    chain = a
    for attempt in range(int(max_restarts)):
        if reset_chain_on_restart:
            chain = a
        v = v0
        died = False
        for _ in range(schedule.t):
            base = a if perturb_from_initial else chain
            iterations += 1
            try:
                chain, v, _ = inner_iteration(base, v, schedule, rng, strategy, budget)
            except FilteredToZeroError:
                died = True
                break
        if died:
            continue
        r = residual(v, u0)
        best = min(best, r)
        if r <= threshold:
            matched = None
            if match_against is not None:
                dists = [
                    phase_distance(v, match_against.eigenvectors[:, i])
                    for i in range(match_against.n)
                ]
                matched = int(np.argmin(dists))
            return SampleOutcome(
                vector=v,
                residual=r,
                restarts=attempt,
                iterations_used=iterations,
                matched_index=matched,
                wall_time=time.perf_counter() - started,
            )
    raise NonConvergenceError(
        f"no accepted sample in {max_restarts} attempts (best residual {best:.3e}, "
        f"threshold {threshold:.3e})",
        best_residual=None if math.isinf(best) else best,
    )
