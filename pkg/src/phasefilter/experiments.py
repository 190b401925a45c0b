"""Statistical experiment drivers and their JSON reports.

Every driver takes an explicit RngHandle and derives one child stream per
trial, so trial k is reproducible in isolation and reports are bitwise
stable under re-runs with the same seed.  Wall-clock fields are the only
nondeterministic content and are stripped by ``Report.deterministic_payload``.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DomainError, NonConvergenceError
from .filtering import FilterSchedule
from .linalg import HermitianInput
from .oracle import jacobi_eigh, measure_separation, phase_distance
from .randomness import RngHandle
from .sampler import sample_eigenvector

_WALL_KEYS = frozenset({"wall_time", "wall_times", "total_wall_time"})


def _strip_wall(obj):
    if isinstance(obj, dict):
        return {k: _strip_wall(v) for k, v in obj.items() if k not in _WALL_KEYS}
    if isinstance(obj, list):
        return [_strip_wall(v) for v in obj]
    return obj


@dataclass(frozen=True)
class Report:
    """One experiment's inputs, per-trial records, and aggregates."""

    kind: str
    config: dict
    trials: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    version: str = __version__

    def to_json(self, indent: int | None = 2) -> str:
        payload = {
            "kind": self.kind,
            "version": self.version,
            "config": self.config,
            "trials": self.trials,
            "aggregate": self.aggregate,
        }
        return json.dumps(payload, indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        raw = json.loads(text)
        return cls(
            kind=raw["kind"],
            config=raw["config"],
            trials=raw["trials"],
            aggregate=raw["aggregate"],
            version=raw["version"],
        )

    def deterministic_payload(self) -> str:
        """Canonical JSON with all wall-clock fields removed.

        Two runs with the same seed must agree byte-for-byte on this
        string; wall times are the one legitimate difference.
        """
        payload = {
            "kind": self.kind,
            "version": self.version,
            "config": _strip_wall(self.config),
            "trials": _strip_wall(self.trials),
            "aggregate": _strip_wall(self.aggregate),
        }
        return json.dumps(payload, indent=None, sort_keys=True)


def _seed_info(rng: RngHandle) -> dict:
    return {"seed": int(rng.seed), "spawn_key": [int(k) for k in rng.spawn_key]}


def generate_matrix(
    n: int,
    spectrum,
    rng: RngHandle,
    identity_basis: bool = False,
) -> HermitianInput:
    """Hermitian PSD matrix with the given spectrum in a Haar-random basis.

    The basis comes from orthonormalizing a complex Gaussian matrix (QR with
    the R-diagonal phases folded back into Q, which makes the distribution
    exactly Haar).  ``identity_basis`` skips the rotation for debugging, so
    the result is simply ``diag(spectrum)``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    lams = np.asarray(spectrum, dtype=np.float64)
    if lams.shape != (n,):
        raise DomainError(f"spectrum must have exactly {n} entries, got {lams.shape}")
    if not np.isfinite(lams).all():
        raise DomainError("spectrum entries must be finite")
    if lams.min() < 0.0 or lams.max() >= 1.0:
        raise DomainError("spectrum values must lie in [0, 1)")
    sep = measure_separation(lams)
    if sep <= 0.0:
        raise DomainError("spectrum has a zero circular gap (repeated value mod 1)")
    if identity_basis:
        m = np.diag(lams.astype(np.complex128))
    else:
        g = rng.generator
        z = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        q = q * (d / np.abs(d))
        m = (q * lams) @ q.conj().T
    return HermitianInput.create(m, norm_bound=float(lams.max()) + 1e-12, separation=sep)


def _accept_threshold(a: HermitianInput, schedule: FilterSchedule) -> float:
    """delta * g / 4 where g is the unit-circle gap of the separation promise.

    A residual this small pins the state within delta of an eigenvector
    (the 2*sqrt(2)*r/g soundness bound with a safety factor), so samples
    accepted at this threshold need no oracle to be trusted.
    """
    g = 2.0 * math.sin(math.pi * a.separation)
    return schedule.delta * g / 4.0


def frequency_experiment(
    a: HermitianInput,
    schedule: FilterSchedule,
    trials: int,
    rng: RngHandle,
    threads: int = 1,
    accept_residual: float | None = None,
    max_restarts: int | None = None,
) -> Report:
    """Histogram of which oracle eigenvector each sample landed on.

    Runs the sampler ``trials`` times on independent child streams, matches
    every success against the brute-force decomposition, and reports the
    index histogram with a chi-square statistic against uniform (reported,
    not asserted — the guarantee is only that each index shows up at a
    constant-over-n rate, not exact uniformity).
    """
    if a.n > 32:
        raise DomainError(f"frequency experiment needs oracle matching; n <= 32, got {a.n}")
    if not isinstance(trials, (int, np.integer)) or trials < 0:
        raise DomainError(f"trials must be a nonnegative integer, got {trials!r}")
    if not isinstance(threads, (int, np.integer)) or threads < 1:
        raise DomainError(f"threads must be a positive integer, got {threads!r}")
    decomp = jacobi_eigh(a)
    threshold = _accept_threshold(a, schedule) if accept_residual is None else accept_residual

    def run_one(k: int) -> dict:
        t0 = time.perf_counter()
        try:
            outcome = sample_eigenvector(
                a,
                schedule,
                rng.child(k),
                max_restarts=max_restarts,
                accept_residual=threshold,
                match_against=decomp,
            )
        except NonConvergenceError as exc:
            return {
                "trial": k,
                "converged": False,
                "best_residual": float(exc.best_residual)
                if exc.best_residual is not None
                else None,
                "wall_time": time.perf_counter() - t0,
            }
        dist = phase_distance(
            outcome.vector, decomp.eigenvectors[:, outcome.matched_index]
        )
        return {
            "trial": k,
            "converged": True,
            "matched_index": int(outcome.matched_index),
            "distance": float(dist),
            "residual": float(outcome.residual),
            "restarts": int(outcome.restarts),
            "iterations": int(outcome.iterations_used),
            "wall_time": time.perf_counter() - t0,
        }

    t_start = time.perf_counter()
    if trials == 0:
        records = []
    elif threads == 1:
        records = [run_one(k) for k in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            records = list(pool.map(run_one, range(trials)))

    histogram = [0] * a.n
    residuals = []
    distances = []
    failures = 0
    for rec in records:
        if rec["converged"]:
            histogram[rec["matched_index"]] += 1
            residuals.append(rec["residual"])
            distances.append(rec["distance"])
        else:
            failures += 1
    successes = len(residuals)
    if successes:
        expected = successes / a.n
        chi_square = sum((h - expected) ** 2 / expected for h in histogram)
        frequencies = [h / successes for h in histogram]
        res_arr = np.sort(np.asarray(residuals))
        quantiles = {
            "p50": float(np.quantile(res_arr, 0.5)),
            "p90": float(np.quantile(res_arr, 0.9)),
            "max": float(res_arr[-1]),
        }
        max_distance = float(max(distances))
    else:
        chi_square = 0.0
        frequencies = [0.0] * a.n
        quantiles = {}
        max_distance = 0.0
    aggregate = {
        "trials": int(trials),
        "successes": successes,
        "non_convergences": failures,
        "histogram": histogram,
        "frequencies": frequencies,
        "min_frequency": min(frequencies) if frequencies else 0.0,
        "max_frequency": max(frequencies) if frequencies else 0.0,
        "chi_square": chi_square,
        "residual_quantiles": quantiles,
        "max_distance": max_distance,
        "indices_covered": sum(1 for h in histogram if h > 0),
        "total_wall_time": time.perf_counter() - t_start,
    }
    config = {
        "n": a.n,
        "trials": int(trials),
        "threads": int(threads),
        "schedule": schedule.to_dict(),
        "accept_residual": float(threshold),
        "max_restarts": max_restarts,
        "rng": _seed_info(rng),
    }
    return Report(kind="frequency", config=config, trials=records, aggregate=aggregate)


def demmel_spectrum(eps_gap: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum with one eps-close pair and everything else sqrt(eps)-separated.

    Returns (block1, block2) eigenvalue lists of length n/2 each; the close
    pair is split across the blocks, so the full matrix has exactly one
    cross-block near-degeneracy of width eps_gap while every other circular
    gap is at least sqrt(eps_gap).
    """
    if not isinstance(n, (int, np.integer)) or n < 4 or n % 2:
        raise DomainError(f"n must be an even integer >= 4, got {n!r}")
    if not 1e-6 <= eps_gap < 1.0 / 16.0:
        raise DomainError(f"eps_gap must be in [1e-6, 1/16), got {eps_gap!r}")
    margin = math.sqrt(eps_gap)
    base = 0.31
    # Others live on the arc [base + eps + margin, base + 1 - margin] so the
    # close pair keeps its sqrt(eps) distance from everything else.
    count = n - 2
    lo = eps_gap + margin
    hi = 1.0 - margin
    if count > 1:
        step = (hi - lo) / (count - 1)
        if step < margin:
            raise DomainError(
                f"cannot fit {count} values with circular gaps >= {margin:.3g}"
            )
        offsets = lo + step * np.arange(count)
    else:
        offsets = np.array([lo])
    others = (base + offsets) % 1.0
    block1 = np.sort(np.concatenate([[base], others[0::2]]))
    block2 = np.sort(np.concatenate([[(base + eps_gap) % 1.0], others[1::2]]))
    return block1, block2


def demmel_case_study(
    eps_gap: float,
    n: int,
    rng: RngHandle,
    trials: int = 64,
    delta: float | None = None,
) -> Report:
    """Accuracy of sampling on a near-degenerate two-block matrix.

    Builds a block-diagonal Hermitian matrix whose spectrum has exactly one
    eps-close cross-block pair, all other gaps at least sqrt(eps).  The
    sampler runs with delta calibrated to the sqrt(eps) gap; samples that
    land on well-separated eigenvectors are held to that accuracy, while
    hits on the close pair are recorded (distance can be O(1) there, since
    the filter cannot resolve the pair at this schedule) but never asserted.
    """
    block1, block2 = demmel_spectrum(eps_gap, n)
    half = n // 2
    m = np.zeros((n, n), dtype=np.complex128)
    for lams, sl, child in (
        (block1, slice(0, half), rng.child(0)),
        (block2, slice(half, n), rng.child(1)),
    ):
        g = child.generator
        z = g.standard_normal((half, half)) + 1j * g.standard_normal((half, half))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        q = q * (d / np.abs(d))
        m[sl, sl] = (q * lams) @ q.conj().T
    full_spectrum = np.concatenate([block1, block2])
    sep = measure_separation(full_spectrum)
    a = HermitianInput.create(
        m, norm_bound=float(full_spectrum.max()) + 1e-12, separation=sep
    )

    margin = math.sqrt(eps_gap)
    if delta is None:
        delta = margin / 10.0
    schedule = FilterSchedule.manual(
        n=n, p=64, t=2, m_range=4096, epsilon=1e-4, delta=delta
    )
    # Accuracy promise comes from the sqrt(eps) gap, not the eps one.
    g_wide = 2.0 * math.sin(math.pi * margin)
    threshold = delta * g_wide / 4.0

    decomp = jacobi_eigh(a)
    lams = decomp.eigenvalues
    frac = np.mod(lams, 1.0)
    gaps = np.abs(frac[:, None] - frac[None, :])
    gaps = np.minimum(gaps, 1.0 - gaps)
    np.fill_diagonal(gaps, np.inf)
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    close_pair = sorted((int(i), int(j)))

    records = []
    t_start = time.perf_counter()
    for k in range(trials):
        t0 = time.perf_counter()
        try:
            outcome = sample_eigenvector(
                a,
                schedule,
                rng.child(2 + k),
                accept_residual=threshold,
                match_against=decomp,
            )
        except NonConvergenceError as exc:
            records.append(
                {
                    "trial": k,
                    "converged": False,
                    "best_residual": float(exc.best_residual)
                    if exc.best_residual is not None
                    else None,
                    "wall_time": time.perf_counter() - t0,
                }
            )
            continue
        idx = int(outcome.matched_index)
        dist = phase_distance(outcome.vector, decomp.eigenvectors[:, idx])
        records.append(
            {
                "trial": k,
                "converged": True,
                "matched_index": idx,
                "in_close_pair": idx in close_pair,
                "distance": float(dist),
                "residual": float(outcome.residual),
                "restarts": int(outcome.restarts),
                "wall_time": time.perf_counter() - t0,
            }
        )

    well_dists = [r["distance"] for r in records if r.get("converged") and not r["in_close_pair"]]
    close_dists = [r["distance"] for r in records if r.get("converged") and r["in_close_pair"]]
    aggregate = {
        "separation_measured": float(sep),
        "close_pair_indices": close_pair,
        "well_separated_hits": len(well_dists),
        "well_separated_max_distance": max(well_dists) if well_dists else 0.0,
        "close_pair_hits": len(close_dists),
        "close_pair_distances": close_dists,
        "non_convergences": sum(1 for r in records if not r["converged"]),
        "accuracy_target": 10.0 * delta,
        "total_wall_time": time.perf_counter() - t_start,
    }
    config = {
        "n": int(n),
        "eps_gap": float(eps_gap),
        "delta": float(delta),
        "trials": int(trials),
        "schedule": schedule.to_dict(),
        "accept_residual": float(threshold),
        "spectrum_block1": [float(x) for x in block1],
        "spectrum_block2": [float(x) for x in block2],
        "rng": _seed_info(rng),
    }
    return Report(kind="demmel", config=config, trials=records, aggregate=aggregate)


def _binom_sf(successes: int, n: int, p: float) -> float:
    """P(X >= successes) for X ~ Binomial(n, p), exact in log space."""
    if successes <= 0:
        return 1.0
    if successes > n:
        return 0.0
    if p <= 0.0:
        return 0.0 if successes > 0 else 1.0
    if p >= 1.0:
        return 1.0
    log_p = math.log(p)
    log_q = math.log1p(-p)
    total = 0.0
    for k in range(successes, n + 1):
        log_term = (
            math.lgamma(n + 1)
            - math.lgamma(k + 1)
            - math.lgamma(n - k + 1)
            + k * log_p
            + (n - k) * log_q
        )
        term = math.exp(log_term)
        total += term
        if term < 1e-18 * max(total, 1e-300) and k > n * p:
            break
    return min(total, 1.0)


def duplicate_convergence_diagnostic(
    a: HermitianInput,
    schedule: FilterSchedule,
    rounds: int,
    rng: RngHandle,
    accept_residual: float | None = None,
    probes_per_round: int | None = None,
) -> Report:
    """Do columns of one batch pile onto the same eigenvector too often?

    Within a round, all columns share the start vector and the m draws, so
    index popularity genuinely varies from round to round; columns of one
    round agreeing more often than a cross-round baseline is expected and
    says nothing about independence.  The claim worth testing is that,
    *given* the round's shared context, columns choose indices
    independently (their phases are i.i.d.).  To test exactly that, each
    round's batch is extended with probe columns that share the start
    vector and the m draws but have their own fresh phases: under
    independence, two real columns agree on an index exactly as often as a
    real column agrees with a probe.  The report compares the real-real
    agreement count against the expectation predicted by the per-round
    real-probe agreement rate, with a one-sided binomial test; dependence
    between columns (e.g. state leaking across columns) inflates only the
    real-real rate and drives the p-value to zero.
    """
    from .diagonalizer import PhaseBatch, batch_filter_round
    from .randomness import haar_unit_vector
    from .sampler import build_u0, residual as residual_of

    if not isinstance(rounds, (int, np.integer)) or rounds < 1:
        raise DomainError(f"rounds must be a positive integer, got {rounds!r}")
    n = a.n
    if probes_per_round is None:
        probes_per_round = 3 * n
    if not isinstance(probes_per_round, (int, np.integer)) or probes_per_round < 1:
        raise DomainError(
            f"probes_per_round must be a positive integer, got {probes_per_round!r}"
        )
    decomp = jacobi_eigh(a)
    u0 = build_u0(a, schedule)
    threshold = _accept_threshold(a, schedule) if accept_residual is None else accept_residual

    per_round = []
    agree = 0
    pairs = 0
    expected = 0.0
    converged_total = 0
    histogram = np.zeros(n, dtype=np.int64)
    t_start = time.perf_counter()
    for r in range(rounds):
        child = rng.child(r)
        v0 = haar_unit_vector(n, child)
        nums = child.generator.integers(
            0, schedule.m_range, size=n + probes_per_round
        )
        batch = PhaseBatch.start(v0, nums, schedule.m_range)
        for _ in range(schedule.t):
            batch = batch_filter_round(a, batch, schedule, child)
            if not batch.alive.any():
                break
        indices = np.full(batch.width, -1, dtype=np.int64)
        for k in range(batch.width):
            if not batch.alive[k]:
                continue
            col = batch.columns[:, k]
            if residual_of(col, u0) > threshold:
                continue
            dists = [
                phase_distance(col, decomp.eigenvectors[:, i]) for i in range(n)
            ]
            indices[k] = int(np.argmin(dists))
        real = indices[:n][indices[:n] >= 0]
        probe = indices[n:][indices[n:] >= 0]
        converged_total += real.size
        for i in real:
            histogram[i] += 1
        rr_pairs = real.size * (real.size - 1) // 2
        rp_pairs = real.size * probe.size
        if rr_pairs and rp_pairs:
            rp_agree = int((real[:, None] == probe[None, :]).sum())
            agree += int(
                np.triu(real[:, None] == real[None, :], k=1).sum()
            )
            pairs += rr_pairs
            expected += rr_pairs * (rp_agree / rp_pairs)
        per_round.append(
            {
                "round": r,
                "real_indices": real.tolist(),
                "probe_indices": probe.tolist(),
            }
        )

    null_rate = expected / pairs if pairs else 0.0
    conditional_rate = agree / pairs if pairs else 0.0
    p_value = _binom_sf(agree, pairs, null_rate) if pairs else 1.0
    aggregate = {
        "rounds": int(rounds),
        "columns_converged": converged_total,
        "mean_converged_per_round": converged_total / rounds,
        "pair_agreements": int(agree),
        "pair_count": int(pairs),
        "conditional_rate": conditional_rate,
        "unconditional_rate": null_rate,
        "p_value": p_value,
        "independent_at_alpha_01": bool(p_value >= 0.01),
        "histogram": histogram.tolist(),
        "total_wall_time": time.perf_counter() - t_start,
    }
    config = {
        "n": n,
        "rounds": int(rounds),
        "probes_per_round": int(probes_per_round),
        "schedule": schedule.to_dict(),
        "accept_residual": float(threshold),
        "rng": _seed_info(rng),
    }
    return Report(
        kind="duplicate-convergence",
        config=config,
        trials=per_round,
        aggregate=aggregate,
    )
