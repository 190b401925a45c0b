"""Command-line experiment harness.

Subcommands: ``sample``, ``diag``, ``oracle``, ``discrepancy``, ``freq``,
``demmel``, ``gen``.  Every stochastic subcommand takes ``--seed`` and
reports it back; ``--json`` switches from summary lines to a JSON document
on stdout.  Exit codes: 0 success, 2 validation error, 3 non-convergence,
4 file I/O or parse failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .diagonalizer import diagonalize
from .discrepancy import (
    FracSequence,
    eigen_multiples_sequence,
    multiples_sequence,
    niederreiter_r_sum,
    star_discrepancy_exact,
    star_discrepancy_mc,
)
from .errors import (
    DomainError,
    FilteredToZeroError,
    NonConvergenceError,
    OracleError,
    ParseError,
    PhaseFilterError,
    ScaleError,
    ShapeError,
)
from .experiments import (
    demmel_case_study,
    frequency_experiment,
    generate_matrix,
)
from .filtering import FilterSchedule
from .linalg import HermitianInput
from .matrixio import read_matrix, write_matrix
from .oracle import jacobi_eigh, measure_separation
from .randomness import RngHandle
from .sampler import sample_eigenvector

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4


def _parse_schedule_override(text: str) -> dict:
    """'p=64,t=2,M=4096,epsilon=1e-4' -> keyword dict for FilterSchedule.manual."""
    out: dict = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise DomainError(f"schedule override entries must be key=value, got {piece!r}")
        key, value = piece.split("=", 1)
        key = key.strip()
        if key == "M":
            key = "m_range"
        if key in {"p", "t", "m_range", "l"}:
            out[key] = int(value)
        elif key in {"epsilon", "a", "nu"}:
            out[key] = float(value)
        else:
            raise DomainError(f"unknown schedule override key {key!r}")
    return out


def _schedule_for(n: int, delta: float, nu: float, override: str | None) -> FilterSchedule:
    if override:
        kw = _parse_schedule_override(override)
        kw.setdefault("nu", nu)
        return FilterSchedule.manual(n=n, delta=delta, **kw)
    return FilterSchedule.paper_formula(n, delta, nu=nu)


def _load_hermitian(path: str) -> HermitianInput:
    return HermitianInput.create(read_matrix(path))


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(payload: dict, args, lines) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _vector_as_pairs(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in v]


def cmd_sample(args) -> int:
    a = _load_hermitian(args.matrix)
    schedule = _schedule_for(a.n, args.delta, args.nu, args.schedule_override)
    rng = RngHandle(args.seed)
    outcome = sample_eigenvector(a, schedule, rng, max_restarts=args.max_restarts)
    payload = {
        "command": "sample",
        "seed": args.seed,
        "schedule": schedule.to_dict(),
        "residual": outcome.residual,
        "restarts": outcome.restarts,
        "iterations_used": outcome.iterations_used,
        "wall_time": outcome.wall_time,
        "vector": _vector_as_pairs(outcome.vector),
    }
    if args.out:
        write_matrix(args.out, outcome.vector)
        payload["out"] = args.out
    _emit(
        payload,
        args,
        [
            f"accepted with {outcome.restarts} restart(s), residual {outcome.residual:.3e}",
            f"iterations used: {outcome.iterations_used}",
        ],
    )
    return EXIT_OK


def cmd_diag(args) -> int:
    a = _load_hermitian(args.matrix)
    schedule = _schedule_for(a.n, args.delta, args.nu, args.schedule_override)
    rng = RngHandle(args.seed)
    outcome = diagonalize(a, schedule, rng, max_outer=args.max_outer)
    written = []
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for k, vec in enumerate(outcome.eigenvectors):
            path = os.path.join(args.out, f"eigenvector_{k:03d}.txt")
            write_matrix(path, vec)
            written.append(path)
    payload = {
        "command": "diag",
        "seed": args.seed,
        "schedule": schedule.to_dict(),
        "converged": outcome.converged,
        "collected": len(outcome.eigenvectors),
        "outer_rounds": outcome.outer_rounds,
        "total_filter_iterations": outcome.total_filter_iterations,
        "files": written,
    }
    if not args.out:
        payload["eigenvectors"] = [_vector_as_pairs(v) for v in outcome.eigenvectors]
    _emit(
        payload,
        args,
        [
            f"collected {len(outcome.eigenvectors)}/{a.n} eigenvectors "
            f"in {outcome.outer_rounds} outer round(s)",
            f"converged: {outcome.converged}",
        ]
        + [f"wrote {p}" for p in written],
    )
    return EXIT_OK if outcome.converged else EXIT_NONCONVERGENCE


def cmd_oracle(args) -> int:
    m = read_matrix(args.matrix)
    decomp = jacobi_eigh(m)
    payload = {
        "command": "oracle",
        "n": decomp.n,
        "eigenvalues": [float(x) for x in decomp.eigenvalues],
        "separation": measure_separation(decomp),
        "sweeps": decomp.sweeps,
        "off_diagonal": decomp.off_diagonal,
    }
    _emit(
        payload,
        args,
        [
            "eigenvalues: " + " ".join(f"{x:.12g}" for x in decomp.eigenvalues),
            f"separation: {payload['separation']:.12g}",
        ],
    )
    return EXIT_OK


def cmd_discrepancy(args) -> int:
    rng = RngHandle(args.seed)
    r_sum = None
    if args.matrix:
        m = read_matrix(args.matrix)
        decomp = jacobi_eigh(m)
        seq = eigen_multiples_sequence(decomp.eigenvalues, args.m_count)
    elif args.g:
        g = [int(x) for x in args.g.split(",") if x.strip()]
        if args.modulus is None:
            raise DomainError("--g requires --modulus")
        seq = multiples_sequence(g, args.modulus)
        r_sum = niederreiter_r_sum(g, args.modulus)
    else:
        raise DomainError("discrepancy needs either --matrix or --g/--modulus")
    if args.method == "exact":
        value = star_discrepancy_exact(seq, boxes=args.boxes)
        method = "exact"
    else:
        value = star_discrepancy_mc(seq, args.trials, rng, boxes=args.boxes)
        method = "monte-carlo-lower-bound"
    payload = {
        "command": "discrepancy",
        "n": seq.n,
        "s": seq.dim,
        "method": method,
        "boxes": args.boxes,
        "value": value,
        "r_sum": r_sum,
        "seed": args.seed,
    }
    _emit(
        payload,
        args,
        [f"D ({method}, {args.boxes} boxes) over {seq.n} points in dim {seq.dim}: {value:.6f}"]
        + ([f"R-sum: {r_sum:.6f}"] if r_sum is not None else []),
    )
    return EXIT_OK


def cmd_freq(args) -> int:
    rng = RngHandle(args.seed)
    if args.matrix:
        a = _load_hermitian(args.matrix)
    else:
        if not args.spectrum:
            raise DomainError("freq needs either --matrix or --spectrum")
        spectrum = _parse_floats(args.spectrum)
        a = generate_matrix(len(spectrum), spectrum, rng.child(0))
    schedule = _schedule_for(a.n, args.delta, args.nu, args.schedule_override)
    report = frequency_experiment(
        a, schedule, args.trials, rng.child(1), threads=args.threads
    )
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(report.to_json())
    agg = report.aggregate
    _emit(
        json.loads(report.to_json()),
        args,
        [
            f"successes {agg['successes']}/{agg['trials']}, "
            f"indices covered {agg['indices_covered']}/{a.n}",
            f"frequencies: {' '.join(f'{f:.3f}' for f in agg['frequencies'])}",
            f"chi-square vs uniform: {agg['chi_square']:.2f}",
        ],
    )
    return EXIT_OK


def cmd_demmel(args) -> int:
    rng = RngHandle(args.seed)
    report = demmel_case_study(args.eps, args.n, rng, trials=args.trials)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(report.to_json())
    agg = report.aggregate
    _emit(
        json.loads(report.to_json()),
        args,
        [
            f"measured separation: {agg['separation_measured']:.3e} "
            f"(close pair {agg['close_pair_indices']})",
            f"well-separated hits {agg['well_separated_hits']}, "
            f"max distance {agg['well_separated_max_distance']:.3e} "
            f"(target {agg['accuracy_target']:.1e})",
            f"close-pair hits {agg['close_pair_hits']}, "
            f"non-convergences {agg['non_convergences']}",
        ],
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    spectrum = _parse_floats(args.spectrum)
    rng = RngHandle(args.seed)
    a = generate_matrix(
        len(spectrum), spectrum, rng, identity_basis=args.identity_basis
    )
    write_matrix(args.out, a.matrix)
    payload = {
        "command": "gen",
        "n": a.n,
        "separation": a.separation,
        "norm_bound": a.norm_bound,
        "seed": args.seed,
        "out": args.out,
    }
    _emit(payload, args, [f"wrote {a.n}x{a.n} matrix to {args.out}"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (u64)")
    common.add_argument("--json", action="store_true", help="emit JSON on stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads")

    sched = argparse.ArgumentParser(add_help=False)
    sched.add_argument("--delta", type=float, default=1e-3)
    sched.add_argument("--nu", type=float, default=1.0)
    sched.add_argument(
        "--schedule-override",
        default=None,
        metavar="KV",
        help="manual schedule, e.g. p=64,t=2,M=4096,epsilon=1e-4",
    )

    parser = argparse.ArgumentParser(
        prog="phasefilter",
        description="eigenvector sampling by iterated phase-estimation filtering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common, sched],
                       help="draw one eigenvector sample")
    p.add_argument("--matrix", required=True)
    p.add_argument("--max-restarts", type=int, default=None)
    p.add_argument("--out", default=None, help="write accepted vector here")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("diag", parents=[common, sched],
                       help="recover the full eigenbasis")
    p.add_argument("--matrix", required=True)
    p.add_argument("--max-outer", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for eigenvector files")
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("oracle", parents=[common],
                       help="brute-force eigendecomposition")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("discrepancy", parents=[common],
                       help="star discrepancy of a points sequence")
    p.add_argument("--matrix", default=None,
                   help="Hermitian matrix; uses its eigenphase multiples")
    p.add_argument("--m-count", type=int, default=256)
    p.add_argument("--g", default=None, help="lattice vector, e.g. 3,5")
    p.add_argument("--modulus", type=int, default=None)
    p.add_argument("--method", choices=["exact", "mc"], default="exact")
    p.add_argument("--boxes", choices=["anchored", "free"], default="anchored")
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("freq", parents=[common, sched],
                       help="sampling-frequency histogram vs the oracle")
    p.add_argument("--matrix", default=None)
    p.add_argument("--spectrum", default=None, help="generate matrix, e.g. 0.1,0.4,0.7")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("demmel", parents=[common],
                       help="near-degenerate pair case study")
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--trials", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_demmel)

    p = sub.add_parser("gen", parents=[common],
                       help="random matrix with a prescribed spectrum")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--identity-basis", action="store_true")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NonConvergenceError, FilteredToZeroError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, ShapeError, ScaleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PhaseFilterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
