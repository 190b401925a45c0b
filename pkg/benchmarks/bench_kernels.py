#!/usr/bin/env python3
"""Time the compiled kernels against their pure-Python twins.

Both kernel modules ship with the package; the compiled one is built from
``_kernels.pyx`` at install time and the fallback mirrors it function for
function.  This script times the four hot kernels on identical inputs and
reports the speedup, plus (with ``--end-to-end``) one whole-pipeline
comparison driven through separate interpreter processes so each side uses
its backend for everything.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --repeats 7 --end-to-end
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from phasefilter.backend import available_backends


def best_of(repeats: int, fn, *args):
    """Smallest wall time over ``repeats`` calls (first call warms caches)."""
    fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng: np.random.Generator, naive_dim: int, blocked_dim: int, points: int):
    a_small = rng.standard_normal((naive_dim, naive_dim)) + 1j * rng.standard_normal(
        (naive_dim, naive_dim)
    )
    b_small = rng.standard_normal((naive_dim, naive_dim)) + 1j * rng.standard_normal(
        (naive_dim, naive_dim)
    )
    a_big = rng.standard_normal((blocked_dim, blocked_dim)) + 1j * rng.standard_normal(
        (blocked_dim, blocked_dim)
    )
    b_big = rng.standard_normal((blocked_dim, blocked_dim)) + 1j * rng.standard_normal(
        (blocked_dim, blocked_dim)
    )
    h = rng.standard_normal((blocked_dim, blocked_dim)) + 1j * rng.standard_normal(
        (blocked_dim, blocked_dim)
    )
    h = np.ascontiguousarray(h + h.conj().T)
    xs = rng.random(points)
    ys = rng.random(points)

    def jacobi_case(mod):
        work = h.copy()
        basis = np.eye(blocked_dim, dtype=np.complex128)
        mod.jacobi_sweep(work, basis, 0.0)

    return [
        (f"matmul_naive {naive_dim}x{naive_dim}", lambda mod: mod.matmul_naive(a_small, b_small)),
        (f"matmul_blocked {blocked_dim}x{blocked_dim}", lambda mod: mod.matmul_blocked(a_big, b_big)),
        (f"jacobi_sweep {blocked_dim}x{blocked_dim}", jacobi_case),
        (f"star2d_anchored N={points}", lambda mod: mod.star2d_anchored(xs.copy(), ys.copy())),
    ]


END_TO_END_SNIPPET = """
import time
import phasefilter
from phasefilter.experiments import generate_matrix
from phasefilter.filtering import FilterSchedule
from phasefilter.randomness import RngHandle
from phasefilter.sampler import sample_eigenvector

lams = [0.0831, 0.2017, 0.3243, 0.4512, 0.5689, 0.6824, 0.8076, 0.9351]
a = generate_matrix(8, lams, RngHandle(123))
schedule = FilterSchedule.manual(n=8, p=64, t=2, m_range=4096, epsilon=1e-4, delta=1e-3)
rng = RngHandle(7)
t0 = time.perf_counter()
for k in range(40):
    sample_eigenvector(a, schedule, rng.child(k))
print(phasefilter.BACKEND_NAME, time.perf_counter() - t0)
"""


def run_end_to_end():
    print("\nend-to-end: 40 eigenvector samples at n=8 (fresh process per backend)")
    for env_value in (None, "1"):
        env = dict(os.environ)
        env.pop("PHASEFILTER_PURE_PYTHON", None)
        if env_value is not None:
            env["PHASEFILTER_PURE_PYTHON"] = env_value
        out = subprocess.run(
            [sys.executable, "-c", END_TO_END_SNIPPET],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        name, seconds = out.stdout.split()
        print(f"  {name:>12}: {float(seconds):8.3f} s")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3, help="timed runs per case (best kept)")
    parser.add_argument("--naive-dim", type=int, default=48, help="matrix size for matmul_naive")
    parser.add_argument("--blocked-dim", type=int, default=192, help="matrix size for matmul_blocked/jacobi")
    parser.add_argument("--points", type=int, default=1500, help="point count for star2d_anchored")
    parser.add_argument("--end-to-end", action="store_true", help="also time the sampler per backend")
    args = parser.parse_args(argv)

    backends = available_backends()
    if "compiled" not in backends:
        print("warning: compiled extension not importable; timing pure-python only", file=sys.stderr)

    rng = np.random.default_rng(20240814)
    cases = workloads(rng, args.naive_dim, args.blocked_dim, args.points)
    names = sorted(backends)
    header = f"{'kernel':<28}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, call in cases:
        timings = {name: best_of(args.repeats, call, backends[name]) for name in names}
        row = f"{label:<28}" + "".join(f"{timings[n] * 1e3:>12.2f}ms" for n in names)
        if len(names) == 2:
            # >1 means the compiled kernel wins; the blocked product is the
            # usual exception because the fallback's panels go through BLAS.
            row += f"{timings['pure-python'] / timings['compiled']:>9.2g}x"
        print(row)

    if args.end_to_end:
        run_end_to_end()


if __name__ == "__main__":
    main()
