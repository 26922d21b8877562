"""Compare the compiled kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--samples N]

Times the batched objective, the raw barrier Newton kernel, and the full
generic solver with each backend swapped in.  Results agree to solver
tolerance; the table reports median wall time per call.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from uipid import kernels
from uipid import _kernels_py as pure
from uipid.deltap import build_spec
from uipid.sampling import sample_rng, sample_uniform
from uipid.solver import SolveOptions, _active_system, solve_generic

try:
    from uipid import _kernels as compiled
except ImportError:
    compiled = None

SHAPES = [(2, 2, 2), (2, 2, 3), (2, 3, 3), (3, 3, 3), (2, 4, 4)]


def _median_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_cmi(mod, repeat):
    rng = np.random.default_rng(0)
    Q = rng.dirichlet(np.ones(27), size=20000).reshape(-1, 3, 3, 3)
    return _median_time(lambda: mod.cmi_batch(Q), repeat)


def bench_newton(mod, shape, n, repeat):
    opts = SolveOptions()
    systems = []
    for i in range(n):
        spec = build_spec(sample_uniform(shape, sample_rng(7, i)).p)
        systems.append(_active_system(spec))

    def run():
        for act in systems:
            mod.barrier_newton(
                act.q0, act.B, act.cell, act.ncell, np.zeros(act.B.shape[1]),
                opts.mu0, opts.mu_min, opts.mu_factor, opts.newton_tol, opts.max_iter, opts.armijo,
            )

    return _median_time(run, repeat) / n


def bench_solve(mod, shape, n, repeat):
    Ps = [sample_uniform(shape, sample_rng(11, i)) for i in range(n)]
    saved = kernels.barrier_newton
    kernels.barrier_newton = mod.barrier_newton
    try:
        return _median_time(lambda: [solve_generic(P) for P in Ps], repeat) / n
    finally:
        kernels.barrier_newton = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repetitions; the median is reported")
    ap.add_argument("--samples", type=int, default=20, help="instances per shape")
    args = ap.parse_args(argv)
    backends = [("python", pure)] + ([("cython", compiled)] if compiled else [])
    if compiled is None:
        print("compiled kernels unavailable; timing the numpy fallback only")

    rows = [("cmi_batch 20000x3x3x3", {name: bench_cmi(mod, args.repeat) for name, mod in backends})]
    for shape in SHAPES:
        label = "x".join(map(str, shape))
        rows.append((f"barrier_newton {label}",
                     {name: bench_newton(mod, shape, args.samples, args.repeat) for name, mod in backends}))
        rows.append((f"solve_generic {label}",
                     {name: bench_solve(mod, shape, args.samples, args.repeat) for name, mod in backends}))

    print(f"{'benchmark':32s} {'python ms':>11s} {'cython ms':>11s} {'speedup':>8s}")
    for label, t in rows:
        py = t["python"] * 1e3
        cy = t.get("cython")
        if cy is None:
            print(f"{label:32s} {py:11.3f} {'-':>11s} {'-':>8s}")
        else:
            print(f"{label:32s} {py:11.3f} {cy * 1e3:11.3f} {t['python'] / cy:8.2f}")


if __name__ == "__main__":
    main()
