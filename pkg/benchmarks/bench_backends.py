"""Timing comparison of the numba and numpy estimator backends.

Runs the three hot kernels and a full bandwidth-stack evaluation on
representative workloads, printing per-backend wall times and speedups.

    python3 benchmarks/bench_backends.py [--reps 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sbdrift import backend
from sbdrift.bandwidth import build_grid
from sbdrift.estimator import bandwidth_stack
from sbdrift.models import make_law, sample_dataset
from sbdrift.streams import derive_stream
from sbdrift.truth import IntervalSpec, evaluation_grid


def _time(fn, reps: int) -> float:
    fn()  # warmup (numba compiles here)
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads():
    interval = IntervalSpec()
    out = []
    for name, m, npts in (("GG1", 8000, 200), ("MM1", 8000, 200), ("GG2", 4000, 441)):
        law = make_law(name)
        rng = derive_stream(0, ("bench", name))
        sample = sample_dataset(law, m, rng)
        d = law.dim
        lo, hi = (-2.0, 2.0) if d == 1 else (-1.5, 1.5)
        xgrid = evaluation_grid(lo, hi, npts if d == 1 else 21, d)
        xi = np.zeros(d)
        grid = build_grid(m, d)
        out.append((name, sample, interval, xi, xgrid, grid))
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()

    rows = []
    for name, sample, interval, xi, xgrid, grid in _workloads():
        m, d = len(sample), sample.dim
        times = {}
        for which in ("numpy", "numba"):
            try:
                backend.set_backend(which)
            except Exception as exc:  # numba unavailable
                print(f"{which} backend unavailable: {exc}")
                continue
            h = float(grid.values[len(grid) // 2])

            def run_kde():
                backend.kde_weights(sample.xs, xi, h)

            def run_fmat():
                backend.sb_weight_matrix(
                    sample.xu, xi, xgrid, interval.delta_t(0.6), interval.delta
                )

            def run_sums(fmat=backend.sb_weight_matrix(
                sample.xu, xi, xgrid, interval.delta_t(0.6), interval.delta
            ), w=backend.kde_weights(sample.xs, xi, h)):
                backend.weighted_sums(fmat, w, sample.xu)

            def run_stack():
                bandwidth_stack(sample, interval, 0.6, xi, xgrid, grid.values)

            times[which] = {
                "kde": _time(run_kde, args.reps),
                "fmat": _time(run_fmat, args.reps),
                "sums": _time(run_sums, args.reps),
                "stack": _time(run_stack, args.reps),
            }
        backend.set_backend(None)
        rows.append((name, m, d, times))

    print(f"{'workload':<16}{'kernel':<8}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>9}")
    for name, m, d, times in rows:
        label = f"{name} M={m} d={d}"
        for kernel in ("kde", "fmat", "sums", "stack"):
            t_np = times.get("numpy", {}).get(kernel)
            t_nb = times.get("numba", {}).get(kernel)
            ratio = f"{t_np / t_nb:8.2f}x" if t_np and t_nb else "      na"
            print(
                f"{label:<16}{kernel:<8}"
                f"{1e3 * t_np if t_np else float('nan'):>12.3f}"
                f"{1e3 * t_nb if t_nb else float('nan'):>12.3f}{ratio:>9}"
            )
            label = ""


if __name__ == "__main__":
    main()
