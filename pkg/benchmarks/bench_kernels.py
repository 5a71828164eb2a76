"""Timing comparison of the two orbit-kernel backends.

Runs identical long-orbit workloads through the compiled backend and the
vectorized numpy fallback, checks they agree, and prints a table.  With
ROTOR_NO_NUMBA=1 only the numpy column runs.

    python3 benchmarks/bench_kernels.py [--n 20000] [--seeds 32] [--repeat 3]
"""

import argparse
import time

import numpy as np

from rotor import _kernels
from rotor.catalog import build_catalog
from rotor.maps import orbit_displacement_means, orbit_mean_with_tail, \
    orbit_segment


def _flat(tail_result):
    (mx, my), spread = tail_result
    return np.array([mx, my, spread])


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000, help="orbit length")
    ap.add_argument("--seeds", type=int, default=32,
                    help="seed grid is seeds x seeds")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cat = build_catalog()
    ax = np.arange(args.seeds) / args.seeds
    grid = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)

    jobs = [
        ("means, 1-letter word", cat.word("h"),
         lambda w: orbit_displacement_means(w, grid, args.n)),
        ("means, 3-letter word", cat.word("twist h twist"),
         lambda w: orbit_displacement_means(w, grid, args.n)),
        ("means, inverse letter", cat.word("h skew'"),
         lambda w: orbit_displacement_means(w, grid, args.n)),
        ("tail mean, single seed", cat.word("irrskew"),
         lambda w: _flat(orbit_mean_with_tail(w, (0.2, 0.7), 10 * args.n))),
        ("orbit collection", cat.word("twist"),
         lambda w: orbit_segment(w, (0.1, 0.3), 10 * args.n, burn=args.n)),
    ]

    backends = ["numpy"]
    try:
        _kernels.set_backend("numba")
        backends.insert(0, "numba")
    except Exception:
        print("numba backend unavailable, timing numpy only")

    print("orbit length n=%d, %d seeds, best of %d"
          % (args.n, len(grid), args.repeat))
    header = "%-24s" % "workload" + "".join("%12s" % b for b in backends)
    if len(backends) == 2:
        header += "%10s" % "speedup"
    print(header)
    print("-" * len(header))

    for label, word, job in jobs:
        times, results = [], []
        for b in backends:
            _kernels.set_backend(b)
            if b == "numba":
                job(word)  # compile outside the timed region
            t, out = timed(lambda: job(word), args.repeat)
            times.append(t)
            results.append(np.asarray(out, dtype=float))
        row = "%-24s" % label + "".join("%11.4fs" % t for t in times)
        if len(backends) == 2:
            gap = float(np.max(np.abs(results[0] - results[1])))
            if gap > 1e-9:
                raise SystemExit("backend disagreement %g on %r"
                                 % (gap, label))
            row += "%9.1fx" % (times[1] / times[0])
        print(row)

    _kernels.set_backend(backends[0])


if __name__ == "__main__":
    main()
