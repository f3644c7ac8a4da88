"""Wall-clock comparison of the numba and numpy backends.

    python3 benchmarks/bench_kernels.py --n 2000000 --repeat 3
"""
import argparse
import time

import numpy as np

from levysieve._accel import HAVE_NUMBA, set_threads
from levysieve.estimation import penalty, project
from levysieve.levy_models import FIVE_SECONDS, ONE_MINUTE, SP500_VG, simulate_vg_increments
from levysieve.sieve_basis import SieveSpec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"n = {args.n:,}  threads = {set_threads(args.threads)}  backends = {', '.join(backends)}")
    series = simulate_vg_increments(SP500_VG, ONE_MINUTE, args.n, seed=0)
    spec = SieveSpec(0.001, 0.1, 40, 1)
    cases = {
        "simulate 1min": lambda b: simulate_vg_increments(SP500_VG, ONE_MINUTE, args.n, seed=1, backend=b),
        "simulate 5s": lambda b: simulate_vg_increments(SP500_VG, FIVE_SECONDS, args.n, seed=1, backend=b),
        "project k=1": lambda b: project(series, spec, b),
        "penalty k=1": lambda b: penalty(series, spec, b),
    }
    for b in backends:
        for fn in cases.values():
            fn(b)  # compile and warm caches

    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in cases.items():
        t = [best_of(lambda: fn(b), args.repeat) for b in backends]
        row = f"{name:<16}" + "".join(f"{v:>11.3f}s" for v in t)
        if len(t) == 2:
            row += f"{t[0] / t[1]:>11.1f}x"
        print(row)

    if HAVE_NUMBA:
        a = simulate_vg_increments(SP500_VG, ONE_MINUTE, 100_000, seed=5, backend="numpy").values
        c = simulate_vg_increments(SP500_VG, ONE_MINUTE, 100_000, seed=5, backend="numba").values
        print(f"max |numpy - numba| on 1e5 increments: {np.max(np.abs(a - c)):.1e}")


if __name__ == "__main__":
    main()
