"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one line per kernel with the best wall time of each backend and the
speedup, and checks that both backends return the same value.
"""

import argparse
import math
import time

import numpy as np

from bellkit import _pykernels, lp

try:
    from bellkit import _kernels
except ImportError:
    _kernels = None


def best_time(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def cases():
    f = lp.builtin_functional("i3322")
    kc, km, kn, _ = f.pair_coefficients()
    full = np.arange(4000, dtype=np.int64)
    grouped = np.tile(lp._grouped_branches(3, 3), 20)

    def branch_values(branches, I, S):
        return lambda mod: (lambda: mod.lp_branch_values(kc, km, kn, 3, 3, I, S, 1e-9, branches))

    yield "lp_branch_values (full mode, 4000 LPs)", branch_values(full, 0.45, 0.2), \
        lambda r: float(np.max(r))
    yield "lp_branch_values (grouped, 1280 LPs)", branch_values(grouped, 0.3, 0.0), \
        lambda r: float(np.max(r))
    yield "outcome_rhs_grid_max (401 grid)", \
        lambda mod: (lambda: mod.outcome_rhs_grid_max(2 - math.sqrt(2), 401)), lambda r: r[0]
    yield "hall_coplanar_grid (181 grid)", \
        lambda mod: (lambda: mod.hall_coplanar_grid(181)), lambda r: r[0]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled kernels are not built; only the fallback is timed")
    print(f"{'kernel':42s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, make, value in cases():
        t_py, r_py = best_time(make(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:42s} {t_py:10.4f}")
            continue
        t_c, r_c = best_time(make(_kernels), args.repeat)
        agree = abs(value(r_py) - value(r_c)) <= 1e-9
        print(f"{name:42s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:7.1f}x"
              + ("" if agree else "  VALUES DIFFER"))


if __name__ == "__main__":
    main()
