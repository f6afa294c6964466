"""Time the numba-compiled hot loops against their pure-numpy twins.

Run:  python3 benchmarks/bench_backends.py [--sizes 128,256,512] [--repeats 20]

Both backends compute identical arithmetic per pixel; this script reports
wall time and asserts the outputs still agree bit for bit, so it doubles as
a coarse equivalence check at realistic sizes.
"""

import argparse
import time

import numpy as np

from gaborset import accel
from gaborset.preprocess import AheParams, equalize_adaptive


def _time(fn, repeats):
    fn()  # warm-up: triggers jit compilation on the numba path
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_resize(side, repeats):
    rng = np.random.default_rng(0)
    img = rng.uniform(0.0, 255.0, (side, side))
    out = (side * 3 // 4, side * 3 // 4)
    if not accel.USE_NUMBA:
        raise SystemExit("numba backend unavailable; nothing to compare")
    t_np = _time(lambda: accel.resize_bilinear_numpy(img, *out), repeats)
    t_nb = _time(lambda: accel.resize_bilinear_numba(img, *out), repeats)
    a = accel.resize_bilinear_numpy(img, *out)
    b = accel.resize_bilinear_numba(img, *out)
    assert np.array_equal(a, b), "backends diverged"
    return t_np, t_nb


def bench_clahe(side, repeats):
    rng = np.random.default_rng(1)
    img = rng.uniform(0.0, 255.0, (side, side))
    params = AheParams()

    def run_numpy():
        old = accel.USE_NUMBA
        accel.USE_NUMBA = False
        try:
            return equalize_adaptive(img, params)
        finally:
            accel.USE_NUMBA = old

    def run_numba():
        old = accel.USE_NUMBA
        accel.USE_NUMBA = True
        try:
            return equalize_adaptive(img, params)
        finally:
            accel.USE_NUMBA = old

    t_np = _time(run_numpy, repeats)
    t_nb = _time(run_numba, repeats)
    assert np.array_equal(run_numpy(), run_numba()), "backends diverged"
    return t_np, t_nb


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256,512")
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"backend in use: {accel.backend_name()} (numba present: {accel.HAS_NUMBA})")
    print(f"{'kernel':<10} {'side':>5} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for side in sizes:
        t_np, t_nb = bench_resize(side, args.repeats)
        print(f"{'resize':<10} {side:>5} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms "
              f"{t_np / t_nb:>7.2f}x")
    for side in sizes:
        t_np, t_nb = bench_clahe(side, args.repeats)
        print(f"{'clahe':<10} {side:>5} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms "
              f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
