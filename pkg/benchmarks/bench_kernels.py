"""Compare the numba kernels with their pure fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints the best wall time of each path and checks that both return the
same arrays.
"""
import argparse
import time

import numpy as np

from bowlab import _kernels

CASES = {
    "bct running example": ((2, 1, 1, 2, 3, 2), (5, 2, 2, 0, 2)),
    "bct (2^5),(2^5)": ((2,) * 5, (2,) * 5),
    "bct (2^6),(2^6)": ((2,) * 6, (2,) * 6),
}


def best(fn, repeat):
    t = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        t = min(t, time.perf_counter() - t0)
    return t, out


def eps_case(seed=0, summands=20000, width=12):
    rng = np.random.default_rng(seed)
    mask = rng.random(summands * width) < 0.2
    exps = rng.integers(-2, 3, summands * width)
    offsets = np.arange(0, summands * width + 1, width)
    return mask, exps, offsets


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is disabled (BOWLAB_NO_NUMBA) or missing; nothing to compare")

    print(f"{'case':28} {'rows':>8} {'numba s':>10} {'python s':>10} {'speedup':>8}")
    for name, (r, c) in CASES.items():
        r, c = np.array(r, dtype=np.int64), np.array(c, dtype=np.int64)
        _kernels._bct_enumerate_nb(r, c, 1)  # compile
        tn, a = best(lambda: _kernels._bct_enumerate_nb(r, c, -1), args.repeat)
        tp, b = best(lambda: _kernels._bct_enumerate_py(r, c, -1), args.repeat)
        assert (a == b).all()
        print(f"{name:28} {len(a):8d} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}")

    mask, exps, offsets = eps_case()
    _kernels._eps_orders_nb(mask[:1], exps[:1], offsets[:2])
    tn, a = best(lambda: _kernels._eps_orders_nb(mask, exps, offsets), args.repeat)
    tp, b = best(lambda: _kernels._eps_orders_py(mask, exps, offsets), args.repeat)
    assert (a == b).all()
    print(f"{'eps orders':28} {len(a):8d} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}")


if __name__ == "__main__":
    main()
