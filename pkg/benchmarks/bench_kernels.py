"""Compiled kernels against the numpy fallback on the mean-square hot loop.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""

import argparse
import json
import platform
import time

from realchar import _backend, charsum
from realchar.smoothfn import SmoothWindow

CASES = [(2.0**12, 2.0**9), (2.0**14, 891.0), (2.0**16, 2353.0), (2.0**17, 3822.0)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        value = fn()
        times.append(time.perf_counter() - t)
    return min(times), value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--json")
    args = ap.parse_args()

    if _backend.BACKEND != "cython":
        raise SystemExit("compiled extension not available; nothing to compare")
    w = SmoothWindow()
    rows = []
    print(f"{'X':>9} {'Y':>7} {'d_count':>8} {'cython s':>10} {'python s':>10} {'speedup':>8}  same value")
    for X, Y in CASES:
        charsum.mean_square(X, Y, w, w, backend="python")  # warm plan cache
        tc, rc = best_of(lambda: charsum.mean_square(X, Y, w, w, threads=args.threads, backend="cython"), args.repeat)
        tp, rp = best_of(lambda: charsum.mean_square(X, Y, w, w, threads=args.threads, backend="python"), args.repeat)
        same = abs(rc.value - rp.value) <= 1e-13 * rc.value
        rows.append({"X": X, "Y": Y, "d_count": rc.d_count, "cython": tc, "python": tp, "same": same})
        print(f"{X:9.0f} {Y:7.0f} {rc.d_count:8d} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}  {same}")
    if args.json:
        meta = {"machine": platform.machine(), "python": platform.python_version(), "threads": args.threads}
        with open(args.json, "w") as fh:
            json.dump({"meta": meta, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
