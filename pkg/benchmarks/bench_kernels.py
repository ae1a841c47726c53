"""Time the prolate float kernels under numba and numpy.

    python benchmarks/bench_kernels.py [--quad 200] [--modes 40] [--repeat 5]
"""

import argparse
import math
import time

import numpy as np


def _load(no_numba: bool):
    import importlib
    import os

    os.environ["BISPECTRAL_NO_NUMBA"] = "1" if no_numba else "0"
    import bispectral.prolate._kernels as k

    return importlib.reload(k)


def bench(kern, nq, nm, W, repeat):
    u, w = np.polynomial.legendre.leggauss(nq)
    # warm up (includes jit compilation for numba)
    P = kern.legendre_table(u, nm)
    M = kern.sinc_kernel(u, u, W)
    kern.contract(P, w, M)
    times = {}
    for name, fn in (("legendre_table", lambda: kern.legendre_table(u, nm)),
                     ("sinc_kernel", lambda: kern.sinc_kernel(u, u, W)),
                     ("contract", lambda: kern.contract(P, w, M))):
        best = math.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        times[name] = best
    return times, kern.contract(P, w, M)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quad", type=int, default=200)
    ap.add_argument("--modes", type=int, default=40)
    ap.add_argument("--W", type=float, default=5 * math.pi / 2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    results = {}
    for no_numba in (False, True):
        kern = _load(no_numba)
        results[kern.BACKEND] = bench(kern, args.quad, args.modes, args.W, args.repeat)
    for backend, (times, _) in results.items():
        row = "  ".join(f"{k}={v * 1e3:8.3f} ms" for k, v in times.items())
        print(f"{backend:6s} {row}")
    if len(results) == 2:
        a, b = (r[1] for r in results.values())
        print(f"max |K_numba - K_numpy| = {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
