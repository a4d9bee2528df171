"""Compare the compiled and pure-Python integration kernels.

    python bench/bench_kernel.py [--steps N] [--repeat R]

Both kernels integrate the noise-free ellipse run; the script reports the
best-of-R wall time for each and checks that their outputs are identical.
"""
import argparse
import math
import time

import numpy as np

from curvetrak import _pykernel
from curvetrak.checks import ellipse_config
from curvetrak.sim import kernel_args

try:
    from curvetrak import _ckernel
except ImportError:
    _ckernel = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--steps", type=int, default=30000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    cfg = ellipse_config(steps=args.steps)
    kargs = kernel_args(cfg)
    t_py, out_py = best_of(lambda: _pykernel.integrate(*kargs), max(1, args.repeat // 2))
    print(f"python  {t_py * 1e3:9.2f} ms  ({args.steps / t_py:,.0f} steps/s)")
    if _ckernel is None:
        print("cython  not built (pip install -e . --no-build-isolation)")
        return
    t_c, out_c = best_of(lambda: _ckernel.integrate(*kargs), args.repeat)
    same = np.array_equal(np.asarray(out_py[0]), np.asarray(out_c[0])) and out_py[1:3] == out_c[1:3]
    print(f"cython  {t_c * 1e3:9.2f} ms  ({args.steps / t_c:,.0f} steps/s)")
    print(f"speedup {t_py / t_c:9.1f}x   outputs identical: {same}")


if __name__ == "__main__":
    main()
