"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from ransomgame.kernels import numpy_impl, pack_params
from ransomgame.model import GlobalParams, GroupParams

try:
    from ransomgame.kernels import numba_impl
except ImportError:
    numba_impl = None


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    g = GroupParams(100, 100.0, 5.0, 5.0, 10.0)
    gp = GlobalParams(0.9, 10.0, 1.0, 10.0, 10.0)
    p = pack_params((g, g), gp)
    grid = np.geomspace(0.01, 100, 400)
    b1, b2 = (m.ravel() for m in np.meshgrid(grid, grid, indexing="ij"))
    u = np.random.default_rng(0).random((4096, 200))

    cases = {
        "social_losses 400x400": lambda impl: impl.social_losses(b1, b2, p),
        "attacker_response 400x400": lambda impl: impl.attacker_response(b1, b2, p),
        "tally_compromised 4096x200": lambda impl: impl.tally_compromised(u, 0.3, 0.1, 100),
    }
    print(f"{'kernel':<30}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, call in cases.items():
        slow = best_of(lambda: call(numpy_impl), args.repeat)
        if numba_impl is None:
            print(f"{name:<30}{slow * 1e3:>12.2f}{'n/a':>12}{'':>10}")
            continue
        fast = best_of(lambda: call(numba_impl), args.repeat)
        print(f"{name:<30}{slow * 1e3:>12.2f}{fast * 1e3:>12.2f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
