"""Compare the compiled and numpy quadrature kernels.

    python3 benchmarks/bench_backends.py [--sizes 128 256 512 1024] [--repeat 20]

Prints the median time per right-hand-side evaluation for each backend and
grid size, the speed-up, and the max difference between the two results.
"""
import argparse
import statistics
import time

import numpy as np

from nlburgers import _backend
from nlburgers.kernels import SPECTRAL, _weights


def time_call(fn, repeat):
    fn()  # warm caches (offset tables, weights)
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    backends = _backend.available()
    print(f"backends: {backends}, threads: {_backend.THREADS}")
    print(f"{'n':>6} " + " ".join(f"{b + ' [ms]':>14}" for b in backends) + f" {'speed-up':>9} {'max diff':>10}")
    rng = np.random.default_rng(1)
    prev = _backend.BACKEND
    try:
        for n in args.sizes:
            u = 2.0 + rng.standard_normal(n) * 0.1
            w = _weights(n, SPECTRAL.c1)
            times, outs = {}, {}
            for b in backends:
                _backend.use(b)
                times[b] = time_call(lambda: _backend.pv_sum(u, u, w), args.repeat)
                outs[b] = _backend.pv_sum(u, u, w)
            line = f"{n:>6} " + " ".join(f"{1e3 * times[b]:>14.3f}" for b in backends)
            if len(backends) == 2:
                line += f" {times['python'] / times['cython']:>9.1f}"
                line += f" {np.max(np.abs(outs['python'] - outs['cython'])):>10.2e}"
            print(line)
    finally:
        _backend.use(prev)


if __name__ == "__main__":
    main()
