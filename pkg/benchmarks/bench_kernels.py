"""Compare the compiled and pure-Python kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--ticks 20000] [--batch 2000] [--depth 4]

Times the streaming tick (``advance`` + ``dot``), one truncated product and a
batch of signatures for every available backend.  Prints a table of
microseconds per call and the speedup of the compiled backend.
"""
import argparse
import time

import numpy as np

from sigrisk import _kernels
from sigrisk.tensor_algebra import AlgebraShape


def _best(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(backend, shape, ticks, batch, repeats, seed=0):
    k = _kernels.get(backend)
    rng = np.random.default_rng(seed)
    dim, depth, size = shape.dim, shape.depth, shape.size
    points = np.cumsum(rng.standard_normal((ticks, dim)) * 1e-3, axis=0)
    weights = rng.standard_normal(size)

    def stream():
        sig = np.zeros(size)
        sig[0] = 1.0
        first = np.zeros(dim)
        last = np.zeros(dim)
        for p in points:
            k.advance(sig, last, first, p, dim, depth)
            k.dot(weights, sig)

    a = rng.standard_normal(size)
    b = rng.standard_normal(size)
    out = np.empty(size)

    def products():
        for _ in range(1000):
            k.tensor_mul(a, b, dim, depth, out)

    inc = np.ascontiguousarray(rng.standard_normal((batch, 20, dim)) * 0.1)

    def signatures():
        k.batch_signature(inc, depth)

    return {
        "tick (advance + dot)": _best(stream, repeats) / ticks * 1e6,
        "tensor_mul": _best(products, repeats) / 1000 * 1e6,
        f"batch_signature ({batch} x 20 points)": _best(signatures, repeats) * 1e6,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--ticks", type=int, default=20_000)
    ap.add_argument("--batch", type=int, default=2_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    shape = AlgebraShape(args.dim, args.depth)
    backends = _kernels.available()
    results = {b: bench(b, shape, args.ticks, args.batch, args.repeats) for b in backends}
    print(f"dim={shape.dim} depth={shape.depth} D={shape.size}  (microseconds per call, best of {args.repeats})")
    header = f"{'kernel':<40}" + "".join(f"{b:>12}" for b in backends)
    if "compiled" in backends and "python" in backends:
        header += f"{'speedup':>10}"
    print(header)
    for name in results[backends[0]]:
        row = f"{name:<40}" + "".join(f"{results[b][name]:>12.2f}" for b in backends)
        if "compiled" in backends and "python" in backends:
            row += f"{results['python'][name] / results['compiled'][name]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
