"""Latency and scaling measurements for the streaming hot path."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .tensor_algebra import AlgebraShape, TruncatedTensor
from .path_signature import RunningSignature

__all__ = ["LatencyStats", "latency_stats", "profile_ticks", "valuation_scaling", "affine_fit"]


@dataclass(frozen=True)
class LatencyStats:
    n: int
    p50_us: float
    p90_us: float
    p99_us: float
    p999_us: float
    mean_us: float
    max_us: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def summary(self) -> str:
        return (f"ticks={self.n} p50={self.p50_us:.2f}us p90={self.p90_us:.2f}us "
                f"p99={self.p99_us:.2f}us p99.9={self.p999_us:.2f}us mean={self.mean_us:.2f}us")


def latency_stats(samples_ns) -> LatencyStats:
    us = np.asarray(samples_ns, dtype=np.float64) / 1e3
    p50, p90, p99, p999 = np.percentile(us, [50, 90, 99, 99.9])
    return LatencyStats(int(us.shape[0]), float(p50), float(p90), float(p99), float(p999),
                        float(us.mean()), float(us.max()))


def profile_ticks(shape: AlgebraShape, n_ticks: int = 100_000, seed: int = 0,
                  weights: TruncatedTensor | None = None, dt: float = 1e-6, scale: float = 1e-3) -> LatencyStats:
    """Time ``update`` + ``value`` per tick on a synthetic random walk.

    Tick generation happens before the timed loop.
    """
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    steps = rng.standard_normal((n_ticks, shape.dim - 1)) * scale
    values = np.cumsum(steps, axis=0)
    if weights is None:
        weights = TruncatedTensor(shape, rng.standard_normal(shape.size))
    rs = RunningSignature(shape, 0.0, np.zeros(shape.dim - 1))
    samples = np.empty(n_ticks, dtype=np.int64)
    clock = time.perf_counter_ns
    update, value = rs.update, rs.value
    for i in range(n_ticks):
        t0 = clock()
        update((i + 1) * dt, values[i])
        value(weights)
        samples[i] = clock() - t0
    return latency_stats(samples)


def affine_fit(x, y) -> tuple[float, float, np.ndarray]:
    """Least-squares ``y = c0 + c1 x``; returns (c0, c1, relative deviation per point)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c1, c0 = np.polyfit(x, y, 1)
    pred = c0 + c1 * x
    return float(c0), float(c1), (y - pred) / pred


def valuation_scaling(dim: int = 3, depths=(2, 3, 4, 5), n_members: int = 20_000, repeats: int = 15,
                      seed: int = 0) -> list[tuple[int, int, float]]:
    """Best-of-``repeats`` wall time of valuing ``n_members`` signatures per depth.

    Returns ``(depth, D, seconds)`` triples.
    """
    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    out = []
    for depth in depths:
        shape = AlgebraShape(dim, depth)
        data = rng.standard_normal((n_members, shape.size))
        w = rng.standard_normal(shape.size)
        data @ w  # warm caches
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            data @ w
            best = min(best, time.perf_counter() - t0)
        out.append((depth, shape.size, best))
    return out
