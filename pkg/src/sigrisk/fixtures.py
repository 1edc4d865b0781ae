"""Deterministic synthetic data used by the tests, the acceptance suite and demos."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_models import ModelSpec
from .monitoring import GeneratorFlow, MonitorState, RollingVarianceMonitor, Thresholds, run_stream, zero_sensitivity
from .tensor_algebra import AlgebraShape

__all__ = [
    "UNIT_SQUARE",
    "polygon_area",
    "TwoPhaseStream",
    "two_phase_stream",
    "calm_stream",
    "PrecedenceResult",
    "precedence_experiment",
]

# counter-clockwise unit square, closed
UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])


def polygon_area(points) -> float:
    """Signed area of a closed polygon by the shoelace formula (positive when counter-clockwise)."""
    p = np.asarray(points, dtype=np.float64)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


@dataclass(frozen=True)
class TwoPhaseStream:
    """Tick stream with a calm lead-in, a winding phase and a high-variance phase.

    ``phase`` labels each increment: 0 calm, 1 winding, 2 variance expansion.
    """

    times: np.ndarray
    values: np.ndarray
    phase: np.ndarray
    dt: float
    sigma: float

    def first_tick_of(self, phase: int) -> int:
        return int(np.flatnonzero(self.phase == phase)[0]) + 1

    def ticks(self):
        """Iterate ``(time, values)`` after the initial point."""
        for i in range(1, len(self.times)):
            yield self.times[i], self.values[i]


def _noise(rng, n, sigma_step):
    return rng.standard_normal((n, 2)) * sigma_step


def calm_stream(n: int, seed: int, *, dt: float = 1.0 / 2520, sigma: float = 1.0, start=(0.0, 0.0)):
    """Driftless 2-asset Gaussian random walk: ``(times, values)`` with n+1 points."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    inc = _noise(rng, n, sigma * np.sqrt(dt))
    values = np.vstack([np.asarray(start, dtype=np.float64), np.asarray(start) + np.cumsum(inc, axis=0)])
    return np.arange(n + 1) * dt, values


def two_phase_stream(seed: int, *, n_calm: int = 200, n_wind: int = 200, n_var: int = 200,
                     dt: float = 1.0 / 2520, sigma: float = 1.0, period: int = 40,
                     wind_mix: float = 0.8, var_factor: float = 9.0) -> TwoPhaseStream:
    """Calm noise, then noise mixed with a circular winding, then inflated noise.

    Winding increments are ``sqrt(1 - m^2) * noise + m * circle_step`` with
    ``m = wind_mix``.  The circle radius is chosen so each coordinate of a
    circle step has the same variance as the noise, so per-asset variance is
    unchanged in the winding phase.  The last phase multiplies the noise
    variance by ``var_factor``.
    """
    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    s = sigma * np.sqrt(dt)
    calm = _noise(rng, n_calm, s)
    theta = 2.0 * np.pi / period
    # chord length 2 r sin(theta/2); each coordinate then has variance chord^2 / 2
    radius = np.sqrt(2.0) * s / (2.0 * np.sin(theta / 2.0))
    angles = theta * np.arange(n_wind + 1)
    circle = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    wind = np.sqrt(1.0 - wind_mix**2) * _noise(rng, n_wind, s) + wind_mix * np.diff(circle, axis=0)
    burst = _noise(rng, n_var, s * np.sqrt(var_factor))
    inc = np.vstack([calm, wind, burst])
    values = np.vstack([np.zeros((1, 2)), np.cumsum(inc, axis=0)])
    times = np.arange(inc.shape[0] + 1) * dt
    phase = np.concatenate([np.zeros(n_calm, int), np.ones(n_wind, int), np.full(n_var, 2)])
    return TwoPhaseStream(times, values, phase, dt, sigma)


@dataclass(frozen=True)
class PrecedenceResult:
    """First breach ticks (1-based, None if never) of both detectors on one stream."""

    divergence_tick: int | None
    variance_tick: int | None
    divergence_threshold: float
    variance_reference: float
    stream: TwoPhaseStream


def precedence_experiment(seed: int, *, sigma: float = 10.0, period: int = 80, depth: int = 2,
                          anchor_interval: int = 40, margin: float = 1.25, calib_ticks: int = 2000,
                          window: int = 50, k: float = 3.0) -> PrecedenceResult:
    """Run the geometric monitor and a rolling-variance detector on :func:`two_phase_stream`.

    Both detectors are calibrated on an independent calm stream with the same
    step variance: the divergence threshold is ``margin`` times the largest
    calm divergence and the variance reference is the pooled calm variance.
    The expected flow is the generator of a driftless-in-log Brownian motion
    with the stream's volatility.
    """
    shape = AlgebraShape(3, depth)
    spec = ModelSpec(2, drift=0.5 * sigma**2, vol=sigma, horizon=1.0, steps=2520)
    flow = GeneratorFlow.from_model(spec, shape)
    ct, cv = calm_stream(calib_ticks, seed + 1000, sigma=sigma)
    calib = MonitorState(shape, ct[0], cv[0], zero_sensitivity(shape), anchor_interval=anchor_interval, flow=flow)
    threshold = margin * max(e.divergence for e in run_stream(calib, zip(ct[1:], cv[1:])))
    reference = float(np.mean(np.var(np.diff(cv, axis=0), axis=0, ddof=1)))

    stream = two_phase_stream(seed, sigma=sigma, period=period)
    state = MonitorState(shape, stream.times[0], stream.values[0], zero_sensitivity(shape),
                         Thresholds(divergence=threshold), anchor_interval=anchor_interval, flow=flow)
    events = run_stream(state, stream.ticks())
    div_tick = next((e.tick for e in events if e.breach.value != "none"), None)
    rv = RollingVarianceMonitor(window, k, reference)
    var_tick = None
    for i in range(1, len(stream.times)):
        if rv.update(stream.values[i] - stream.values[i - 1]) and var_tick is None:
            var_tick = i
    return PrecedenceResult(div_tick, var_tick, threshold, reference, stream)
