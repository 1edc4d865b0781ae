"""Streaming monitor: geometric divergence, TD-error and breach detection.

Ticks are consumed into a running signature.  The stream is cut into
windows of ``anchor_interval`` ticks.  Inside a window starting at anchor
time ``a`` the monitor compares, at each tick time ``t``:

* the realised window signature ``X = S_{a,t}`` against the expected step
  ``Q = E[S_{a,t}]`` supplied by an :class:`ExpectedFlow`,
* the re-anchored terminal view ``Q^-1 (x) X (x) R(t)`` against the
  transported prior ``Q^-1 (x) R(a)``, where ``R(t) = E[S_{t,T}]``.

The history before ``a`` multiplies both views on the left and cancels, so
it is left out.  When ``X == Q`` and ``R(a) == Q (x) R(t)`` the divergence
is exactly zero.
"""
from __future__ import annotations

import enum
import math
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol

import numpy as np

from . import _kernels
from .tensor_algebra import (
    AlgebraShape,
    GroupElement,
    TruncatedTensor,
    basis,
    group_inverse,
    inner_product,
    lie_projection,
    tensor_exp,
    tensor_log,
    tensor_product,
    weighted_norm,
    zeros,
)
from .errors import MonitorError, NotGroupLikeError, OutOfOrderTickError, ShapeMismatchError
from .market_models import ModelSpec, SignatureEnsemble, expected_signature
from .path_signature import RunningSignature
from .risk_metrics import PortfolioSpec, TailResult, levy_gap_indicator

__all__ = [
    "Breach",
    "MonitorEvent",
    "EventLog",
    "ExpectedFlow",
    "GeneratorFlow",
    "Thresholds",
    "MonitorState",
    "geometric_divergence",
    "realised_td_error",
    "process_tick",
    "breach_region_check",
    "RollingVarianceMonitor",
    "run_stream",
    "zero_sensitivity",
]


class Breach(str, enum.Enum):
    NONE = "none"
    DIVERGENCE = "divergence"
    TD_ERROR = "td_error"
    BOTH = "both"

    @classmethod
    def classify(cls, divergence_hit: bool, td_hit: bool) -> "Breach":
        if divergence_hit and td_hit:
            return cls.BOTH
        if divergence_hit:
            return cls.DIVERGENCE
        if td_hit:
            return cls.TD_ERROR
        return cls.NONE


@dataclass(frozen=True)
class MonitorEvent:
    time: float
    divergence: float
    td_error: float
    breach: Breach
    levy_gap: float
    tick: int = 0

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "divergence": self.divergence,
            "td_error": self.td_error,
            "levy_gap": self.levy_gap,
            "breach": self.breach.value,
        }


class EventLog:
    """Append-only event sink, safe to read from other threads while appending."""

    def __init__(self):
        self._events: list[MonitorEvent] = []
        self._lock = threading.Lock()

    def append(self, event: MonitorEvent) -> None:
        with self._lock:
            if self._events and not event.time > self._events[-1].time:
                raise MonitorError("events must be strictly time-ordered")
            self._events.append(event)

    def snapshot(self) -> tuple[MonitorEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def __len__(self):
        with self._lock:
            return len(self._events)

    def __iter__(self):
        return iter(self.snapshot())


class ExpectedFlow(Protocol):
    """Expected-signature model used to anchor the monitor.

    ``step(s, t)`` is ``E[S_{s,t}]`` and ``remaining(t)`` is ``E[S_{t,T}]``.
    Calling the flow returns both.
    """

    def step(self, s: float, t: float) -> GroupElement: ...

    def remaining(self, t: float) -> TruncatedTensor: ...

    def __call__(self, s: float, t: float) -> tuple[GroupElement, TruncatedTensor]: ...


class GeneratorFlow:
    """Time-homogeneous flow ``E[S_{s,t}] = exp((t - s) psi)``.

    Exact for processes with stationary independent increments.
    """

    def __init__(self, psi: TruncatedTensor, horizon: float):
        if psi.data[0] != 0.0:
            raise MonitorError("generator must have zero scalar level")
        self.psi = psi.as_tensor()
        self.shape = psi.shape
        self.horizon = float(horizon)

    def step(self, s: float, t: float) -> GroupElement:
        return tensor_exp(self.psi * (t - s))

    def remaining(self, t: float) -> GroupElement:
        return tensor_exp(self.psi * max(self.horizon - t, 0.0))

    def __call__(self, s, t):
        return self.step(s, t), self.remaining(t)

    @classmethod
    def from_model(cls, spec: ModelSpec, shape: AlgebraShape, horizon: float | None = None) -> "GeneratorFlow":
        """Continuous-time generator of the time-augmented jump-diffusion.

        ``psi = e_0 + sum_a mu_a e_a + 1/2 sum_ab C_ab e_a e_b
        + lambda sum_a (E[exp(J e_a)] - 1)`` with Gaussian jump moments.
        """
        if shape.dim != spec.n_assets + 1:
            raise ShapeMismatchError(f"model has {spec.n_assets} assets but shape.dim = {shape.dim}")
        psi = basis(shape, (0,))
        for a in range(spec.n_assets):
            psi = psi + basis(shape, (a + 1,), spec.log_drift[a])
        if shape.depth >= 2:
            cov = spec.covariance
            lvl2 = np.zeros((shape.dim, shape.dim))
            lvl2[1:, 1:] = 0.5 * cov
            data = psi.data.copy()
            data[shape.level_slice(2)] = lvl2.ravel()
            psi = TruncatedTensor(shape, data, copy=False)
        if spec.jump_intensity > 0:
            moments = _gaussian_moments(spec.jump_mean, spec.jump_std, shape.depth)
            data = psi.data.copy()
            for a in range(spec.n_assets):
                for k in range(1, shape.depth + 1):
                    data[shape.word_index((a + 1,) * k)] += spec.jump_intensity * moments[k] / math.factorial(k)
            psi = TruncatedTensor(shape, data, copy=False)
        return cls(psi, spec.horizon if horizon is None else horizon)

    @classmethod
    def from_ensemble(cls, ens: SignatureEnsemble, horizon: float) -> "GeneratorFlow":
        """Generator fitted from an ensemble of terminal signatures over ``[0, horizon]``.

        ``psi = log(mean signature) / horizon``; exact when the ensemble
        comes from a time-homogeneous model with independent steps, up to
        Monte-Carlo error.
        """
        phi = expected_signature(ens)
        return cls(tensor_log(phi) / horizon, horizon)


def _gaussian_moments(mean: float, std: float, order: int) -> list[float]:
    # E[J^k] for J ~ N(mean, std^2) via m_k = mean m_{k-1} + (k-1) std^2 m_{k-2}
    m = [1.0, mean]
    for k in range(2, order + 1):
        m.append(mean * m[k - 1] + (k - 1) * std**2 * m[k - 2])
    return m[: order + 1]


def geometric_divergence(phi_T_t: TruncatedTensor, phi_step_prior: TruncatedTensor, phi_T_prior: TruncatedTensor,
                         level_weights=None) -> float:
    """``|| phi_T_t - phi_step_prior^-1 (x) phi_T_prior ||``."""
    if not phi_step_prior.is_group_like():
        raise NotGroupLikeError("step prior must have scalar level 1.0")
    transported = tensor_product(group_inverse(phi_step_prior), phi_T_prior)
    return weighted_norm(phi_T_t - transported, level_weights)


def realised_td_error(reward: float, w_G: PortfolioSpec, gamma: float, phi_T_t: TruncatedTensor,
                      phi_step_prior: TruncatedTensor, phi_T_prior: TruncatedTensor) -> float:
    """``reward + <w_G, gamma phi_T_t - phi_step_prior^-1 (x) phi_T_prior>``."""
    if not 0.0 < gamma <= 1.0:
        raise MonitorError(f"gamma must lie in (0, 1], got {gamma}")
    if w_G.shape != phi_T_t.shape:
        raise ShapeMismatchError(f"sensitivity shape {w_G.shape} vs {phi_T_t.shape}")
    transported = tensor_product(group_inverse(phi_step_prior), phi_T_prior)
    return float(reward) + inner_product(w_G.weights, phi_T_t * gamma - transported)


@dataclass(frozen=True)
class Thresholds:
    divergence: float = math.inf
    td_error: float = math.inf

    def __post_init__(self):
        for name in ("divergence", "td_error"):
            v = float(getattr(self, name))
            if not v > 0 or math.isnan(v):
                raise MonitorError(f"{name} threshold must be positive, got {v}")
            object.__setattr__(self, name, v)


class MonitorState:
    """Mutable monitor state owned by one stream consumer.

    ``running`` holds the signature since the first tick, ``window`` the
    signature since the current anchor.  ``prior_terminal`` is ``R(anchor)``;
    ``prior_step`` is the expected step from the anchor to the last tick.
    """

    def __init__(self, shape: AlgebraShape, time: float, values, sensitivity: PortfolioSpec,
                 thresholds: Thresholds = Thresholds(), *, gamma: float = 1.0, anchor_interval: int = 1,
                 level_weights=None, reward: str = "zero", flow: ExpectedFlow | None = None):
        if not 0.0 < gamma <= 1.0:
            raise MonitorError(f"gamma must lie in (0, 1], got {gamma}")
        if anchor_interval < 1:
            raise MonitorError("anchor_interval must be >= 1")
        if reward not in ("zero", "pnl"):
            raise MonitorError(f"reward must be 'zero' or 'pnl', got {reward!r}")
        if sensitivity.shape != shape:
            raise ShapeMismatchError(f"sensitivity shape {sensitivity.shape} vs {shape}")
        self.shape = shape
        self.sensitivity = sensitivity
        self.thresholds = thresholds
        self.gamma = float(gamma)
        self.anchor_interval = int(anchor_interval)
        self.level_weights = level_weights
        self.reward = reward
        self.flow = flow
        self.running = RunningSignature(shape, time, values)
        self.window = RunningSignature(shape, time, values)
        self.anchor_time = float(time)
        self.prior_terminal = flow.remaining(time) if flow is not None else None
        self.prior_step = None
        self.event_log = EventLog()
        self._tick_buf = np.empty(shape.size)

    @property
    def last_time(self) -> float:
        return self.running.last_time

    def _step_reward(self, time, values) -> float:
        # one-tick P&L <w_G, exp(increment) - 1>
        _, last_vals = self.running.last_point
        inc = np.empty(self.shape.dim)
        inc[0] = time - self.running.last_time
        inc[1:] = np.asarray(values, dtype=np.float64) - last_vals
        buf = self._tick_buf
        buf[:] = 0.0
        buf[0] = 1.0
        _kernels.mul_exp_inplace(buf, inc, self.shape.dim, self.shape.depth)
        buf[0] = 0.0
        return _kernels.dot(self.sensitivity.weights.data, buf)


def process_tick(state: MonitorState, tick, expected_flow: ExpectedFlow | Callable | None = None
                 ) -> tuple[MonitorState, MonitorEvent]:
    """Consume ``tick = (time, asset_values)`` and emit one event.

    The state is updated in place and returned.  An out-of-order tick raises
    before anything changes and produces no event.
    """
    time, values = tick
    time = float(time)
    flow = expected_flow if expected_flow is not None else state.flow
    if flow is None:
        raise MonitorError("no expected flow supplied")
    if not time > state.running.last_time:
        raise OutOfOrderTickError(f"tick time {time!r} is not after {state.running.last_time!r}")
    if state.prior_terminal is None:
        state.prior_terminal = flow.remaining(state.anchor_time)
    reward = state._step_reward(time, values) if state.reward == "pnl" else 0.0
    state.running.update(time, values)
    state.window.update(time, values)

    step, remaining = flow(state.anchor_time, time)
    q_inv = group_inverse(step)
    x = state.window.snapshot()
    phi_T_t = tensor_product(q_inv, tensor_product(x, remaining))
    divergence = geometric_divergence(phi_T_t, step, state.prior_terminal, state.level_weights)
    td = realised_td_error(reward, state.sensitivity, state.gamma, phi_T_t, step, state.prior_terminal)
    gap = levy_gap_indicator(state.running.snapshot()) if state.shape.depth >= 2 else 0.0
    breach = Breach.classify(divergence > state.thresholds.divergence, abs(td) > state.thresholds.td_error)
    event = MonitorEvent(time, divergence, td, breach, gap, state.running.tick_count)
    state.prior_step = step
    if state.window.tick_count >= state.anchor_interval:
        state.window = RunningSignature(state.shape, time, values)
        state.anchor_time = time
        state.prior_terminal = remaining
    state.event_log.append(event)
    return state, event


def breach_region_check(sig: TruncatedTensor, tail: TailResult, radius: float, level_weights=None) -> bool:
    """True iff level 2 of ``log(sig)`` lies within ``radius`` of the tail centroid's Lie projection.

    The centre is level 2 of the Lie projection of ``log(tail_signature)``,
    i.e. the log of its nearest group-like element in the Dynkin sense.
    """
    radius = float(radius)
    if not radius > 0:
        raise MonitorError(f"radius must be positive, got {radius}")
    if sig.shape != tail.tail_signature.shape:
        raise ShapeMismatchError(f"shape mismatch: {sig.shape} vs {tail.tail_signature.shape}")
    shape = sig.shape
    centre = lie_projection(tensor_log(tail.tail_signature)).level(2)
    point = tensor_log(sig).level(2)
    weight = 1.0 if level_weights is None else float(level_weights[2])
    return weight * float(np.linalg.norm(point - centre)) < radius if shape.depth >= 2 else False


class RollingVarianceMonitor:
    """Classical variance detector on per-tick asset increments.

    The statistic is the sample variance over the last ``window`` increments,
    pooled (averaged) across assets.  It breaches when it exceeds
    ``reference * (1 + k * sqrt(2 / df))`` with ``df = n_assets * (window - 1)``:
    ``k`` standard errors of a Gaussian sample variance above the reference.
    Without an explicit ``reference`` the first full window sets it.
    """

    def __init__(self, window: int = 50, k: float = 3.0, reference: float | None = None):
        if window < 3:
            raise MonitorError("window must be >= 3")
        if reference is not None and not reference > 0:
            raise MonitorError("reference variance must be positive")
        self.window = int(window)
        self.k = float(k)
        self.reference = None if reference is None else float(reference)
        self._buf: deque = deque(maxlen=self.window)
        self.count = 0
        self.last_statistic = math.nan

    def threshold(self, n_assets: int) -> float:
        df = n_assets * (self.window - 1)
        return self.reference * (1.0 + self.k * math.sqrt(2.0 / df))

    def update(self, increment) -> bool:
        """Add one increment vector; True when the rolling variance breaches."""
        inc = np.atleast_1d(np.asarray(increment, dtype=np.float64))
        self._buf.append(inc)
        self.count += 1
        if len(self._buf) < self.window:
            return False
        stat = float(np.mean(np.var(np.stack(self._buf), axis=0, ddof=1)))
        self.last_statistic = stat
        if self.reference is None:
            self.reference = stat
            return False
        return stat > self.threshold(inc.shape[0])


def run_stream(state: MonitorState, ticks: Iterable, flow: ExpectedFlow | None = None) -> list[MonitorEvent]:
    """Feed every tick through :func:`process_tick`; returns the emitted events."""
    return [process_tick(state, tick, flow)[1] for tick in ticks]


def zero_sensitivity(shape: AlgebraShape) -> PortfolioSpec:
    return PortfolioSpec(zeros(shape), 0.0, "zero")
