"""Signatures of time-augmented piecewise-linear paths, batch and streaming.

Channel 0 is time, channels 1..d-1 are assets.  Each linear segment
contributes ``exp(increment)`` and segments are chained left to right.
The level-1 block is then overwritten with the exact chord ``X_T - X_0``
(computed in one subtraction) so that level-1 functionals are bit-exact
rather than a sum of rounded increments.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from .tensor_algebra import AlgebraShape, GroupElement, TruncatedTensor
from .errors import OutOfOrderTickError, PathError, ShapeMismatchError

__all__ = [
    "TimedPath",
    "RunningSignature",
    "compute_signature",
    "signature_of_points",
    "batch_signatures",
    "sigswap_payoff",
    "parse_ticks",
    "read_tick_csv",
    "YEAR_SECONDS",
]

YEAR_SECONDS = 365.25 * 86400.0


@dataclass(frozen=True)
class TimedPath:
    """Strictly increasing ``times`` (length m) and asset ``values`` (m x n_assets)."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=np.float64).ravel()
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] != t.shape[0]:
            raise PathError(f"values must be (m, n_assets) with m = {t.shape[0]}, got {v.shape}")
        if t.shape[0] < 2:
            raise PathError("a path needs at least 2 points")
        if not (np.isfinite(t).all() and np.isfinite(v).all()):
            raise PathError("path contains NaN or infinite values")
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise PathError(f"times must be strictly increasing (violated at index {bad[0] + 1})")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return 1 + self.n_assets

    def __len__(self):
        return self.times.shape[0]

    def points(self) -> np.ndarray:
        """(m, dim) array with time in column 0."""
        return np.column_stack([self.times, self.values])


def _check_points(points, shape):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise PathError("need an (m, dim) array with m >= 2")
    if pts.shape[1] != shape.dim:
        raise ShapeMismatchError(f"path has {pts.shape[1]} channels but shape.dim = {shape.dim}")
    if not np.isfinite(pts).all():
        raise PathError("path contains NaN or infinite values")
    return pts


def signature_of_points(points, shape: AlgebraShape) -> GroupElement:
    """Signature of the piecewise-linear path through the rows of ``points``.

    No time channel is added; use this for raw multi-dimensional paths.
    """
    pts = _check_points(points, shape)
    inc = np.ascontiguousarray(np.diff(pts, axis=0)[None, :, :])
    sigs, _ = _kernels.batch_signature(inc, shape.depth)
    sig = sigs[0]
    sig[1:1 + shape.dim] = pts[-1] - pts[0]
    return GroupElement(shape, sig, copy=False)


def compute_signature(path: TimedPath, shape: AlgebraShape) -> GroupElement:
    """Signature of a time-augmented path; ``shape.dim`` must be 1 + n_assets."""
    if shape.dim != path.dim:
        raise ShapeMismatchError(f"path has {path.n_assets} assets, shape.dim must be {path.dim}, got {shape.dim}")
    return signature_of_points(path.points(), shape)


def batch_signatures(points: np.ndarray, shape: AlgebraShape, snapshots: Sequence[int] | None = None):
    """Signatures of many equal-length paths at once.

    ``points`` has shape (n, m, dim).  ``snapshots`` lists point indices
    (0..m-1) at which prefix signatures are recorded.  Returns raw arrays
    ``(sigs (n, D), flows (n, G, D) or None)`` with the same exact-chord
    level-1 treatment as :func:`signature_of_points`.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 3 or pts.shape[1] < 2 or pts.shape[2] != shape.dim:
        raise ShapeMismatchError(f"expected (n, m>=2, {shape.dim}) points, got {pts.shape}")
    inc = np.ascontiguousarray(np.diff(pts, axis=1))
    snaps = None if snapshots is None else np.asarray(snapshots, dtype=np.int64)
    sigs, flows = _kernels.batch_signature(inc, shape.depth, snaps)
    lvl1 = slice(1, 1 + shape.dim)
    sigs[:, lvl1] = pts[:, -1, :] - pts[:, 0, :]
    if flows is not None:
        flows[:, :, lvl1] = pts[:, snaps, :] - pts[:, :1, :]
    return sigs, flows


class RunningSignature:
    """Streaming signature maintained by Chen's identity, one segment per tick.

    Mutable and single-writer.  :meth:`snapshot` returns an immutable copy
    that can be handed to other threads.  Each update costs O(D*dim) and is
    independent of the number of ticks already consumed.
    """

    __slots__ = ("shape", "_buf", "_first", "_last", "_pt", "last_time", "tick_count", "time_channel")

    def __init__(self, shape: AlgebraShape, time: float, values, *, time_channel: bool = True):
        self.shape = shape
        self.time_channel = time_channel
        point = self._point(time, values)
        self._buf = np.zeros(shape.size)
        self._buf[0] = 1.0
        self._first = point
        self._last = point.copy()
        self._pt = np.empty(shape.dim)
        self.last_time = float(time)
        self.tick_count = 0

    def _point(self, time, values):
        vals = np.asarray(values, dtype=np.float64).ravel()
        if self.time_channel:
            pt = np.empty(vals.shape[0] + 1)
            pt[0] = time
            pt[1:] = vals
        else:
            pt = vals.copy()
        if pt.shape[0] != self.shape.dim:
            raise ShapeMismatchError(f"tick has {pt.shape[0]} channels, expected {self.shape.dim}")
        if not (math.isfinite(time) and np.isfinite(pt).all()):
            raise PathError("tick contains NaN or infinite values")
        return pt

    @property
    def last_point(self) -> tuple[float, np.ndarray]:
        vals = self._last[1:] if self.time_channel else self._last
        return self.last_time, vals.copy()

    def update(self, time: float, values) -> "RunningSignature":
        """Consume one tick.  Out-of-order or non-finite ticks raise before any state changes."""
        time = float(time)
        if not time > self.last_time:
            raise OutOfOrderTickError(f"tick time {time!r} is not after {self.last_time!r}")
        pt = self._pt
        try:
            if self.time_channel:
                pt[0] = time
                pt[1:] = values
            else:
                pt[:] = values
        except (ValueError, TypeError):
            raise ShapeMismatchError(f"tick values do not fit {self.shape.dim} channels") from None
        if not _kernels.advance(self._buf, self._last, self._first, pt, self.shape.dim, self.shape.depth):
            raise PathError("tick contains NaN or infinite values")
        self.last_time = time
        self.tick_count += 1
        return self

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the live coordinates (changes on update)."""
        view = self._buf.view()
        view.flags.writeable = False
        return view

    def value(self, weights: TruncatedTensor) -> float:
        """``<weights, sig>`` without taking a snapshot."""
        if weights.shape != self.shape:
            raise ShapeMismatchError(f"weights shape {weights.shape} vs {self.shape}")
        return _kernels.dot(weights.data, self._buf)

    def snapshot(self) -> GroupElement:
        return GroupElement(self.shape, self._buf, copy=True)

    @property
    def sig(self) -> GroupElement:
        return self.snapshot()


def sigswap_payoff(realised: TruncatedTensor, strike: TruncatedTensor) -> TruncatedTensor:
    """Coordinatewise ``realised - strike``."""
    if realised.shape != strike.shape:
        raise ShapeMismatchError(f"shape mismatch: {realised.shape} vs {strike.shape}")
    return TruncatedTensor(realised.shape, realised.data - strike.data, copy=False)


def _parse_time(text: str, time_format: str, origin: list) -> float:
    if time_format == "year":
        return float(text)
    stamp = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    if not origin:
        origin.append(stamp)
    return (stamp - origin[0]).total_seconds() / YEAR_SECONDS


def parse_ticks(lines: Iterable[str], *, time_format: str = "year", price_transform: str = "log",
                source: str = "<ticks>", expect_header: bool = True) -> Iterator[tuple[int, float, np.ndarray]]:
    """Yield ``(line_number, time, asset_vector)`` from tick CSV text.

    ISO-8601 times are converted to year fractions (365.25-day years)
    measured from the first tick.  ``price_transform="log"`` takes natural
    logs and requires positive prices.  Errors carry the 1-based line number.
    """
    if time_format not in ("year", "iso"):
        raise PathError(f"unknown time format {time_format!r}")
    if price_transform not in ("raw", "log"):
        raise PathError(f"unknown price transform {price_transform!r}")
    reader = csv.reader(lines)
    n_assets = None
    origin: list = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if n_assets is None and expect_header:
            if row[0].strip().lower() != "time" or len(row) < 2:
                raise PathError(f"{source}:{lineno}: header must be 'time,<asset1>,...'")
            n_assets = len(row) - 1
            continue
        if n_assets is None:
            n_assets = len(row) - 1
        if len(row) != n_assets + 1:
            raise PathError(f"{source}:{lineno}: expected {n_assets + 1} fields, got {len(row)}")
        try:
            t = _parse_time(row[0], time_format, origin)
            vals = np.array([float(c) for c in row[1:]])
        except ValueError as exc:
            raise PathError(f"{source}:{lineno}: {exc}") from None
        if not (math.isfinite(t) and np.isfinite(vals).all()):
            raise PathError(f"{source}:{lineno}: non-finite value")
        if price_transform == "log":
            if np.any(vals <= 0):
                raise PathError(f"{source}:{lineno}: log transform needs positive prices")
            vals = np.log(vals)
        yield lineno, t, vals


def read_tick_csv(source, *, time_format: str = "year", price_transform: str = "log") -> TimedPath:
    """Read a whole tick CSV (path or file object) into a :class:`TimedPath`."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
        name = os.fspath(source)
    else:
        text = source.read()
        name = getattr(source, "name", "<ticks>")
    times, rows = [], []
    prev = None
    for lineno, t, vals in parse_ticks(io.StringIO(text), time_format=time_format,
                                       price_transform=price_transform, source=name):
        if prev is not None and not t > prev:
            raise OutOfOrderTickError(f"{name}:{lineno}: time {t!r} is not after {prev!r}")
        prev = t
        times.append(t)
        rows.append(vals)
    if len(times) < 2:
        raise PathError(f"{name}: need at least 2 ticks, got {len(times)}")
    return TimedPath(np.array(times), np.vstack(rows))
