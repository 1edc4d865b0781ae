"""Monte-Carlo jump-diffusion generator and signature ensembles.

Log-prices follow an Euler scheme with Cholesky-correlated Gaussian shocks
and independent compound-Poisson log-normal jumps per asset.  The drift is
Merton-compensated so ``exp(x)`` has growth rate ``drift``::

    dx = (mu - sigma^2/2 - lambda*kappa) dt + sigma sqrt(dt) Z + sum of jumps
    kappa = exp(jump_mean + jump_std^2/2) - 1

Random numbers come from numpy's counter-based Philox generator.  Members
are grouped in fixed blocks of ``BLOCK`` and block ``b`` draws from the
stream keyed by ``(seed, b)``.  A member's path therefore depends only on
``(spec, seed, member index)``: not on ``n`` and not on the worker count.
"""
from __future__ import annotations

import json
import os
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .tensor_algebra import AlgebraShape, GroupElement, TruncatedTensor
from .errors import ModelError, ShapeMismatchError
from .path_signature import TimedPath, batch_signatures

__all__ = [
    "ModelSpec",
    "SignatureEnsemble",
    "simulate_log_prices",
    "generate_paths",
    "build_ensemble",
    "simulate_ensemble",
    "expected_signature",
    "expected_flow",
    "concat_ensembles",
    "BLOCK",
]

BLOCK = 256
_SEED_MAX = 2**64


def _vector(value, n, name):
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ModelError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ModelError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """Correlated jump-diffusion on log-prices over a uniform grid.

    Scalars given for vector fields are broadcast to every asset.  Jump
    parameters are shared by all assets; jumps are independent across
    assets.
    """

    n_assets: int
    drift: np.ndarray
    vol: np.ndarray
    correlation: np.ndarray | None = None
    jump_intensity: float = 0.0
    jump_mean: float = 0.0
    jump_std: float = 0.0
    horizon: float = 1.0
    steps: int = 252
    initial: np.ndarray | None = None
    _factor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n_assets
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ModelError(f"n_assets must be a positive integer, got {n!r}")
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("n_assets", int(n))
        set_("drift", _vector(self.drift, n, "drift"))
        set_("vol", _vector(self.vol, n, "vol"))
        set_("initial", _vector(0.0 if self.initial is None else self.initial, n, "initial"))
        corr = np.eye(n) if self.correlation is None else np.array(self.correlation, dtype=np.float64)
        if corr.shape != (n, n) or not np.isfinite(corr).all():
            raise ModelError(f"correlation must be a finite {n}x{n} matrix")
        if not np.array_equal(corr, corr.T):
            raise ModelError("correlation must be symmetric")
        if not np.all(np.diag(corr) == 1.0):
            raise ModelError("correlation must have unit diagonal")
        set_("correlation", corr)
        if np.any(self.vol < 0):
            raise ModelError("vol must be non-negative")
        for name in ("jump_intensity", "jump_mean", "jump_std", "horizon"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ModelError(f"{name} must be finite")
            set_(name, val)
        if self.jump_intensity < 0:
            raise ModelError("jump_intensity must be >= 0")
        if self.jump_std < 0:
            raise ModelError("jump_std must be >= 0")
        if not self.horizon > 0:
            raise ModelError("horizon must be > 0")
        if isinstance(self.steps, bool) or not isinstance(self.steps, (int, np.integer)) or self.steps < 1:
            raise ModelError(f"steps must be a positive integer, got {self.steps!r}")
        set_("steps", int(self.steps))
        for arr in (self.drift, self.vol, self.initial, self.correlation):
            arr.flags.writeable = False
        set_("_factor", _correlation_factor(corr))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)

    @property
    def jump_compensator(self) -> float:
        """lambda * kappa, the drift correction for the jump component."""
        if self.jump_intensity == 0.0:
            return 0.0
        return self.jump_intensity * np.expm1(self.jump_mean + 0.5 * self.jump_std**2)

    @property
    def log_drift(self) -> np.ndarray:
        """Per-year drift of the log-price."""
        return self.drift - 0.5 * self.vol**2 - self.jump_compensator

    @property
    def covariance(self) -> np.ndarray:
        """Per-year covariance of the diffusive log-price shocks."""
        return self.correlation * np.outer(self.vol, self.vol)

    def to_dict(self) -> dict:
        return {
            "n_assets": self.n_assets,
            "drift": self.drift.tolist(),
            "vol": self.vol.tolist(),
            "correlation": self.correlation.tolist(),
            "jump_intensity": self.jump_intensity,
            "jump_mean": self.jump_mean,
            "jump_std": self.jump_std,
            "horizon": self.horizon,
            "steps": self.steps,
            "initial": self.initial.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelSpec":
        if not isinstance(obj, dict):
            raise ModelError("model spec must be a JSON object")
        allowed = {f for f in cls.__dataclass_fields__ if not f.startswith("_")}
        unknown = set(obj) - allowed
        if unknown:
            raise ModelError(f"unknown model field(s): {', '.join(sorted(unknown))}")
        for key in ("n_assets", "drift", "vol"):
            if key not in obj:
                raise ModelError(f"missing model field {key!r}")
        return cls(**obj)

    def with_overrides(self, **kwargs) -> "ModelSpec":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self


def _correlation_factor(corr: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        pass
    # singular but PSD (e.g. perfectly correlated assets): factor via eigenvectors
    vals, vecs = np.linalg.eigh(corr)
    if vals.min() < -1e-10:
        raise ModelError(f"correlation is not positive semi-definite (min eigenvalue {vals.min():.3g})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _block_increments(spec: ModelSpec, seed: int, block: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=[seed, block]))
    shape = (BLOCK, spec.steps, spec.n_assets)
    dt = spec.dt
    z = rng.standard_normal(shape) @ spec._factor.T
    inc = spec.log_drift * dt + spec.vol * np.sqrt(dt) * z
    if spec.jump_intensity > 0.0:
        counts = rng.poisson(spec.jump_intensity * dt, size=shape)
        noise = rng.standard_normal(shape)
        inc += counts * spec.jump_mean + np.sqrt(counts) * spec.jump_std * noise
    return inc


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < _SEED_MAX:
        raise ModelError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def simulate_log_prices(spec: ModelSpec, n: int, seed: int, *, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(times (m,), log_prices (n, m, n_assets))`` with m = steps + 1."""
    seed = _check_seed(seed)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ModelError(f"n must be a positive integer, got {n!r}")
    n_blocks = -(-n // BLOCK)
    out = np.empty((n_blocks * BLOCK, spec.steps + 1, spec.n_assets))
    out[:, 0, :] = spec.initial

    def fill(b):
        rows = slice(b * BLOCK, (b + 1) * BLOCK)
        np.cumsum(_block_increments(spec, seed, b), axis=1, out=out[rows, 1:, :])
        out[rows, 1:, :] += spec.initial

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(n_blocks)))
    else:
        for b in range(n_blocks):
            fill(b)
    return spec.times, out[:n]


def generate_paths(spec: ModelSpec, n: int, seed: int, *, workers: int = 1) -> list[TimedPath]:
    """``n`` simulated log-price paths on the model's uniform grid."""
    times, logs = simulate_log_prices(spec, n, seed, workers=workers)
    return [TimedPath(times, logs[i]) for i in range(n)]


class SignatureEnsemble:
    """Terminal signatures of ``n`` paths, optionally with prefix flows.

    ``data`` is an (n, D) array of terminal signatures.  ``flows`` is an
    (n, G, D) array of prefix signatures at the times in ``grid`` (or None).
    Arrays are read-only.
    """

    def __init__(self, shape: AlgebraShape, data, flows=None, grid=None, seed: int | None = None):
        data = np.array(data, dtype=np.float64, copy=True)
        if data.ndim != 2 or data.shape[1] != shape.size:
            raise ShapeMismatchError(f"ensemble data must be (n, {shape.size}), got {data.shape}")
        if data.shape[0] == 0:
            raise ModelError("ensemble must have at least one member")
        if not np.all(data[:, 0] == 1.0):
            raise ModelError("ensemble members must have scalar level 1.0")
        if not np.isfinite(data).all():
            raise ModelError("ensemble contains non-finite coordinates")
        if (flows is None) != (grid is None):
            raise ModelError("flows and grid must be given together")
        if flows is not None:
            flows = np.array(flows, dtype=np.float64, copy=True)
            grid = np.array(grid, dtype=np.float64, copy=True).ravel()
            if flows.shape != (data.shape[0], grid.shape[0], shape.size):
                raise ShapeMismatchError(f"flows must be (n, {grid.shape[0]}, {shape.size}), got {flows.shape}")
            if grid.shape[0] == 0 or np.any(np.diff(grid) <= 0):
                raise ModelError("flow grid must be non-empty and strictly increasing")
            flows.flags.writeable = False
            grid.flags.writeable = False
        data.flags.writeable = False
        self.shape = shape
        self.data = data
        self.flows = flows
        self.grid = grid
        self.seed = seed

    def __len__(self):
        return self.data.shape[0]

    def member(self, i: int) -> GroupElement:
        return GroupElement(self.shape, self.data[i])

    @property
    def members(self) -> list[GroupElement]:
        return [self.member(i) for i in range(len(self))]

    def flow(self, i: int, g: int) -> GroupElement:
        self._need_flows()
        return GroupElement(self.shape, self.flows[i, g])

    @property
    def has_flows(self) -> bool:
        return self.flows is not None

    def _need_flows(self):
        if self.flows is None:
            raise ModelError("ensemble has no flows")

    def subset(self, indices) -> "SignatureEnsemble":
        idx = np.asarray(indices, dtype=np.int64)
        flows = None if self.flows is None else self.flows[idx]
        return SignatureEnsemble(self.shape, self.data[idx], flows, self.grid, self.seed)

    def save(self, path) -> None:
        """Write ``.npz`` (binary) or ``.json`` depending on the suffix."""
        path = os.fspath(path)
        if path.endswith(".json"):
            with open(path, "w") as fh:
                json.dump(self.to_json(), fh, sort_keys=True, allow_nan=False)
                fh.write("\n")
            return
        arrays = {"data": self.data, "dim": np.int64(self.shape.dim), "depth": np.int64(self.shape.depth)}
        if self.seed is not None:
            arrays["seed"] = np.uint64(self.seed)
        if self.flows is not None:
            arrays["flows"] = self.flows
            arrays["grid"] = self.grid
        _write_npz(path, arrays)

    @classmethod
    def load(cls, path) -> "SignatureEnsemble":
        path = os.fspath(path)
        if path.endswith(".json"):
            with open(path) as fh:
                return cls.from_json(json.load(fh))
        with np.load(path) as z:
            shape = AlgebraShape(int(z["dim"]), int(z["depth"]))
            seed = int(z["seed"]) if "seed" in z else None
            flows = z["flows"] if "flows" in z else None
            grid = z["grid"] if "grid" in z else None
            return cls(shape, z["data"], flows, grid, seed)

    def to_json(self) -> dict:
        return {
            "dim": self.shape.dim,
            "depth": self.shape.depth,
            "seed": self.seed,
            "members": self.data.tolist(),
            "grid": None if self.grid is None else self.grid.tolist(),
            "flows": None if self.flows is None else self.flows.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SignatureEnsemble":
        try:
            shape = AlgebraShape(obj["dim"], obj["depth"])
            return cls(shape, np.asarray(obj["members"], dtype=np.float64).reshape(-1, shape.size),
                       obj.get("flows"), obj.get("grid"), obj.get("seed"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed ensemble JSON: {exc}") from exc


def _write_npz(path, arrays: dict) -> None:
    # np.savez stamps entries with the current time; a fixed stamp keeps files byte-identical
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            with zf.open(info, "w", force_zip64=True) as fh:
                np.lib.format.write_array(fh, np.asanyarray(arrays[name]), allow_pickle=False)


def _refine(times: np.ndarray, values: np.ndarray, grid: np.ndarray):
    """Insert linearly interpolated knots at grid times; return points and grid indices."""
    new_t = np.union1d(times, grid)
    pts = np.empty(values.shape[:-2] + (new_t.shape[0], values.shape[-1] + 1))
    pts[..., 0] = new_t
    # linear interpolation along the time axis, vectorised over paths and assets
    j = np.clip(np.searchsorted(times, new_t, side="right") - 1, 0, times.shape[0] - 2)
    frac = (new_t - times[j]) / (times[j + 1] - times[j])
    lo, hi = values[..., j, :], values[..., j + 1, :]
    interp = lo + frac[:, None] * (hi - lo)
    exact = np.isin(new_t, times)
    interp[..., exact, :] = values[..., np.searchsorted(times, new_t[exact]), :]
    pts[..., 1:] = interp
    return pts, np.searchsorted(new_t, grid)


def _check_grid(grid, t0, t1):
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.shape[0] == 0 or np.any(np.diff(grid) <= 0):
        raise ModelError("flow grid must be non-empty and strictly increasing")
    if grid[0] < t0 or grid[-1] > t1:
        raise ModelError(f"flow grid [{grid[0]}, {grid[-1]}] outside path horizon [{t0}, {t1}]")
    return grid


def _ensemble_from_arrays(times, values, shape, flow_grid, seed):
    if shape.dim != values.shape[-1] + 1:
        raise ShapeMismatchError(f"paths have {values.shape[-1]} assets, shape.dim must be {values.shape[-1] + 1}")
    if flow_grid is None:
        pts = np.concatenate([np.broadcast_to(times[None, :, None], values.shape[:2] + (1,)), values], axis=2)
        sigs, _ = batch_signatures(pts, shape)
        return SignatureEnsemble(shape, sigs, seed=seed)
    grid = _check_grid(flow_grid, times[0], times[-1])
    pts, idx = _refine(times, values, grid)
    sigs, flows = batch_signatures(pts, shape, idx)
    return SignatureEnsemble(shape, sigs, flows, grid, seed)


def build_ensemble(paths: Sequence[TimedPath], shape: AlgebraShape, flow_grid=None, seed: int | None = None) -> SignatureEnsemble:
    """Signatures of ``paths`` plus prefix flows at ``flow_grid`` times.

    Grid times between knots are handled by inserting an interpolated knot,
    which leaves the terminal signature unchanged.
    """
    if len(paths) == 0:
        raise ModelError("need at least one path")
    n_assets = {p.n_assets for p in paths}
    if len(n_assets) != 1:
        raise ModelError(f"paths disagree on asset count: {sorted(n_assets)}")
    first = paths[0].times
    if all(p.times.shape == first.shape and np.array_equal(p.times, first) for p in paths):
        values = np.stack([p.values for p in paths])
        return _ensemble_from_arrays(first, values, shape, flow_grid, seed)
    parts = [_ensemble_from_arrays(p.times, p.values[None], shape, flow_grid, seed) for p in paths]
    return concat_ensembles(parts)


def simulate_ensemble(spec: ModelSpec, n: int, seed: int, shape: AlgebraShape, flow_grid=None, *, workers: int = 1) -> SignatureEnsemble:
    """generate_paths followed by build_ensemble, without per-path objects."""
    times, logs = simulate_log_prices(spec, n, seed, workers=workers)
    return _ensemble_from_arrays(times, logs, shape, flow_grid, seed)


def expected_signature(ens: SignatureEnsemble) -> TruncatedTensor:
    """Coordinatewise mean of the members.

    The mean of group-like elements is generally not group-like, so a plain
    TruncatedTensor is returned even though its scalar level is 1.
    """
    if len(ens) == 0:
        raise ModelError("empty ensemble")
    return TruncatedTensor(ens.shape, ens.data.mean(axis=0), copy=False)


def expected_flow(ens: SignatureEnsemble) -> np.ndarray:
    """(G, D) array of mean prefix signatures on the ensemble grid."""
    ens._need_flows()
    return ens.flows.mean(axis=0)


def concat_ensembles(parts: Sequence[SignatureEnsemble]) -> SignatureEnsemble:
    if not parts:
        raise ModelError("nothing to concatenate")
    shape = parts[0].shape
    if any(p.shape != shape for p in parts):
        raise ShapeMismatchError("ensembles disagree on shape")
    data = np.concatenate([p.data for p in parts])
    if all(p.flows is not None for p in parts):
        grid = parts[0].grid
        if any(not np.array_equal(p.grid, grid) for p in parts):
            raise ModelError("ensembles disagree on flow grid")
        return SignatureEnsemble(shape, data, np.concatenate([p.flows for p in parts]), grid, parts[0].seed)
    return SignatureEnsemble(shape, data, seed=parts[0].seed)
