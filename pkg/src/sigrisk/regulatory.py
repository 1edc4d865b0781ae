"""Payoff linearisation, P&L attribution, geometric delta, hedging and capital.

Values are linear in the expected signature, so the delta of a portfolio is
its weight tensor and a hedge holding ``-w`` on levels ``1..r`` removes every
exposure up to level ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from .tensor_algebra import AlgebraShape, TruncatedTensor, tensor_to_json
from .errors import RegulatoryError, ShapeMismatchError
from .market_models import SignatureEnsemble
from .risk_metrics import PortfolioSpec

__all__ = [
    "PayoffFit",
    "PLAThresholds",
    "PLAReport",
    "CapitalReport",
    "fit_payoff_weights",
    "geometric_delta",
    "build_hedge",
    "combine",
    "spearman",
    "pla_test",
    "capital_charge",
    "DEFAULT_RIDGE",
]

# ridge strength relative to the mean diagonal of the equilibrated Gram matrix
DEFAULT_RIDGE = 1e-8
REFINE_STEPS = 2


@dataclass(frozen=True)
class PayoffFit:
    weights: TruncatedTensor
    depth_used: int
    in_sample_rmse: float
    residual_by_depth: tuple[float, ...]
    ridge: float

    def rmse_at(self, depth: int) -> float:
        return self.residual_by_depth[depth - 1]

    def to_dict(self) -> dict:
        return {
            "depth_used": self.depth_used,
            "in_sample_rmse": self.in_sample_rmse,
            "residual_by_depth": list(self.residual_by_depth),
            "ridge": self.ridge,
            "weights": tensor_to_json(self.weights),
        }


def _as_matrix(sigs, shape: AlgebraShape | None):
    if isinstance(sigs, SignatureEnsemble):
        return sigs.data, sigs.shape
    if isinstance(sigs, np.ndarray) and sigs.ndim == 2:
        if shape is None:
            raise RegulatoryError("a shape is needed with a raw signature matrix")
        return sigs, shape
    sigs = list(sigs)
    if not sigs:
        raise RegulatoryError("no signatures given")
    shape = sigs[0].shape
    if any(s.shape != shape for s in sigs):
        raise ShapeMismatchError("signatures disagree on shape")
    return np.stack([s.data for s in sigs]), shape


def _solve(x: np.ndarray, y: np.ndarray, ridge: float | None):
    scale = np.sqrt(np.mean(x * x, axis=0))
    scale[scale == 0] = 1.0
    xs = x / scale
    gram = xs.T @ xs
    rhs = xs.T @ y
    lam = DEFAULT_RIDGE if ridge is None else float(ridge)
    lam_abs = lam * np.trace(gram) / gram.shape[0]
    try:
        factor = scipy.linalg.cho_factor(gram + lam_abs * np.eye(gram.shape[0]), lower=True)
    except np.linalg.LinAlgError:
        raise RegulatoryError("design matrix is rank deficient; enable ridge regularisation",
                              code="regulatory.degenerate_design") from None
    beta = scipy.linalg.cho_solve(factor, rhs)
    # iterated Tikhonov: each pass shrinks the ridge bias by lam / eigenvalue
    for _ in range(REFINE_STEPS):
        beta = beta + scipy.linalg.cho_solve(factor, xs.T @ (y - xs @ beta))
    beta = beta / scale
    resid = x @ beta - y
    return beta, math.sqrt(float(np.mean(resid * resid)))


def fit_payoff_weights(payoffs, sigs, depth: int, *, shape: AlgebraShape | None = None,
                       ridge: float | None = None) -> PayoffFit:
    """Least-squares weights on signature coordinates of levels ``0..depth``.

    Columns are equilibrated to unit RMS and solved by Cholesky on the
    normal equations with ridge ``ridge * trace(G) / p`` (default
    ``DEFAULT_RIDGE``), followed by ``REFINE_STEPS`` iterated-Tikhonov
    corrections that remove the ridge bias in well-determined directions.
    Constant columns such as the time channel make the plain design
    singular, so the ridge is on by default; ``ridge=0`` fails loudly on a
    singular design.  The fit is repeated for every depth
    ``1..depth`` to give ``residual_by_depth``.
    """
    x, shape = _as_matrix(sigs, shape)
    y = np.asarray(payoffs, dtype=np.float64).ravel()
    if y.shape[0] != x.shape[0]:
        raise RegulatoryError(f"{y.shape[0]} payoffs for {x.shape[0]} signatures")
    if not np.isfinite(y).all():
        raise RegulatoryError("payoffs must be finite")
    if not 1 <= depth <= shape.depth:
        raise RegulatoryError(f"depth must be in 1..{shape.depth}, got {depth}")
    if ridge is not None and ridge < 0:
        raise RegulatoryError("ridge must be >= 0")
    residuals = []
    beta = None
    for r in range(1, depth + 1):
        p = shape.offsets[r + 1]
        beta, rmse = _solve(x[:, :p], y, ridge)
        residuals.append(rmse)
    w = np.zeros(shape.size)
    w[: beta.shape[0]] = beta
    lam = DEFAULT_RIDGE if ridge is None else float(ridge)
    return PayoffFit(TruncatedTensor(shape, w, copy=False), depth, residuals[-1], tuple(residuals), lam)


def geometric_delta(portfolio: PortfolioSpec) -> TruncatedTensor:
    """Gradient of value with respect to the expected signature: the weights themselves."""
    return portfolio.weights


def build_hedge(portfolio: PortfolioSpec, level: int) -> PortfolioSpec:
    """Hedge holding ``-w`` on levels ``1..level`` and nothing else."""
    shape = portfolio.shape
    if not 1 <= level <= shape.depth:
        raise RegulatoryError(f"hedge level must be in 1..{shape.depth}, got {level}")
    h = np.zeros(shape.size)
    sl = slice(shape.offsets[1], shape.offsets[level + 1])
    h[sl] = -portfolio.weights.data[sl]
    return PortfolioSpec(TruncatedTensor(shape, h, copy=False), 0.0, f"hedge({portfolio.label},{level})")


def combine(*portfolios: PortfolioSpec, label: str = "combined") -> PortfolioSpec:
    """Sum of weights and initial values."""
    if not portfolios:
        raise RegulatoryError("nothing to combine")
    w = portfolios[0].weights
    for p in portfolios[1:]:
        w = w + p.weights
    return PortfolioSpec(w, math.fsum(p.initial_value for p in portfolios), label)


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties; NaN if either side is constant."""
    ra = scipy.stats.rankdata(a)
    rb = scipy.stats.rankdata(b)
    if np.all(ra == ra[0]) or np.all(rb == rb[0]):
        return math.nan
    if np.array_equal(ra, rb):
        return 1.0
    da, db = ra - ra.mean(), rb - rb.mean()
    rho = float(da @ db / math.sqrt(float(da @ da) * float(db @ db)))
    return max(-1.0, min(1.0, rho))


@dataclass(frozen=True)
class PLAThresholds:
    spearman_green: float = 0.80
    spearman_amber: float = 0.70
    ks_green: float = 0.09
    ks_amber: float = 0.12

    def zone(self, rho: float, ks: float) -> str:
        if math.isnan(rho):
            return "red"
        if rho >= self.spearman_green and ks <= self.ks_green:
            return "green"
        if rho >= self.spearman_amber and ks <= self.ks_amber:
            return "amber"
        return "red"


@dataclass(frozen=True)
class PLAReport:
    spearman: float
    ks_stat: float
    unexplained: np.ndarray
    zone: str
    degenerate: bool = False
    rtpl: np.ndarray = field(default=None, repr=False)
    hpl: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "spearman": None if math.isnan(self.spearman) else self.spearman,
            "ks_stat": self.ks_stat,
            "zone": self.zone,
            "degenerate": self.degenerate,
            "max_abs_unexplained": float(np.max(np.abs(self.unexplained))),
            "unexplained": self.unexplained.tolist(),
        }


def pla_test(portfolio: PortfolioSpec, phi_series, realised_hpl=None,
             thresholds: PLAThresholds = PLAThresholds()) -> PLAReport:
    """P&L attribution between risk-theoretical and hypothetical P&L.

    ``RTPL_t = <w, phi_{t+1} - phi_t>``.  Without ``realised_hpl`` the HPL of
    a signature-linear book is the same contraction, so the unexplained P&L
    is identically zero.
    """
    if isinstance(phi_series, np.ndarray):
        phis = np.asarray(phi_series, dtype=np.float64)
    else:
        phi_series = list(phi_series)
        if any(p.shape != portfolio.shape for p in phi_series):
            raise ShapeMismatchError("phi series shape does not match the portfolio")
        phis = np.stack([p.data for p in phi_series]) if phi_series else np.empty((0, portfolio.shape.size))
    if phis.ndim != 2 or phis.shape[1] != portfolio.shape.size:
        raise ShapeMismatchError(f"phi series must be (T, {portfolio.shape.size})")
    if phis.shape[0] < 2:
        raise RegulatoryError("PLA needs at least 2 observations")
    values = phis @ portfolio.weights.data
    rtpl = np.diff(values)
    if realised_hpl is None:
        hpl = rtpl.copy()
    else:
        hpl = np.asarray(realised_hpl, dtype=np.float64).ravel()
        if hpl.shape != rtpl.shape:
            raise RegulatoryError(f"HPL has {hpl.shape[0]} entries, expected {rtpl.shape[0]}")
    rho = spearman(hpl, rtpl)
    ks = float(scipy.stats.ks_2samp(hpl, rtpl).statistic)
    degenerate = math.isnan(rho)
    return PLAReport(rho, ks, hpl - rtpl, thresholds.zone(rho, ks), degenerate, rtpl, hpl)


@dataclass(frozen=True)
class CapitalReport:
    weighted_sensitivities: TruncatedTensor
    charge: float
    rrao_residual: float

    def to_dict(self) -> dict:
        return {
            "charge": self.charge,
            "rrao_residual": self.rrao_residual,
            "weighted_sensitivities": tensor_to_json(self.weighted_sensitivities),
        }


def capital_charge(portfolio: PortfolioSpec, risk_weights: TruncatedTensor, fit: PayoffFit | None = None,
                   level: int | None = None) -> CapitalReport:
    """ℓ2 norm of the risk-weighted geometric delta.

    The scalar (level-0) coordinate is cash, not a risk factor, and carries
    no sensitivity.  ``rrao_residual`` is the fit RMSE at depth ``level`` when
    a fit is given, otherwise the norm of the weights above ``level``.
    """
    shape = portfolio.shape
    if risk_weights.shape != shape:
        raise ShapeMismatchError(f"risk weights shape {risk_weights.shape} vs {shape}")
    if np.any(risk_weights.data < 0):
        raise RegulatoryError("risk weights must be non-negative", code="regulatory.negative_risk_weight")
    level = shape.depth if level is None else int(level)
    if not 1 <= level <= shape.depth:
        raise RegulatoryError(f"level must be in 1..{shape.depth}, got {level}")
    ws = risk_weights.data * geometric_delta(portfolio).data
    ws[0] = 0.0
    charge = float(np.linalg.norm(ws))
    if fit is not None:
        if level > fit.depth_used:
            raise RegulatoryError(f"fit only covers depths up to {fit.depth_used}")
        rrao = fit.rmse_at(level)
    else:
        rrao = float(np.linalg.norm(portfolio.weights.data[shape.offsets[level + 1]:]))
    return CapitalReport(TruncatedTensor(shape, ws, copy=False), charge, rrao)
