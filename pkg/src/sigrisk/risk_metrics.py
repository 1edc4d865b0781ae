"""Loss functional, signature VaR/ES, exposure profiles and path-wise solvency.

A portfolio is a weight tensor ``w`` and an initial value ``V0``; its value
on a signature ``S`` is ``<w, S>`` and its loss is ``V0 - <w, S>``.  Because
the loss is linear in ``S``, the mean loss over the tail set equals the loss
evaluated at the tail-conditional mean signature, and
:func:`tail_analysis` computes and cross-checks both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor_algebra import AlgebraShape, TruncatedTensor, inner_product, tensor_to_json
from .errors import RiskError, ShapeMismatchError, TruncationError
from .market_models import SignatureEnsemble

__all__ = [
    "PortfolioSpec",
    "TailResult",
    "TEPResult",
    "loss",
    "member_losses",
    "tail_count",
    "tail_analysis",
    "levy_gap_indicator",
    "levy_share",
    "member_value_paths",
    "tep",
    "tep_variance",
    "pathwise_solvency",
    "DUAL_RTOL",
]

# direct and decomposed ES must agree to this relative tolerance
DUAL_RTOL = 1e-9


@dataclass(frozen=True)
class PortfolioSpec:
    weights: TruncatedTensor
    initial_value: float = 0.0
    label: str = "portfolio"

    def __post_init__(self):
        if not isinstance(self.weights, TruncatedTensor):
            raise RiskError("portfolio weights must be a TruncatedTensor")
        v0 = float(self.initial_value)
        if not math.isfinite(v0):
            raise RiskError("initial_value must be finite")
        object.__setattr__(self, "initial_value", v0)
        # keep weights as a plain tensor even if the caller passed a group element
        object.__setattr__(self, "weights", self.weights.as_tensor())

    @property
    def shape(self) -> AlgebraShape:
        return self.weights.shape

    def value(self, sig: TruncatedTensor) -> float:
        return inner_product(self.weights, sig)

    def scaled(self, factor: float) -> "PortfolioSpec":
        return PortfolioSpec(self.weights * factor, self.initial_value * factor, self.label)


def _check_shape(portfolio: PortfolioSpec, shape: AlgebraShape):
    if portfolio.shape != shape:
        raise ShapeMismatchError(f"portfolio shape {portfolio.shape} vs {shape}")


def loss(portfolio: PortfolioSpec, sig: TruncatedTensor) -> float:
    """``V0 - <w, sig>``."""
    _check_shape(portfolio, sig.shape)
    return portfolio.initial_value - inner_product(portfolio.weights, sig)


def member_losses(portfolio: PortfolioSpec, ens: SignatureEnsemble) -> np.ndarray:
    _check_shape(portfolio, ens.shape)
    return portfolio.initial_value - ens.data @ portfolio.weights.data


def tail_count(n: int, alpha: float) -> int:
    """floor(n (1 - alpha)), at least 1."""
    return max(1, math.floor(n * (1.0 - alpha)))


def _level2_blocks(t: TruncatedTensor, time_channel: bool):
    if t.shape.depth < 2:
        raise TruncationError("level-2 statistics need depth >= 2")
    m = t.level_matrix(2)
    if time_channel:
        m = m[1:, 1:]
    return 0.5 * (m + m.T), 0.5 * (m - m.T)


def levy_gap_indicator(t: TruncatedTensor, *, time_channel: bool = True) -> float:
    """``||Anti||_F^2 - ||Sym||_F^2`` on the asset block of level 2.

    With ``time_channel=True`` row and column 0 are dropped first.
    """
    sym, anti = _level2_blocks(t, time_channel)
    return float(np.sum(anti * anti) - np.sum(sym * sym))


def levy_share(t: TruncatedTensor, *, time_channel: bool = True) -> float:
    """Fraction of the asset-block level-2 Frobenius mass that is antisymmetric."""
    sym, anti = _level2_blocks(t, time_channel)
    a, s = float(np.sum(anti * anti)), float(np.sum(sym * sym))
    return a / (a + s) if a + s > 0 else 0.0


@dataclass(frozen=True)
class TailResult:
    alpha: float
    tail_count: int
    s_var: float
    s_es: float
    s_es_decomposed: float
    tail_signature: TruncatedTensor
    tail_indices: np.ndarray
    tail_levy_share: float | None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "tail_count": self.tail_count,
            "s_var": self.s_var,
            "s_es": self.s_es,
            "s_es_decomposed": self.s_es_decomposed,
            "tail_indices": [int(i) for i in self.tail_indices],
            "tail_levy_share": self.tail_levy_share,
            "tail_signature": tensor_to_json(self.tail_signature),
        }


def tail_analysis(portfolio: PortfolioSpec, ens: SignatureEnsemble, alpha: float, *,
                  time_channel: bool = True) -> TailResult:
    """Signature VaR and ES at level ``alpha`` over the ensemble.

    Losses are sorted descending with ties broken by ascending member index.
    ES is computed directly as the mean tail loss and again as
    ``V0 - <w, mean tail signature>``; a disagreement beyond ``DUAL_RTOL``
    (relative to the magnitude of the terms involved) raises.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise RiskError(f"alpha must lie in (0, 1), got {alpha}", code="risk_metrics.invalid_alpha")
    if len(ens) == 0:
        raise RiskError("empty ensemble")
    losses = member_losses(portfolio, ens)
    order = np.argsort(-losses, kind="stable")
    k = tail_count(len(ens), alpha)
    tail = order[:k]
    tail_losses = losses[tail]
    s_var = float(tail_losses[-1])
    s_es = math.fsum(tail_losses.tolist()) / k
    tail_sig = TruncatedTensor(ens.shape, ens.data[tail].mean(axis=0), copy=False)
    contraction = inner_product(portfolio.weights, tail_sig)
    decomposed = portfolio.initial_value - contraction
    scale = max(abs(s_es), abs(portfolio.initial_value) + float(np.abs(portfolio.weights.data) @ np.abs(tail_sig.data)))
    if abs(s_es - decomposed) > DUAL_RTOL * scale:
        raise RiskError(f"ES cross-check failed: direct {s_es!r} vs decomposed {decomposed!r}",
                        code="risk_metrics.dual_mismatch")
    share = levy_share(tail_sig, time_channel=time_channel) if ens.shape.depth >= 2 else None
    tail.flags.writeable = False
    return TailResult(alpha, k, s_var, s_es, decomposed, tail_sig, tail, share)


@dataclass(frozen=True)
class TEPResult:
    grid: np.ndarray
    values: np.ndarray
    min_value: float
    solvency_prob: float

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "min_value": self.min_value,
            "solvency_prob": self.solvency_prob,
        }


def member_value_paths(portfolio: PortfolioSpec, ens: SignatureEnsemble) -> np.ndarray:
    """(n, G) array of ``<w, flow_i(s)>``."""
    _check_shape(portfolio, ens.shape)
    if not ens.has_flows:
        raise RiskError("ensemble has no flows", code="risk_metrics.missing_flows")
    return ens.flows @ portfolio.weights.data


def tep(portfolio: PortfolioSpec, ens: SignatureEnsemble, threshold: float = 0.0) -> TEPResult:
    """Expected value at each grid time, ``<w, mean flow(s)>``.

    ``solvency_prob`` is the path-wise solvency probability at ``threshold``.
    """
    _check_shape(portfolio, ens.shape)
    if not ens.has_flows:
        raise RiskError("ensemble has no flows", code="risk_metrics.missing_flows")
    mean_flow = ens.flows.mean(axis=0)
    values = mean_flow @ portfolio.weights.data
    prob, _ = pathwise_solvency(portfolio, ens, threshold, 0.5)
    return TEPResult(ens.grid.copy(), values, float(values.min()), prob)


def tep_variance(portfolio: PortfolioSpec, ens: SignatureEnsemble) -> float:
    """Cross-member variance of the value path, averaged over the grid."""
    return float(member_value_paths(portfolio, ens).var(axis=0).mean())


def pathwise_solvency(portfolio: PortfolioSpec, ens: SignatureEnsemble, threshold: float,
                      epsilon: float) -> tuple[float, bool]:
    """Fraction of members whose value stays ``>= threshold`` at every grid time."""
    if not 0.0 < epsilon < 1.0:
        raise RiskError(f"epsilon must lie in (0, 1), got {epsilon}")
    mins = member_value_paths(portfolio, ens).min(axis=1)
    prob = float(np.count_nonzero(mins >= threshold)) / len(ens)
    return prob, prob >= 1.0 - epsilon
