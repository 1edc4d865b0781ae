"""Measure-bridge operators and algebraic stress scenarios.

A bridge ``L`` maps a physical expected signature to a risk-neutral one by
right multiplication, ``phi_q = phi_p (x) L``.  A stress scenario is a
further group-like factor ``dL`` composed on the right of a base bridge.
Scenario severity is the weighted norm of ``log(dL)``.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .tensor_algebra import (
    AlgebraShape,
    GroupElement,
    TruncatedTensor,
    basis,
    identity,
    inner_product,
    tensor_exp,
    tensor_log,
    tensor_product,
    tensor_to_json,
    weighted_norm,
)
from .errors import NotGroupLikeError, ShapeMismatchError, SigRiskError, StressError
from .io import tensor_from_obj
from .risk_metrics import PortfolioSpec

__all__ = [
    "BridgeOperator",
    "StressScenario",
    "SCENARIO_KINDS",
    "apply_bridge",
    "compose_stress",
    "make_antisymmetric_shock",
    "make_symmetric_shock",
    "make_correlation_break",
    "custom_scenario",
    "resilience_check",
    "shock_pnl",
    "scenario_to_json",
    "scenario_from_json",
    "load_scenarios",
]

SCENARIO_KINDS = ("antisymmetric_shock", "correlation_break", "custom")


@dataclass(frozen=True)
class BridgeOperator:
    op: GroupElement
    label: str = "bridge"

    def __post_init__(self):
        if not isinstance(self.op, TruncatedTensor):
            raise StressError("bridge operator must be a tensor")
        if not self.op.is_group_like():
            raise NotGroupLikeError(f"bridge operator needs scalar level 1.0, got {self.op.scalar!r}")
        object.__setattr__(self, "op", self.op.as_group())

    @property
    def shape(self) -> AlgebraShape:
        return self.op.shape

    @classmethod
    def identity(cls, shape: AlgebraShape, label: str = "identity") -> "BridgeOperator":
        return cls(identity(shape), label)


@dataclass(frozen=True)
class StressScenario:
    """Named perturbation; ``generator_norm`` is always recomputed from the operator."""

    name: str
    perturbation: BridgeOperator
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    level_weights: tuple | None = None
    generator_norm: float = field(init=False)

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise StressError(f"unknown scenario kind {self.kind!r}")
        if self.level_weights is not None:
            object.__setattr__(self, "level_weights", tuple(float(w) for w in self.level_weights))
        norm = weighted_norm(tensor_log(self.perturbation.op), self.level_weights)
        object.__setattr__(self, "generator_norm", norm)

    @property
    def shape(self) -> AlgebraShape:
        return self.perturbation.shape


def apply_bridge(phi_p: TruncatedTensor, bridge: BridgeOperator) -> TruncatedTensor:
    """``phi_p (x) bridge.op``."""
    return tensor_product(phi_p, bridge.op)


def compose_stress(base: BridgeOperator, delta: BridgeOperator) -> BridgeOperator:
    """``base (x) delta``: the base bridge first, then the perturbation."""
    return BridgeOperator(tensor_product(base.op, delta.op), f"{base.label}*{delta.label}")


def _check_pair(shape: AlgebraShape, pair, time_channel: bool) -> tuple[int, int]:
    try:
        i, j = (int(x) for x in pair)
    except (TypeError, ValueError):
        raise StressError(f"pair must be two channel indices, got {pair!r}") from None
    if i == j:
        raise StressError(f"pair needs two distinct channels, got ({i}, {j})")
    low = 1 if time_channel else 0
    for c in (i, j):
        if c == 0 and time_channel:
            raise StressError("channel 0 is the time channel and cannot be shocked")
        if not low <= c < shape.dim:
            raise StressError(f"channel {c} outside {low}..{shape.dim - 1}")
    if shape.depth < 2:
        raise StressError("stress generators live at level 2; depth must be >= 2")
    return i, j


def _pair_generator(shape, i, j, a, b):
    # a * e_ij + b * e_ji
    return basis(shape, (i, j), a) + basis(shape, (j, i), b)


def make_antisymmetric_shock(shape: AlgebraShape, pair, magnitude: float, *, time_channel: bool = True,
                             level_weights=None, name: str | None = None) -> StressScenario:
    """``exp(a (e_ij - e_ji))``: pure Levy-area shock, no level-1 or symmetric level-2 change."""
    i, j = _check_pair(shape, pair, time_channel)
    a = float(magnitude)
    if not math.isfinite(a):
        raise StressError("magnitude must be finite")
    op = tensor_exp(_pair_generator(shape, i, j, a, -a))
    return StressScenario(name or f"antisymmetric_{i}_{j}", BridgeOperator(op, "antisymmetric_shock"),
                          "antisymmetric_shock", {"pair": [i, j], "magnitude": a},
                          level_weights=level_weights)


def make_symmetric_shock(shape: AlgebraShape, pair, magnitude: float, *, time_channel: bool = True,
                         level_weights=None, name: str | None = None) -> StressScenario:
    """``exp(b (e_ij + e_ji))``: covariance-type shock with no Levy area."""
    i, j = _check_pair(shape, pair, time_channel)
    b = float(magnitude)
    op = tensor_exp(_pair_generator(shape, i, j, b, b))
    return StressScenario(name or f"symmetric_{i}_{j}", BridgeOperator(op, "symmetric_shock"),
                          "custom", {"pair": [i, j], "magnitude": b, "generator": "symmetric"},
                          level_weights=level_weights)


def make_correlation_break(shape: AlgebraShape, pair, base_phi: TruncatedTensor, *, time_channel: bool = True,
                           level_weights=None, name: str | None = None) -> StressScenario:
    """Perturbation that zeroes the symmetric (i, j) level-2 coordinate of ``base_phi (x) dL``.

    ``dL = exp(-s (e_ij + e_ji))`` with ``s = Sym(base_phi^(2))_ij``.  The
    antisymmetric (i, j) coordinate of the stressed tensor is reported in
    ``params["stressed_anti"]``.
    """
    i, j = _check_pair(shape, pair, time_channel)
    if base_phi.shape != shape:
        raise ShapeMismatchError(f"base shape {base_phi.shape} vs {shape}")
    if not base_phi.is_group_like():
        raise NotGroupLikeError("correlation break needs a base with scalar level 1.0")
    m = base_phi.level_matrix(2)
    s = 0.5 * (m[i, j] + m[j, i])
    op = tensor_exp(_pair_generator(shape, i, j, -s, -s))
    stressed = tensor_product(base_phi, op).level_matrix(2)
    params = {"pair": [i, j], "s": float(s), "stressed_anti": float(0.5 * (stressed[i, j] - stressed[j, i]))}
    return StressScenario(name or f"correlation_break_{i}_{j}", BridgeOperator(op, "correlation_break"),
                          "correlation_break", params, level_weights=level_weights)


def custom_scenario(name: str, op: TruncatedTensor, *, params: dict | None = None, provenance: dict | None = None,
                    level_weights=None) -> StressScenario:
    return StressScenario(name, BridgeOperator(op, name), "custom", dict(params or {}), dict(provenance or {}),
                          level_weights)


def resilience_check(scenario: StressScenario, rho: float) -> tuple[bool, float]:
    """``(generator_norm <= rho, generator_norm)``."""
    rho = float(rho)
    if not rho > 0:
        raise StressError(f"rho must be positive, got {rho}")
    return scenario.generator_norm <= rho, scenario.generator_norm


def shock_pnl(portfolio: PortfolioSpec, base_phi: TruncatedTensor, scenario: StressScenario | BridgeOperator) -> float:
    """Value change ``<w, base (x) dL> - <w, base>``."""
    op = scenario.perturbation if isinstance(scenario, StressScenario) else scenario
    stressed = apply_bridge(base_phi, op)
    return inner_product(portfolio.weights, stressed) - inner_product(portfolio.weights, base_phi)


def scenario_to_json(scenario: StressScenario) -> dict:
    return {
        "name": scenario.name,
        "kind": scenario.kind,
        "params": scenario.params,
        "operator": tensor_to_json(scenario.perturbation.op),
        "provenance": scenario.provenance,
        "generator_norm": scenario.generator_norm,
    }


def scenario_from_json(obj: dict, shape: AlgebraShape | None = None, *, level_weights=None,
                       time_channel: bool = True) -> StressScenario:
    """Parse ``{name, kind, params, operator?, provenance?}``.

    Without an operator, antisymmetric shocks are rebuilt from ``pair`` and
    ``magnitude`` and correlation breaks from ``pair`` and ``s``; ``shape``
    must then be given.  Any stored ``generator_norm`` is ignored.
    """
    if not isinstance(obj, dict):
        raise StressError("scenario must be a JSON object")
    name = obj.get("name")
    kind = obj.get("kind", "custom")
    params = obj.get("params") or {}
    if not isinstance(name, str) or not name:
        raise StressError("scenario needs a non-empty 'name'")
    if kind not in SCENARIO_KINDS:
        raise StressError(f"unknown scenario kind {kind!r}")
    if not isinstance(params, dict):
        raise StressError("'params' must be an object")
    provenance = obj.get("provenance") or {}
    if obj.get("operator") is not None:
        try:
            op = tensor_from_obj(obj["operator"], shape, where=f"scenario {name!r} operator")
        except SigRiskError as exc:
            raise StressError(f"scenario {name!r}: {exc}") from exc
        if shape is not None and op.shape != shape:
            raise ShapeMismatchError(f"scenario {name!r} operator shape {op.shape} vs engine {shape}")
        return StressScenario(name, BridgeOperator(op, name), kind, params, provenance, level_weights)
    if shape is None:
        raise StressError(f"scenario {name!r} has no operator and no shape to build one")
    try:
        if kind == "antisymmetric_shock":
            sc = make_antisymmetric_shock(shape, params["pair"], params["magnitude"], time_channel=time_channel,
                                          level_weights=level_weights, name=name)
        elif kind == "correlation_break":
            i, j = _check_pair(shape, params["pair"], time_channel)
            s = float(params["s"])
            op = tensor_exp(_pair_generator(shape, i, j, -s, -s))
            sc = StressScenario(name, BridgeOperator(op, "correlation_break"), kind, params,
                                level_weights=level_weights)
        else:
            raise StressError(f"custom scenario {name!r} needs an 'operator'")
    except KeyError as exc:
        raise StressError(f"scenario {name!r} missing parameter {exc}") from None
    return StressScenario(sc.name, sc.perturbation, kind, params, provenance, level_weights)


def load_scenarios(source, shape: AlgebraShape | None = None, **kwargs) -> list[StressScenario]:
    """Load one scenario file or every ``*.json`` in a directory (sorted by file name)."""
    source = os.fspath(source)
    files = [source]
    if os.path.isdir(source):
        files = sorted(os.path.join(source, f) for f in os.listdir(source) if f.endswith(".json"))
        if not files:
            raise StressError(f"no *.json scenarios in {source}")
    out = []
    for path in files:
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise StressError(f"{path}:{exc.lineno}: {exc.msg}") from None
        items = obj if isinstance(obj, list) else [obj]
        out.extend(scenario_from_json(item, shape, **kwargs) for item in items)
    return out
