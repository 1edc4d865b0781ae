"""Signature-based risk engine.

Portfolios are linear functionals on truncated path signatures.  The
submodules cover the tensor algebra, signatures of tick paths, Monte-Carlo
ensembles, tail risk, stress operators, streaming monitoring and
regulatory reporting.
"""
from . import _kernels
from .errors import SigRiskError
from .tensor_algebra import (
    AlgebraShape,
    GroupElement,
    TruncatedTensor,
    group_inverse,
    identity,
    inner_product,
    shuffle_product,
    tensor_exp,
    tensor_log,
    tensor_product,
)
from .path_signature import RunningSignature, TimedPath, compute_signature
from .market_models import ModelSpec, SignatureEnsemble, expected_signature, simulate_ensemble
from .risk_metrics import PortfolioSpec, tail_analysis, tep
from .measure_bridge import BridgeOperator, StressScenario, apply_bridge
from .monitoring import GeneratorFlow, MonitorState, process_tick
from .regulatory import capital_charge, fit_payoff_weights, pla_test

__version__ = "0.1.0"
BACKEND = _kernels.BACKEND

__all__ = [
    "AlgebraShape", "TruncatedTensor", "GroupElement", "identity", "tensor_product", "group_inverse",
    "tensor_exp", "tensor_log", "shuffle_product", "inner_product",
    "TimedPath", "RunningSignature", "compute_signature",
    "ModelSpec", "SignatureEnsemble", "simulate_ensemble", "expected_signature",
    "PortfolioSpec", "tail_analysis", "tep",
    "BridgeOperator", "StressScenario", "apply_bridge",
    "GeneratorFlow", "MonitorState", "process_tick",
    "fit_payoff_weights", "pla_test", "capital_charge",
    "SigRiskError", "BACKEND", "__version__",
]
