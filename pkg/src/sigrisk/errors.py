"""Exception types.

Every error carries a module-qualified ``code`` (for example
``"tensor_algebra.shape_mismatch"``) that the CLI prints next to the message.
All of them derive from ``ValueError`` so callers can catch broadly.
"""


class SigRiskError(ValueError):
    code = "sigrisk.error"

    def __init__(self, message, *, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ShapeMismatchError(SigRiskError):
    code = "tensor_algebra.shape_mismatch"


class NotGroupLikeError(SigRiskError):
    code = "tensor_algebra.not_group_like"


class TruncationError(SigRiskError):
    code = "tensor_algebra.truncation"


class PathError(SigRiskError):
    code = "path_signature.invalid_path"


class OutOfOrderTickError(SigRiskError):
    code = "path_signature.out_of_order"


class ModelError(SigRiskError):
    code = "market_models.invalid_spec"


class RiskError(SigRiskError):
    code = "risk_metrics.invalid_input"


class StressError(SigRiskError):
    code = "measure_bridge.invalid_scenario"


class MonitorError(SigRiskError):
    code = "monitoring.invalid_input"


class RegulatoryError(SigRiskError):
    code = "regulatory.invalid_input"


class ConfigError(SigRiskError):
    """Invalid input file; ``line`` is 1-based when known."""

    code = "cli.config"

    def __init__(self, message, *, path=None, line=None, code=None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message, code=code)
        self.path = path
        self.line = line
