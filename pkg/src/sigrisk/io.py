"""File formats shared by the library and the command line.

* Tensor: ``{"dim", "depth", "levels": [[...], ...]}`` (see :mod:`sigrisk.tensor_algebra`).
* Sparse tensor: ``{"dim", "depth", "terms": [{"word": [...], "value": x}, ...]}``.
* Portfolio: ``{"label", "initial_value", "weights": <tensor or sparse tensor>}``.
* Phi series: ``{"series": [<tensor>, ...]}`` or a bare list of tensors.

Reports are written with sorted keys and no timestamps so that identical
inputs give byte-identical files.
"""
from __future__ import annotations

import json
import math
import os
from typing import Any

import numpy as np

from .tensor_algebra import AlgebraShape, TruncatedTensor, tensor_from_json, tensor_to_json
from .errors import ConfigError, SigRiskError
from .risk_metrics import PortfolioSpec

__all__ = [
    "read_json",
    "dumps_report",
    "write_text",
    "tensor_from_obj",
    "load_tensor",
    "save_tensor",
    "portfolio_from_json",
    "portfolio_to_json",
    "load_portfolio",
    "save_portfolio",
    "load_series",
    "key_line",
]


def key_line(text: str, key: str) -> int | None:
    """1-based line of the first ``"key":`` in ``text`` (None if absent)."""
    needle = json.dumps(key)
    for i, line in enumerate(text.splitlines(), start=1):
        pos = line.find(needle)
        if pos >= 0 and line[pos + len(needle):].lstrip().startswith(":"):
            return i
    return None


def read_json(path) -> tuple[Any, str]:
    """Parse a JSON file; syntax errors become :class:`ConfigError` with the line number."""
    path = os.fspath(path)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", path=path, code="cli.io") from None
    if not text.strip():
        raise ConfigError("file is empty", path=path, line=1, code="cli.io")
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path=path, line=exc.lineno, code="cli.json") from None


def _clean(obj):
    # NaN/inf are not valid JSON; reports write them as null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps_report(obj, *, indent: int | None = 2) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=indent, allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def tensor_from_obj(obj, shape: AlgebraShape | None = None, *, where: str = "tensor") -> TruncatedTensor:
    """Dense or sparse tensor object; checked against ``shape`` when given."""
    if not isinstance(obj, dict):
        raise SigRiskError(f"{where} must be a JSON object", code="cli.format")
    if "terms" in obj:
        dim = obj.get("dim", shape.dim if shape else None)
        depth = obj.get("depth", shape.depth if shape else None)
        if dim is None or depth is None:
            raise SigRiskError(f"{where}: sparse tensor needs dim and depth", code="cli.format")
        sh = AlgebraShape(dim, depth)
        data = np.zeros(sh.size)
        for term in obj["terms"]:
            try:
                data[sh.word_index(term["word"])] += float(term["value"])
            except (KeyError, TypeError) as exc:
                raise SigRiskError(f"{where}: bad term {term!r}", code="cli.format") from exc
        t = TruncatedTensor(sh, data, copy=False)
    else:
        t = tensor_from_json(obj)
    if shape is not None and t.shape != shape:
        raise SigRiskError(f"{where} shape (dim={t.shape.dim}, depth={t.shape.depth}) does not match "
                           f"engine (dim={shape.dim}, depth={shape.depth})", code="tensor_algebra.shape_mismatch")
    return t


def load_tensor(path, shape: AlgebraShape | None = None) -> TruncatedTensor:
    obj, _ = read_json(path)
    return tensor_from_obj(obj, shape, where=os.fspath(path))


def save_tensor(path, t: TruncatedTensor) -> None:
    write_text(path, dumps_report(tensor_to_json(t), indent=None))


def portfolio_from_json(obj, shape: AlgebraShape | None = None) -> PortfolioSpec:
    if not isinstance(obj, dict) or "weights" not in obj:
        raise SigRiskError("portfolio must be an object with 'weights'", code="cli.format")
    weights = tensor_from_obj(obj["weights"], shape, where="portfolio weights")
    return PortfolioSpec(weights, obj.get("initial_value", 0.0), str(obj.get("label", "portfolio")))


def portfolio_to_json(p: PortfolioSpec) -> dict:
    return {"label": p.label, "initial_value": p.initial_value, "weights": tensor_to_json(p.weights)}


def load_portfolio(path, shape: AlgebraShape | None = None) -> PortfolioSpec:
    obj, text = read_json(path)
    try:
        return portfolio_from_json(obj, shape)
    except SigRiskError as exc:
        line = key_line(text, "weights")
        raise ConfigError(str(exc), path=os.fspath(path), line=line, code=exc.code) from None


def save_portfolio(path, p: PortfolioSpec) -> None:
    write_text(path, dumps_report(portfolio_to_json(p)))


def load_series(path, shape: AlgebraShape | None = None) -> list[TruncatedTensor]:
    obj, _ = read_json(path)
    items = obj.get("series") if isinstance(obj, dict) else obj
    if not isinstance(items, list):
        raise ConfigError("expected a list of tensors or {'series': [...]}", path=os.fspath(path), code="cli.format")
    return [tensor_from_obj(item, shape, where=f"series[{i}]") for i, item in enumerate(items)]
