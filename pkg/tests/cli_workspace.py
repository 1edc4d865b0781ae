"""Input files for exercising the command line end to end."""
import json

import numpy as np

from sigrisk.fixtures import UNIT_SQUARE, calm_stream
from sigrisk.io import save_portfolio
from sigrisk.market_models import build_ensemble
from sigrisk.path_signature import TimedPath
from sigrisk.risk_metrics import PortfolioSpec
from sigrisk.tensor_algebra import AlgebraShape, basis

MODEL = {
    "n_assets": 2,
    "drift": [0.05, 0.03],
    "vol": [0.2, 0.3],
    "correlation": [[1.0, 0.3], [0.3, 1.0]],
    "steps": 50,
}


def build(root):
    """Write every fixture under ``root`` and return a dict of paths."""
    root.mkdir(parents=True, exist_ok=True)
    p = {k: root / v for k, v in {
        "model": "model.json", "book": "book.json", "linear": "linear.json", "config": "config.json",
        "scenarios": "scenarios", "square": "square.csv", "two_row": "two_row.csv", "empty": "empty.csv",
        "calm": "calm.csv", "four": "four.npz", "scalar_book": "scalar_book.json",
    }.items()}
    p["model"].write_text(json.dumps(MODEL, indent=2))
    sh = AlgebraShape(3, 4)
    w = basis(sh, (1,), 1.0) + basis(sh, (1, 2), 0.5) - basis(sh, (2, 1), 0.5) + basis(sh, (2, 2, 1), 0.1)
    save_portfolio(p["book"], PortfolioSpec(w, 1.0, "book"))
    save_portfolio(p["linear"], PortfolioSpec(basis(sh, (1,)) + basis(sh, (2, 2)), 0.0, "linear"))
    p["config"].write_text(json.dumps({"depth": 4, "seed": 7, "model": "model.json", "portfolio": "book.json",
                                       "n_paths": 500}, indent=2))
    p["scenarios"].mkdir(exist_ok=True)
    (p["scenarios"] / "a_identity.json").write_text(json.dumps(
        {"name": "identity", "kind": "custom", "operator": {"dim": 3, "depth": 4, "terms": [{"word": [], "value": 1.0}]}}))
    (p["scenarios"] / "b_anti.json").write_text(json.dumps(
        {"name": "anti", "kind": "antisymmetric_shock", "params": {"pair": [1, 2], "magnitude": 0.01}}))
    (p["scenarios"] / "c_break.json").write_text(json.dumps(
        {"name": "break", "kind": "correlation_break", "params": {"pair": [1, 2], "s": 0.02}}))
    p["square"].write_text("x,y\n" + "".join(f"{a},{b}\n" for a, b in UNIT_SQUARE))
    p["two_row"].write_text("time,x\n0,0\n1,1\n")
    p["empty"].write_text("")
    # calm replay: driftless log-price random walk in price space
    times, vals = calm_stream(400, 21, sigma=0.3)
    lines = ["time,a,b"] + [f"{float(t)!r},{float(100 * np.exp(a))!r},{float(50 * np.exp(b))!r}"
                            for t, (a, b) in zip(times, vals)]
    p["calm"].write_text("\n".join(lines) + "\n")
    sh1 = AlgebraShape(2, 2)
    ens = build_ensemble([TimedPath([0.0, 1.0], [[0.0], [r]]) for r in (-3.0, -1.0, 0.0, 2.0)], sh1)
    ens.save(p["four"])
    save_portfolio(p["scalar_book"], PortfolioSpec(basis(sh1, (1,)), 0.0, "scalar"))
    return p


CALM_MODEL = {"n_assets": 2, "drift": 0.045, "vol": 0.3, "steps": 2520}
