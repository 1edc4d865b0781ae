"""Command-line entry point: ``sigrisk <command> [options]``.

Global options (before or after the command): ``--config``, ``--seed``,
``--depth``, ``--dim``, ``--out``.  Without ``--config`` the file named by
``$SIGRISK_CONFIG`` is used when set.  Failures print
``error[<code>]: <message>`` to stderr and exit with status 1 (2 for usage
errors).  Reports are JSON with sorted keys, so a fixed seed gives
byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .tensor_algebra import AlgebraShape, TruncatedTensor, tensor_to_json
from .measure_bridge import BridgeOperator, apply_bridge, load_scenarios, resilience_check, shock_pnl
from .config import ENV_VAR, EngineConfig, load_config
from .errors import ConfigError, SigRiskError
from .io import dumps_report, load_portfolio, load_series, load_tensor, read_json, write_text
from .market_models import (
    ModelSpec,
    SignatureEnsemble,
    build_ensemble,
    expected_signature,
    simulate_ensemble,
    simulate_log_prices,
)
from .monitoring import GeneratorFlow, MonitorState, Thresholds, process_tick, zero_sensitivity
from .path_signature import TimedPath, compute_signature, parse_ticks, signature_of_points
from .profiling import latency_stats
from .regulatory import PLAThresholds, build_hedge, capital_charge, combine, fit_payoff_weights, pla_test
from .risk_metrics import PortfolioSpec, member_losses, tail_analysis, tep, pathwise_solvency

__all__ = ["main", "build_parser"]

PAYOFFS = ("terminal_return", "terminal_return_squared", "asian_call", "european_call")


class UsageError(SigRiskError):
    code = "cli.usage"


# ---------------------------------------------------------------- helpers

def _config(args) -> EngineConfig:
    path = args.config or os.environ.get(ENV_VAR) or None
    cfg = load_config(path) if path else EngineConfig()
    return cfg.with_overrides(seed=args.seed, dim=args.dim, depth=args.depth)


def _emit(args, text: str) -> None:
    if args.out and args.out != "-":
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _model(args, cfg: EngineConfig) -> ModelSpec:
    source = args.model or cfg.model
    if source is None:
        raise UsageError("a model is required (--model or 'model' in the config)")
    if isinstance(source, dict):
        obj, text, where = source, None, cfg.source
    else:
        obj, text = read_json(source)
        where = source
    try:
        spec = ModelSpec.from_dict(obj)
        return spec.with_overrides(steps=args.steps, horizon=args.horizon)
    except SigRiskError as exc:
        line = None
        if text is not None:
            from .io import key_line
            for key in ("correlation", "vol", "drift", "steps", "horizon", "jump_intensity", "jump_std", "n_assets"):
                if key in str(exc):
                    line = key_line(text, key)
                    break
        raise ConfigError(str(exc), path=where, line=line, code=exc.code) from None


def _shape_for_model(cfg: EngineConfig, spec: ModelSpec, args) -> AlgebraShape:
    dim = spec.n_assets + 1
    if args.dim is not None and args.dim != dim:
        raise UsageError(f"--dim {args.dim} does not match the model ({spec.n_assets} assets -> dim {dim})")
    return AlgebraShape(dim, cfg.depth)


def _portfolio(path, cfg: EngineConfig, shape: AlgebraShape | None) -> PortfolioSpec:
    path = path or cfg.portfolio
    if path is None:
        raise UsageError("a portfolio is required (--portfolio or 'portfolio' in the config)")
    return load_portfolio(path, shape)


def _ensemble(args, cfg: EngineConfig, *, n_default=None, flows: bool = False) -> SignatureEnsemble:
    """Ensemble from --ensemble, else simulated from the model."""
    if getattr(args, "ensemble", None):
        try:
            ens = SignatureEnsemble.load(args.ensemble)
        except (OSError, ValueError, KeyError) as exc:
            if isinstance(exc, SigRiskError):
                raise
            raise ConfigError(f"cannot read ensemble: {exc}", path=args.ensemble, code="cli.io") from None
        if ens.shape.depth != cfg.depth and args.depth is not None:
            raise UsageError(f"ensemble depth {ens.shape.depth} differs from --depth {args.depth}")
        if flows and not ens.has_flows:
            raise SigRiskError("ensemble file has no flows", code="risk_metrics.missing_flows")
        return ens
    spec = _model(args, cfg)
    shape = _shape_for_model(cfg, spec, args)
    n = getattr(args, "n", None) or n_default or cfg.n_paths
    grid = None
    if flows:
        points = getattr(args, "grid_points", None) or (spec.steps + 1)
        grid = np.linspace(0.0, spec.horizon, points)
    return simulate_ensemble(spec, n, cfg.seed, shape, grid)


def _pla_thresholds(cfg: EngineConfig) -> PLAThresholds:
    return PLAThresholds(**cfg.pla)


# ---------------------------------------------------------------- commands

def _read_points(args, cfg, shape_depth):
    with _open_input(args.csv) as fh:
        text = fh.read()
    if not text.strip():
        raise UsageError(f"{args.csv}: empty input")
    transform = args.price_transform or cfg.price_transform
    time_format = args.time_format or cfg.time_format
    name = args.csv
    rows = []
    if args.no_time_channel:
        reader = csv.reader(io.StringIO(text))
        header = None
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if header is None:
                header = row
                continue
            if len(row) != len(header):
                raise SigRiskError(f"{name}:{reader.line_num}: expected {len(header)} fields, got {len(row)}",
                                   code="path_signature.invalid_path")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise SigRiskError(f"{name}:{reader.line_num}: {exc}", code="path_signature.invalid_path") from None
            rows.append((float(len(rows)), np.log(vals) if transform == "log" else np.array(vals)))
    else:
        prev = None
        for lineno, t, vals in parse_ticks(io.StringIO(text), time_format=time_format,
                                           price_transform=transform, source=name):
            if prev is not None and not t > prev:
                from .errors import OutOfOrderTickError
                raise OutOfOrderTickError(f"{name}:{lineno}: time {t!r} is not after {prev!r}")
            prev = t
            rows.append((t, vals))
    if len(rows) < 2:
        raise UsageError(f"{name}: need at least 2 data rows, got {len(rows)}")
    return rows


class _open_input:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        if self.path == "-":
            return sys.stdin
        try:
            self.fh = open(self.path, newline="")
        except OSError as exc:
            raise ConfigError(f"cannot read file: {exc.strerror}", path=self.path, code="cli.io") from None
        return self.fh

    def __exit__(self, *exc):
        if self.path != "-":
            self.fh.close()


def cmd_sign(args) -> None:
    cfg = _config(args)
    rows = _read_points(args, cfg, cfg.depth)
    if args.no_time_channel:
        pts = np.vstack([r[1] for r in rows])
        dim = pts.shape[1]
    else:
        path = TimedPath(np.array([r[0] for r in rows]), np.vstack([r[1] for r in rows]))
        dim = path.dim
    if args.dim is not None and args.dim != dim:
        raise UsageError(f"--dim {args.dim} does not match the input ({dim} channels)")
    shape = AlgebraShape(dim, cfg.depth)
    if args.no_time_channel:
        sig = signature_of_points(pts, shape)
    else:
        sig = compute_signature(path, shape)
    if args.profile:
        _profile_stream(shape, rows, not args.no_time_channel, args)
    _emit(args, dumps_report(tensor_to_json(sig), indent=None))


def _profile_stream(shape, rows, time_channel, args):
    from .path_signature import RunningSignature
    repeat = max(1, args.profile_repeat)
    weights = TruncatedTensor(shape, np.ones(shape.size))
    samples = []
    clock = time.perf_counter_ns
    for _ in range(repeat):
        rs = RunningSignature(shape, rows[0][0], rows[0][1], time_channel=time_channel)
        for t, vals in rows[1:]:
            t0 = clock()
            rs.update(t, vals)
            rs.value(weights)
            samples.append(clock() - t0)
    stats = latency_stats(samples)
    sys.stderr.write("profile: " + stats.summary() + "\n")


def cmd_price(args) -> None:
    cfg = _config(args)
    ens = _ensemble(args, cfg)
    shape = ens.shape
    book = _portfolio(args.portfolio, cfg, shape)
    phi_p = expected_signature(ens)
    bridge = BridgeOperator(load_tensor(args.bridge, shape), "bridge") if args.bridge else BridgeOperator.identity(shape)
    phi_q = apply_bridge(phi_p, bridge)
    report = {
        "label": book.label,
        "n": len(ens),
        "seed": ens.seed,
        "value_p": book.value(phi_p),
        "value_q": book.value(phi_q),
        "initial_value": book.initial_value,
        "expected_signature": tensor_to_json(phi_p),
    }
    _emit(args, dumps_report(report))


def cmd_ses(args) -> None:
    cfg = _config(args)
    alpha = cfg.alpha if args.alpha is None else args.alpha
    ens = _ensemble(args, cfg)
    book = _portfolio(args.portfolio, cfg, ens.shape)
    result = tail_analysis(book, ens, alpha)
    report = result.to_dict()
    report.update({"label": book.label, "n": len(ens), "seed": ens.seed})
    if args.losses_csv:
        losses = member_losses(book, ens)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["member", "loss"])
        for i, x in enumerate(losses):
            w.writerow([i, repr(float(x))])
        write_text(args.losses_csv, buf.getvalue())
    _emit(args, dumps_report(report))


def cmd_tep(args) -> None:
    cfg = _config(args)
    ens = _ensemble(args, cfg, flows=True)
    book = _portfolio(args.portfolio, cfg, ens.shape)
    result = tep(book, ens, args.threshold)
    prob, ok = pathwise_solvency(book, ens, args.threshold, args.epsilon)
    report = result.to_dict()
    report.update({"label": book.label, "threshold": args.threshold, "epsilon": args.epsilon,
                   "solvent": ok, "n": len(ens), "seed": ens.seed})
    _emit(args, dumps_report(report))


def cmd_stress(args) -> None:
    cfg = _config(args)
    if args.base:
        base = load_tensor(args.base)
    else:
        base = expected_signature(_ensemble(args, cfg))
    shape = base.shape
    source = args.scenarios or cfg.scenarios
    if source is None:
        raise UsageError("a scenario file or directory is required (--scenarios)")
    scenarios = load_scenarios(source, shape, level_weights=cfg.level_weights)
    paths = args.portfolio or ([cfg.portfolio] if cfg.portfolio else [])
    if not paths:
        raise UsageError("at least one --portfolio is required")
    books = [_portfolio(p, cfg, shape) for p in paths]
    rho = cfg.rho if args.rho is None else args.rho
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "portfolio", "dV", "generator_norm", "resilient"])
    for sc in scenarios:
        ok, norm = resilience_check(sc, rho)
        for book in books:
            w.writerow([sc.name, book.label, repr(shock_pnl(book, base, sc)), repr(norm), str(ok).lower()])
    _emit(args, buf.getvalue())


def cmd_monitor(args) -> None:
    cfg = _config(args)
    if args.ensemble:
        ens = SignatureEnsemble.load(args.ensemble)
        if args.horizon is None:
            raise UsageError("--horizon is required with --ensemble")
        flow = GeneratorFlow.from_ensemble(ens, args.horizon)
        shape = ens.shape
    else:
        spec = _model(args, cfg)
        shape = _shape_for_model(cfg, spec, args)
        flow = GeneratorFlow.from_model(spec, shape)
    book = _portfolio(args.portfolio, cfg, shape) if (args.portfolio or cfg.portfolio) else zero_sensitivity(shape)
    mon = cfg.monitor
    div_thr = args.divergence_threshold if args.divergence_threshold is not None else mon.divergence_threshold
    td_thr = args.td_threshold if args.td_threshold is not None else mon.td_error_threshold
    thresholds = Thresholds(div_thr, td_thr)
    transform = args.price_transform or cfg.price_transform
    time_format = args.time_format or cfg.time_format
    state = None
    out_lines = []
    samples = []
    max_div = 0.0
    first_breach = None
    counts = {"none": 0, "divergence": 0, "td_error": 0, "both": 0}
    clock = time.perf_counter_ns
    with _open_input(args.ticks) as fh:
        for lineno, t, vals in parse_ticks(fh, time_format=time_format, price_transform=transform, source=args.ticks):
            if state is None:
                if vals.shape[0] + 1 != shape.dim:
                    raise SigRiskError(f"{args.ticks}:{lineno}: {vals.shape[0]} assets, model expects {shape.dim - 1}",
                                       code="tensor_algebra.shape_mismatch")
                state = MonitorState(shape, t, vals, book, thresholds, gamma=mon.gamma,
                                     anchor_interval=args.anchor_interval or mon.anchor_interval,
                                     level_weights=cfg.level_weights, reward=mon.reward, flow=flow)
                continue
            t0 = clock()
            try:
                _, event = process_tick(state, (t, vals))
            except SigRiskError as exc:
                raise type(exc)(f"{args.ticks}:{lineno}: {exc}") from None
            samples.append(clock() - t0)
            max_div = max(max_div, event.divergence)
            counts[event.breach.value] += 1
            if first_breach is None and event.breach.value != "none":
                first_breach = event.time
            out_lines.append(json.dumps(_json_event(event), sort_keys=True, allow_nan=False))
    if state is None:
        raise UsageError(f"{args.ticks}: no ticks")
    _emit(args, "".join(line + "\n" for line in out_lines))
    summary = {
        "ticks": len(out_lines),
        "max_divergence": max_div,
        "breach_count": len(out_lines) - counts["none"],
        "breaches": counts,
        "first_breach_time": first_breach,
    }
    if args.summary:
        write_text(args.summary, dumps_report(summary))
    else:
        sys.stderr.write(dumps_report(summary, indent=None))
    if args.profile and samples:
        sys.stderr.write("profile: " + latency_stats(samples).summary() + "\n")


def _json_event(event):
    d = event.to_dict()
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def cmd_pla(args) -> None:
    cfg = _config(args)
    if args.series:
        series = load_series(args.series)
        shape = series[0].shape if series else None
        phis = np.stack([s.data for s in series]) if series else np.empty((0, 1))
    else:
        ens = _ensemble(args, cfg, flows=True)
        shape = ens.shape
        phis = ens.flows.mean(axis=0)
    book = _portfolio(args.portfolio, cfg, shape)
    hpl = None
    if args.hpl:
        with _open_input(args.hpl) as fh:
            hpl = []
            for i, row in enumerate(csv.reader(fh), start=1):
                if not row or (i == 1 and row[0].strip().lower() in ("hpl", "value")):
                    continue
                try:
                    hpl.append(float(row[-1]))
                except ValueError:
                    raise SigRiskError(f"{args.hpl}:{i}: not a number: {row[-1]!r}", code="cli.format") from None
    report = pla_test(book, phis, hpl, _pla_thresholds(cfg)).to_dict()
    report["label"] = book.label
    report["observations"] = int(phis.shape[0])
    _emit(args, dumps_report(report))


def _payoffs(name, logs, strike, asset):
    x = logs[:, :, asset]
    if name == "terminal_return":
        return x[:, -1] - x[:, 0]
    if name == "terminal_return_squared":
        return (x[:, -1] - x[:, 0]) ** 2
    prices = np.exp(x)
    if name == "asian_call":
        return np.maximum(prices.mean(axis=1) - strike, 0.0)
    return np.maximum(prices[:, -1] - strike, 0.0)


def cmd_fit(args) -> None:
    cfg = _config(args)
    if args.payoffs_csv:
        if not args.ensemble:
            raise UsageError("--payoffs-csv needs --ensemble")
        ens = SignatureEnsemble.load(args.ensemble)
        with _open_input(args.payoffs_csv) as fh:
            vals = []
            for i, row in enumerate(csv.reader(fh), start=1):
                if not row or (i == 1 and not _is_float(row[-1])):
                    continue
                if not _is_float(row[-1]):
                    raise SigRiskError(f"{args.payoffs_csv}:{i}: not a number: {row[-1]!r}", code="cli.format")
                vals.append(float(row[-1]))
        y = np.array(vals)
    else:
        spec = _model(args, cfg)
        shape = _shape_for_model(cfg, spec, args)
        if not 0 <= args.asset < spec.n_assets:
            raise UsageError(f"--asset must be in 0..{spec.n_assets - 1}")
        n = args.n or cfg.n_paths
        times, logs = simulate_log_prices(spec, n, cfg.seed)
        ens = build_ensemble([TimedPath(times, x) for x in logs], shape, seed=cfg.seed)
        y = _payoffs(args.payoff, logs, args.strike, args.asset)
    level = args.level or ens.shape.depth
    fit = fit_payoff_weights(y, ens, level, ridge=args.ridge)
    report = fit.to_dict()
    report.update({"n": len(ens), "seed": ens.seed, "payoff": None if args.payoffs_csv else args.payoff})
    _emit(args, dumps_report(report))


def _is_float(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_capital(args) -> None:
    cfg = _config(args)
    book = _portfolio(args.portfolio, cfg, None)
    shape = book.shape
    rw_source = args.risk_weights if args.risk_weights is not None else cfg.risk_weights
    if isinstance(rw_source, str) and not _is_float(rw_source):
        rw = load_tensor(rw_source, shape)
    else:
        val = float(rw_source)
        if val < 0:
            raise SigRiskError("risk weight must be non-negative", code="regulatory.negative_risk_weight")
        rw = TruncatedTensor(shape, np.full(shape.size, val))
    fit = None
    if args.fit:
        obj, _ = read_json(args.fit)
        from .regulatory import PayoffFit
        from .io import tensor_from_obj
        try:
            fit = PayoffFit(tensor_from_obj(obj["weights"], shape), int(obj["depth_used"]),
                            float(obj["in_sample_rmse"]), tuple(obj["residual_by_depth"]), float(obj.get("ridge", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed fit report: {exc}", path=args.fit, code="cli.format") from None
    if args.hedge_level:
        book = combine(book, build_hedge(book, args.hedge_level), label=f"{book.label}+hedge")
    report = capital_charge(book, rw, fit, args.level).to_dict()
    report["label"] = book.label
    _emit(args, dumps_report(report))


def cmd_simulate(args) -> None:
    cfg = _config(args)
    if not args.out or args.out == "-":
        raise UsageError("simulate needs --out FILE (.npz or .json)")
    ens = _ensemble(args, cfg, flows=args.grid_points is not None)
    ens.save(args.out)


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help=f"engine config JSON (default: ${ENV_VAR})")
    p.add_argument("--seed", type=int, default=d, help="random seed")
    p.add_argument("--depth", type=int, default=d, help="truncation depth")
    p.add_argument("--dim", type=int, default=d, help="channels including time")
    p.add_argument("--out", default=d, help="output file (default stdout)")


def _model_opts(p):
    p.add_argument("--model", help="model spec JSON")
    p.add_argument("--steps", type=int, help="override model steps")
    p.add_argument("--horizon", type=float, help="override model horizon (years)")
    p.add_argument("--n", type=int, help="number of simulated paths")


def _ingest_opts(p):
    p.add_argument("--price-transform", choices=("raw", "log"), help="default from config (log)")
    p.add_argument("--time-format", choices=("year", "iso"), help="default from config (year)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigrisk", description="Signature-based risk engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("sign", cmd_sign, "signature of a tick CSV")
    p.add_argument("csv", help="tick CSV ('-' for stdin)")
    _ingest_opts(p)
    p.add_argument("--no-time-channel", action="store_true", help="columns are raw channels, no time column")
    p.add_argument("--profile", action="store_true", help="print per-tick update+valuation latency to stderr")
    p.add_argument("--profile-repeat", type=int, default=1, help="replay the stream this many times when profiling")

    p = add("price", cmd_price, "value a portfolio against the expected signature")
    p.add_argument("--portfolio")
    p.add_argument("--ensemble", help="ensemble file instead of simulating")
    p.add_argument("--bridge", help="measure-bridge tensor JSON")
    _model_opts(p)

    p = add("ses", cmd_ses, "signature VaR / expected shortfall")
    p.add_argument("--portfolio")
    p.add_argument("--ensemble")
    p.add_argument("--alpha", type=float)
    p.add_argument("--losses-csv", help="also write (member, loss) CSV here")
    _model_opts(p)

    p = add("tep", cmd_tep, "temporal exposure profile and path-wise solvency")
    p.add_argument("--portfolio")
    p.add_argument("--ensemble", help="ensemble file with flows")
    p.add_argument("--grid-points", type=int, help="flow grid size when simulating")
    p.add_argument("--threshold", type=float, default=0.0, help="solvency threshold Z")
    p.add_argument("--epsilon", type=float, default=0.05)
    _model_opts(p)

    p = add("stress", cmd_stress, "stress scenarios: CSV of value changes")
    p.add_argument("--portfolio", action="append", help="portfolio JSON (repeatable)")
    p.add_argument("--scenarios", help="scenario JSON file or directory")
    p.add_argument("--base", help="base expected-signature tensor JSON")
    p.add_argument("--ensemble")
    p.add_argument("--rho", type=float, help="resilience bound on the generator norm")
    _model_opts(p)

    p = add("monitor", cmd_monitor, "stream ticks through the geometric monitor")
    p.add_argument("ticks", help="tick CSV ('-' for stdin)")
    p.add_argument("--portfolio", help="sensitivity portfolio (default zero)")
    p.add_argument("--ensemble", help="fit the expected flow from an ensemble")
    p.add_argument("--divergence-threshold", type=float)
    p.add_argument("--td-threshold", type=float)
    p.add_argument("--anchor-interval", type=int)
    p.add_argument("--summary", help="write the summary JSON here (default stderr)")
    p.add_argument("--profile", action="store_true", help="print per-tick latency percentiles to stderr")
    _ingest_opts(p)
    _model_opts(p)

    p = add("pla", cmd_pla, "P&L attribution test")
    p.add_argument("--portfolio")
    p.add_argument("--series", help="JSON list of expected-signature tensors")
    p.add_argument("--ensemble", help="ensemble with flows (mean flow is the series)")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--hpl", help="CSV of realised HPL (last column)")
    _model_opts(p)

    p = add("fit", cmd_fit, "fit payoff weights on signature coordinates")
    p.add_argument("--payoff", choices=PAYOFFS, default="asian_call")
    p.add_argument("--strike", type=float, default=1.0)
    p.add_argument("--asset", type=int, default=0)
    p.add_argument("--level", type=int, help="fit depth (default engine depth)")
    p.add_argument("--ridge", type=float, help="relative ridge strength")
    p.add_argument("--ensemble")
    p.add_argument("--payoffs-csv", help="payoff per ensemble member (last column)")
    _model_opts(p)

    p = add("capital", cmd_capital, "capital charge of the geometric delta")
    p.add_argument("--portfolio")
    p.add_argument("--risk-weights", help="number or tensor JSON")
    p.add_argument("--fit", help="fit report JSON for the residual add-on")
    p.add_argument("--level", type=int, help="linearisation level r")
    p.add_argument("--hedge-level", type=int, help="add build_hedge at this level first")

    p = add("simulate", cmd_simulate, "simulate and save a signature ensemble")
    p.add_argument("--grid-points", type=int, help="also store flows on this many grid points")
    _model_opts(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SigRiskError as exc:
        sys.stderr.write(f"error[{exc.code}]: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error[cli.io]: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
