import math
import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sigrisk.errors import MonitorError, OutOfOrderTickError
from sigrisk.fixtures import calm_stream, precedence_experiment, two_phase_stream
from sigrisk.market_models import ModelSpec, build_ensemble, expected_signature, simulate_ensemble
from sigrisk.monitoring import (
    Breach,
    EventLog,
    GeneratorFlow,
    MonitorEvent,
    MonitorState,
    RollingVarianceMonitor,
    Thresholds,
    breach_region_check,
    geometric_divergence,
    process_tick,
    realised_td_error,
    run_stream,
    zero_sensitivity,
)
from sigrisk.path_signature import TimedPath
from sigrisk.risk_metrics import PortfolioSpec, tail_analysis
from sigrisk.tensor_algebra import (
    AlgebraShape,
    TruncatedTensor,
    basis,
    group_inverse,
    group_projection,
    identity,
    tensor_exp,
    tensor_product,
    weighted_norm,
)

from conftest import random_tensor

SH = AlgebraShape(3, 3)


def small_group(rng, scale=0.1):
    x = rng.standard_normal(SH.size) * scale
    x[0] = 0.0
    return tensor_exp(TruncatedTensor(SH, x))


def test_divergence_zero_at_fixed_point(rng):
    step, prior = small_group(rng), small_group(rng)
    phi_T_t = tensor_product(group_inverse(step), prior)
    assert geometric_divergence(phi_T_t, step, prior) == pytest.approx(0.0, abs=1e-15)


def test_divergence_with_identity_step(rng):
    a, b = small_group(rng), small_group(rng)
    assert geometric_divergence(a, identity(SH), b) == pytest.approx(weighted_norm(a - b), rel=1e-14)


def test_divergence_monotone_in_antisymmetric_jump(rng):
    prior = small_group(rng)
    out = []
    for a in (0.0, 0.01, 0.05, 0.2, 1.0):
        jump = tensor_exp(basis(SH, (1, 2), a) + basis(SH, (2, 1), -a))
        out.append(geometric_divergence(tensor_product(jump, prior), identity(SH), prior))
    assert out[0] == 0.0
    assert all(x < y for x, y in zip(out, out[1:]))


def test_td_error_trivia(rng):
    step, prior = small_group(rng), small_group(rng)
    phi = small_group(rng)
    assert realised_td_error(0.7, zero_sensitivity(SH), 0.9, phi, step, prior) == 0.7
    fixed = tensor_product(group_inverse(step), prior)
    book = PortfolioSpec(random_tensor(rng, SH))
    assert realised_td_error(0.0, book, 1.0, fixed, step, prior) == pytest.approx(0.0, abs=1e-13)
    with pytest.raises(MonitorError):
        realised_td_error(0.0, book, 0.0, fixed, step, prior)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.0), st.floats(-1.0, 1.0))
def test_td_error_cauchy_schwarz(seed, gamma, reward):
    rng = np.random.default_rng(seed)
    step, prior, phi = small_group(rng, 0.3), small_group(rng, 0.3), small_group(rng, 0.3)
    book = PortfolioSpec(random_tensor(rng, SH))
    td = realised_td_error(reward, book, gamma, phi, step, prior)
    div = geometric_divergence(phi, step, prior)
    wn = weighted_norm(book.weights)
    bound = wn * div + abs(gamma - 1.0) * abs(book.value(phi))
    assert abs(td - reward) <= bound + 1e-12


def test_generator_flow_matches_monte_carlo():
    sh = AlgebraShape(2, 3)
    spec = ModelSpec(1, drift=0.1, vol=0.3, jump_intensity=2.0, jump_mean=-0.1, jump_std=0.1, steps=200)
    flow = GeneratorFlow.from_model(spec, sh)
    ens = simulate_ensemble(spec, 20_000, 4, sh)
    phi = expected_signature(ens)
    sd = ens.data.std(axis=0, ddof=1) / math.sqrt(len(ens))
    diff = np.abs(flow.step(0.0, 1.0).data - phi.data)
    # Euler discretisation bias is O(dt); allow 4 standard errors plus 1e-2
    assert np.all(diff <= 4 * sd + 1e-2)
    fitted = GeneratorFlow.from_ensemble(ens, 1.0)
    assert fitted.step(0.0, 1.0).allclose(phi, atol=1e-12)


def test_generator_flow_semigroup():
    flow = GeneratorFlow.from_model(ModelSpec(2, 0.05, 0.2, horizon=2.0), SH)
    assert tensor_product(flow.step(0.0, 0.3), flow.step(0.3, 1.0)).allclose(flow.step(0.0, 1.0), atol=1e-14)
    assert flow.remaining(2.5) == identity(SH)


def deterministic_state(thresholds=Thresholds(divergence=1e-9), anchor_interval=1):
    spec = ModelSpec(2, drift=[0.3, -0.2], vol=0.0)
    flow = GeneratorFlow.from_model(spec, SH)
    state = MonitorState(SH, 0.0, [0.0, 0.0], zero_sensitivity(SH), thresholds,
                         anchor_interval=anchor_interval, flow=flow)
    return state, spec


@pytest.mark.parametrize("k", [1, 7])
def test_calm_replay_at_conditional_mean(k):
    state, spec = deterministic_state(anchor_interval=k)
    times = np.linspace(0.0, 1.0, 101)[1:]
    events = run_stream(state, ((t, spec.log_drift * t) for t in times))
    assert all(e.breach is Breach.NONE for e in events)
    assert max(e.divergence for e in events) < 1e-12


def test_square_excursion_fires_divergence():
    state, spec = deterministic_state(Thresholds(divergence=1e-3), anchor_interval=5)
    dt = 0.01
    ticks = [(dt * i, spec.log_drift * dt * i) for i in range(1, 21)]
    t0, x0 = ticks[-1]
    h = 0.05
    loop = [(1, 0), (1, 1), (0, 1), (0, 0)]
    ticks += [(t0 + dt * 1e-3 * (j + 1), x0 + h * np.array(c)) for j, c in enumerate(loop)]
    events = run_stream(state, ticks)
    assert all(e.breach is Breach.NONE for e in events[:20])
    assert any(e.breach is Breach.DIVERGENCE for e in events[20:])
    # the terminal price barely moved across the excursion
    assert np.abs(ticks[-1][1] - x0).max() < 1e-12


def test_infinite_threshold_never_breaches():
    st_ = two_phase_stream(0, sigma=10.0, period=80)
    state, _ = deterministic_state(Thresholds(), anchor_interval=10)
    events = run_stream(state, st_.ticks())
    assert all(e.breach is Breach.NONE for e in events)


def test_out_of_order_tick_emits_nothing():
    state, spec = deterministic_state()
    process_tick(state, (0.1, spec.log_drift * 0.1))
    with pytest.raises(OutOfOrderTickError):
        process_tick(state, (0.1, spec.log_drift * 0.1))
    assert len(state.event_log) == 1
    assert state.running.tick_count == 1


@pytest.mark.parametrize("reward,expected", [("zero", 0.25), ("pnl", 0.5)])
def test_reward_modes(reward, expected):
    spec = ModelSpec(1, drift=0.0, vol=0.0)
    sh = AlgebraShape(2, 2)
    book = PortfolioSpec(basis(sh, (1,)))
    state = MonitorState(sh, 0.0, [0.0], book, reward=reward, flow=GeneratorFlow.from_model(spec, sh))
    _, ev = process_tick(state, (0.5, [0.25]))
    # the terminal view shifts by the realised move 0.25; "pnl" adds the step P&L 0.25 on top
    assert ev.td_error == pytest.approx(expected, abs=1e-15)


def test_event_log_order_and_threads():
    log = EventLog()
    log.append(MonitorEvent(1.0, 0.0, 0.0, Breach.NONE, 0.0, 1))
    with pytest.raises(MonitorError):
        log.append(MonitorEvent(1.0, 0.0, 0.0, Breach.NONE, 0.0, 2))
    seen = []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            snap = log.snapshot()
            seen.append(all(a.time < b.time for a, b in zip(snap, snap[1:])))

    th = threading.Thread(target=reader)
    th.start()
    for i in range(2, 2000):
        log.append(MonitorEvent(float(i), 0.0, 0.0, Breach.NONE, 0.0, i))
    stop.set()
    th.join()
    assert all(seen) and len(log) == 1999


@pytest.mark.parametrize(
    "div,td,expected",
    [(False, False, Breach.NONE), (True, False, Breach.DIVERGENCE), (False, True, Breach.TD_ERROR),
     (True, True, Breach.BOTH)],
)
def test_breach_classify(div, td, expected):
    assert Breach.classify(div, td) is expected


def test_breach_region():
    sh = AlgebraShape(3, 3)
    t = np.linspace(0.0, 1.0, 5)
    paths = []
    for k, r in enumerate((-3.0, -1.0, 0.0, 2.0)):
        x = np.column_stack([np.linspace(0.0, r, 5), np.sin(np.pi * t) * (k + 1) * 0.5])
        paths.append(TimedPath(t, x))
    ens = build_ensemble(paths, sh)
    tail = tail_analysis(PortfolioSpec(basis(sh, (1,))), ens, 0.5)
    assert breach_region_check(group_projection(tail.tail_signature), tail, 1e-12)
    other = ens.member(3)
    radii = [1e-6, 0.1, 0.5, 1.0, 2.0, 5.0, 50.0]
    flags = [breach_region_check(other, tail, r) for r in radii]
    assert not flags[0] and flags[-1]
    assert flags == sorted(flags)
    with pytest.raises(MonitorError):
        breach_region_check(other, tail, 0.0)


@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 10.0), st.floats(1e-3, 10.0))
def test_breach_region_monotone(seed, r1, r2):
    rng = np.random.default_rng(seed)
    sh = AlgebraShape(3, 2)
    ens = simulate_ensemble(ModelSpec(2, 0.0, 0.5, steps=5), 8, seed, sh)
    tail = tail_analysis(PortfolioSpec(basis(sh, (1,))), ens, 0.5)
    sig = ens.member(int(rng.integers(8)))
    lo, hi = sorted((r1, r2))
    assert breach_region_check(sig, tail, lo) <= breach_region_check(sig, tail, hi)


def test_rolling_variance_reference_and_breach():
    mon = RollingVarianceMonitor(window=10, k=3.0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert not mon.update(rng.standard_normal(2) * 0.01)
    assert mon.reference == pytest.approx(mon.last_statistic)
    assert mon.threshold(2) == pytest.approx(mon.reference * (1 + 3 * math.sqrt(2 / 18)))
    assert any(mon.update(rng.standard_normal(2)) for _ in range(10))
    with pytest.raises(MonitorError):
        RollingVarianceMonitor(window=2)


def test_calm_stream_is_reproducible():
    a = calm_stream(100, 3)
    b = calm_stream(100, 3)
    assert (a[1] == b[1]).all()


def test_two_phase_labels():
    st_ = two_phase_stream(0)
    assert st_.first_tick_of(1) == 201 and st_.first_tick_of(2) == 401
    # winding keeps per-asset step variance near the calm level
    inc = np.diff(st_.values, axis=0)
    calm_var = inc[:200].var()
    wind_var = inc[200:400].var()
    assert 0.5 < wind_var / calm_var < 2.0


@pytest.mark.slow
def test_precedence_fixture_seed_zero():
    res = precedence_experiment(0)
    assert 201 <= res.divergence_tick <= 400
    assert res.variance_tick is None or res.divergence_tick < res.variance_tick
