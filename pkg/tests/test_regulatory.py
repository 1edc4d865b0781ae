import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sigrisk.errors import RegulatoryError, ShapeMismatchError
from sigrisk.market_models import ModelSpec, expected_flow, simulate_ensemble, simulate_log_prices
from sigrisk.regulatory import (
    PLAThresholds,
    build_hedge,
    capital_charge,
    combine,
    fit_payoff_weights,
    geometric_delta,
    pla_test,
    spearman,
)
from sigrisk.risk_metrics import PortfolioSpec, member_losses, tep_variance
from sigrisk.tensor_algebra import AlgebraShape, TruncatedTensor, basis, zeros

SH = AlgebraShape(2, 4)


@pytest.fixture(scope="module")
def ens_and_logs():
    spec = ModelSpec(1, drift=0.05, vol=0.2, steps=50)
    _, logs = simulate_log_prices(spec, 2000, 3)
    ens = simulate_ensemble(spec, 2000, 3, SH, flow_grid=np.linspace(0.0, 1.0, 11))
    return ens, logs[:, :, 0]


def test_fit_terminal_return(ens_and_logs):
    ens, x = ens_and_logs
    fit = fit_payoff_weights(x[:, -1] - x[:, 0], ens, 1)
    assert fit.weights[(1,)] == pytest.approx(1.0, abs=1e-8)
    assert fit.in_sample_rmse < 1e-10


def test_fit_squared_return_uses_shuffle(ens_and_logs):
    ens, x = ens_and_logs
    fit = fit_payoff_weights((x[:, -1] - x[:, 0]) ** 2, ens, 2)
    assert fit.weights[(1, 1)] == pytest.approx(2.0, abs=1e-7)
    assert fit.in_sample_rmse < 1e-8


def test_residuals_non_increasing(ens_and_logs):
    ens, x = ens_and_logs
    fit = fit_payoff_weights(np.maximum(np.exp(x).mean(axis=1) - 1.0, 0.0), ens, 4)
    r = fit.residual_by_depth
    assert all(b <= a * (1 + 1e-9) for a, b in zip(r, r[1:]))
    assert fit.rmse_at(4) == fit.in_sample_rmse


def test_fit_input_errors(ens_and_logs):
    ens, _ = ens_and_logs
    with pytest.raises(RegulatoryError):
        fit_payoff_weights(np.zeros(3), ens, 2)
    with pytest.raises(RegulatoryError):
        fit_payoff_weights(np.zeros(len(ens)), ens, 5)
    with pytest.raises(RegulatoryError) as exc:
        # the time coordinate is constant across members: singular without ridge
        fit_payoff_weights(np.zeros(len(ens)), ens, 1, ridge=0.0)
    assert exc.value.code == "regulatory.degenerate_design"


def test_geometric_delta():
    assert geometric_delta(PortfolioSpec(zeros(SH))) == zeros(SH)
    swap = PortfolioSpec(basis(SH, (1, 0, 1)))
    assert geometric_delta(swap) == basis(SH, (1, 0, 1))


@given(st.integers(0, SH.size - 1), st.floats(-1e3, 1e3))
def test_delta_finite_difference(index, h):
    rng = np.random.default_rng(index)
    book = PortfolioSpec(TruncatedTensor(SH, rng.standard_normal(SH.size)))
    phi = TruncatedTensor(SH, rng.standard_normal(SH.size))
    bumped = TruncatedTensor(SH, phi.data + h * np.eye(SH.size)[index])
    dv = book.value(bumped) - book.value(phi)
    assert dv == pytest.approx(h * geometric_delta(book).data[index], abs=1e-12 * (1 + abs(h)) * 10)


def test_hedge_levels(ens_and_logs):
    ens, _ = ens_and_logs
    rng = np.random.default_rng(1)
    book = PortfolioSpec(TruncatedTensor(SH, rng.standard_normal(SH.size)), 2.0)
    full = combine(book, build_hedge(book, SH.depth))
    assert np.var(member_losses(full, ens)) < 1e-18
    partial = combine(book, build_hedge(book, 1))
    assert partial.weights.level(2).tolist() == book.weights.level(2).tolist()
    assert not partial.weights.level(1).any()
    assert tep_variance(full, ens) <= tep_variance(book, ens)


def test_spearman_edge_cases():
    assert spearman([1, 2, 3], [10, 20, 30]) == 1.0
    assert spearman([1, 2, 3], [3, 2, 1]) == -1.0
    assert math.isnan(spearman([1, 1, 1], [1, 2, 3]))


def test_pla_identity(ens_and_logs):
    ens, _ = ens_and_logs
    book = PortfolioSpec(TruncatedTensor(SH, np.linspace(-1, 1, SH.size)))
    rep = pla_test(book, expected_flow(ens))
    assert rep.zone == "green" and rep.spearman == 1.0 and rep.ks_stat == 0.0
    assert not np.any(rep.unexplained)


def test_pla_noise_and_independent():
    sh = AlgebraShape(2, 2)
    rng = np.random.default_rng(5)
    phis = np.cumsum(rng.standard_normal((501, sh.size)), axis=0)
    phis[:, 0] = 1.0
    book = PortfolioSpec(TruncatedTensor(sh, rng.standard_normal(sh.size)))
    rtpl = np.diff(phis @ book.weights.data)
    noisy = rtpl + 1e-6 * np.abs(rtpl).mean() * rng.standard_normal(rtpl.size)
    rep = pla_test(book, phis, noisy)
    assert rep.spearman > 0.99 and rep.zone == "green"
    rep = pla_test(book, phis, rng.standard_normal(rtpl.size) * np.abs(rtpl).mean())
    assert abs(rep.spearman) < 0.15 and rep.zone == "red"


def test_pla_constant_series_is_degenerate():
    sh = AlgebraShape(2, 2)
    phis = np.tile(np.eye(sh.size)[0], (10, 1))
    rep = pla_test(PortfolioSpec(basis(sh, (1,))), phis)
    assert rep.degenerate and rep.zone == "red"
    assert rep.to_dict()["spearman"] is None


def test_pla_zones():
    th = PLAThresholds()
    assert th.zone(0.85, 0.05) == "green"
    assert th.zone(0.75, 0.05) == "amber"
    assert th.zone(0.85, 0.10) == "amber"
    assert th.zone(0.65, 0.05) == "red"


def test_pla_input_errors():
    sh = AlgebraShape(2, 2)
    book = PortfolioSpec(basis(sh, (1,)))
    with pytest.raises(ShapeMismatchError):
        pla_test(book, np.zeros((5, 3)))
    with pytest.raises(RegulatoryError):
        pla_test(book, np.zeros((1, sh.size)))
    with pytest.raises(RegulatoryError):
        pla_test(book, np.zeros((5, sh.size)), [1.0, 2.0])


def test_capital_charge_basics():
    rng = np.random.default_rng(2)
    book = PortfolioSpec(TruncatedTensor(SH, rng.standard_normal(SH.size)))
    ones = TruncatedTensor(SH, np.ones(SH.size))
    rep = capital_charge(book, ones)
    # the scalar coordinate is cash and carries no charge
    assert rep.charge == pytest.approx(np.linalg.norm(book.weights.data[1:]), rel=1e-14)
    hedged = combine(book, build_hedge(book, SH.depth))
    rep = capital_charge(hedged, ones)
    assert rep.charge == 0.0 and rep.rrao_residual == 0.0
    with pytest.raises(RegulatoryError):
        capital_charge(book, TruncatedTensor(SH, -np.ones(SH.size)))


@given(st.one_of(st.just(0.0), st.floats(1e-6, 1e3)))
def test_capital_homogeneous(lam):
    rng = np.random.default_rng(0)
    book = PortfolioSpec(TruncatedTensor(SH, rng.standard_normal(SH.size)))
    rw = TruncatedTensor(SH, rng.uniform(0.0, 2.0, SH.size))
    base = capital_charge(book, rw).charge
    assert capital_charge(book.scaled(lam), rw).charge == pytest.approx(lam * base, rel=1e-12)


def test_capital_rrao_from_fit(ens_and_logs):
    ens, x = ens_and_logs
    fit = fit_payoff_weights(np.maximum(np.exp(x[:, -1]) - 1.0, 0.0), ens, 3)
    book = PortfolioSpec(fit.weights)
    rep = capital_charge(book, TruncatedTensor(SH, np.ones(SH.size)), fit, level=2)
    assert rep.rrao_residual == fit.rmse_at(2)
    with pytest.raises(RegulatoryError):
        capital_charge(book, TruncatedTensor(SH, np.ones(SH.size)), fit, level=4)
