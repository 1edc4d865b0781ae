import numpy as np
import pytest
from hypothesis import given, strategies as st

from sigrisk.errors import RiskError, ShapeMismatchError
from sigrisk.fixtures import UNIT_SQUARE
from sigrisk.market_models import ModelSpec, build_ensemble, expected_signature, simulate_ensemble
from sigrisk.path_signature import TimedPath, signature_of_points
from sigrisk.risk_metrics import (
    PortfolioSpec,
    levy_gap_indicator,
    levy_share,
    loss,
    member_losses,
    pathwise_solvency,
    tail_analysis,
    tail_count,
    tep,
    tep_variance,
)
from sigrisk.tensor_algebra import AlgebraShape, TruncatedTensor, basis, identity, zeros

SH = AlgebraShape(2, 2)


def four_member_ensemble():
    t = [0.0, 1.0]
    return build_ensemble([TimedPath(t, [[0.0], [r]]) for r in (-3.0, -1.0, 0.0, 2.0)], SH)


def test_loss_trivia(rng):
    sh = AlgebraShape(2, 3)
    pts = np.column_stack([np.linspace(0, 1, 20), np.cumsum(rng.standard_normal(20))])
    sig = signature_of_points(pts, sh)
    assert loss(PortfolioSpec(zeros(sh), 3.5), sig) == 3.5
    assert loss(PortfolioSpec(basis(sh, (), 2.0), 5.0), identity(sh)) == 3.0
    assert loss(PortfolioSpec(basis(sh, (1,)), 1.0), sig) == 1.0 - (pts[-1, 1] - pts[0, 1])


@pytest.mark.parametrize(
    "alpha,count,s_var,s_es",
    [(0.5, 2, 1.0, 2.0), (0.75, 1, 3.0, 3.0), (0.1, 3, 0.0, 4.0 / 3.0)],
)
def test_four_member_fixture(alpha, count, s_var, s_es):
    res = tail_analysis(PortfolioSpec(basis(SH, (1,)), 0.0), four_member_ensemble(), alpha)
    assert res.tail_count == count
    assert res.s_var == s_var
    assert res.s_es == pytest.approx(s_es, abs=1e-15)
    assert res.s_es_decomposed == pytest.approx(s_es, abs=1e-15)
    assert res.tail_indices.tolist() == [0, 1, 2][:count]


def test_identical_members():
    path = TimedPath([0.0, 0.5, 1.0], [[0.0], [0.2], [0.1]])
    ens = build_ensemble([path] * 5, SH)
    res = tail_analysis(PortfolioSpec(basis(SH, (1, 1)), 1.0), ens, 0.6)
    assert res.s_es == res.s_var == loss(PortfolioSpec(basis(SH, (1, 1)), 1.0), ens.member(0))
    assert res.tail_signature.allclose(ens.member(0), atol=0)


def test_single_member_es_is_var():
    ens = four_member_ensemble().subset([3])
    res = tail_analysis(PortfolioSpec(basis(SH, (1,)), 0.0), ens, 0.99)
    assert res.s_es == res.s_var == -2.0


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, float("nan")])
def test_invalid_alpha(alpha):
    with pytest.raises(RiskError) as exc:
        tail_analysis(PortfolioSpec(basis(SH, (1,))), four_member_ensemble(), alpha)
    assert exc.value.code == "risk_metrics.invalid_alpha"


def test_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        member_losses(PortfolioSpec(zeros(AlgebraShape(3, 2))), four_member_ensemble())


def test_tail_count():
    assert tail_count(4, 0.5) == 2
    assert tail_count(10, 0.999) == 1
    assert tail_count(1000, 0.975) == 25


def test_levy_gap_fixtures():
    sq = signature_of_points(UNIT_SQUARE, AlgebraShape(2, 2))
    assert levy_gap_indicator(sq, time_channel=False) == pytest.approx(2.0, abs=1e-12)
    assert levy_share(sq, time_channel=False) == pytest.approx(1.0)
    line = signature_of_points(np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]]), AlgebraShape(2, 2))
    sym = 0.5 * (line.level_matrix(2) + line.level_matrix(2).T)
    assert levy_gap_indicator(line, time_channel=False) == pytest.approx(-np.sum(sym**2), abs=1e-12)
    one = signature_of_points(np.array([[0.0, 0.0], [1.0, 0.5]]), AlgebraShape(2, 2))
    assert levy_gap_indicator(one) == pytest.approx(-(0.125**2))


def ensemble_with_flows(values, grid_points=None):
    t = np.linspace(0.0, 1.0, len(values[0]))
    grid = t if grid_points is None else np.linspace(0.0, 1.0, grid_points)
    return build_ensemble([TimedPath(t, np.asarray(v)[:, None]) for v in values], SH, flow_grid=grid)


def test_tep_zero_weights_flat():
    res = tep(PortfolioSpec(zeros(SH)), ensemble_with_flows([[0.0, 1.0, 2.0]]))
    assert res.values.tolist() == [0.0, 0.0, 0.0]
    assert res.min_value == 0.0


def test_tep_time_weight_linear():
    ens = ensemble_with_flows([[1.0, 1.0, 1.0]], grid_points=5)
    res = tep(PortfolioSpec(basis(SH, (0,))), ens)
    assert res.values == pytest.approx(np.linspace(0.0, 1.0, 5), abs=1e-15)


def test_tep_end_matches_expected_signature():
    ens = simulate_ensemble(ModelSpec(1, 0.05, 0.2, steps=10), 200, 3, SH, flow_grid=np.linspace(0, 1, 6))
    w = PortfolioSpec(TruncatedTensor(SH, np.arange(SH.size, dtype=float)))
    assert tep(w, ens).values[-1] == pytest.approx(w.value(expected_signature(ens)), rel=1e-12)


def test_solvency_extremes():
    ens = ensemble_with_flows([[0.0, 1.0, 2.0], [0.0, -1.0, 0.5]])
    book = PortfolioSpec(basis(SH, (1,)))
    assert pathwise_solvency(book, ens, -10.0, 0.05) == (1.0, True)
    assert pathwise_solvency(book, ens, 10.0, 0.05) == (0.0, False)


def test_liquidity_trap_counts_as_insolvent():
    # V-shaped path ends above the threshold but dips below it in the middle
    ens = ensemble_with_flows([[0.0, 0.5, 1.0], [0.0, -1.0, 1.0]])
    book = PortfolioSpec(basis(SH, (1,)))
    prob, ok = pathwise_solvency(book, ens, -0.5, 0.1)
    assert prob == 0.5 and not ok
    assert member_losses(book, ens).tolist() == [-1.0, -1.0]


def test_tep_needs_flows():
    with pytest.raises(RiskError):
        tep(PortfolioSpec(zeros(SH)), four_member_ensemble())


def test_tep_variance_nonnegative():
    ens = ensemble_with_flows([[0.0, 1.0, 2.0], [0.0, -1.0, 0.5]])
    assert tep_variance(PortfolioSpec(basis(SH, (1,))), ens) >= 0.0


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 0.995))
def test_dual_es_property(seed, alpha):
    rng = np.random.default_rng(seed)
    sh = AlgebraShape(3, 3)
    ens = simulate_ensemble(ModelSpec(2, 0.05, 0.3, steps=6), 64, seed, sh)
    book = PortfolioSpec(TruncatedTensor(sh, rng.standard_normal(sh.size)), float(rng.normal()))
    res = tail_analysis(book, ens, alpha)
    assert abs(res.s_es - res.s_es_decomposed) <= 1e-9 * max(1.0, abs(res.s_es))
    assert res.s_es >= res.s_var
