import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sigrisk.errors import OutOfOrderTickError, PathError, ShapeMismatchError
from sigrisk.fixtures import UNIT_SQUARE, polygon_area
from sigrisk.path_signature import (
    RunningSignature,
    TimedPath,
    batch_signatures,
    compute_signature,
    parse_ticks,
    read_tick_csv,
    signature_of_points,
    sigswap_payoff,
)
from sigrisk.tensor_algebra import AlgebraShape, TruncatedTensor, identity, sym_anti_level2, zeros

from conftest import random_points


def test_two_point_example():
    sig = compute_signature(TimedPath([0.0, 1.0], [[0.0], [1.0]]), AlgebraShape(2, 2))
    assert sig.level(1).tolist() == [1.0, 1.0]
    assert sig.level_matrix(2) == pytest.approx(0.5 * np.ones((2, 2)))


def test_unit_square_levy_area_matches_green():
    sig = signature_of_points(UNIT_SQUARE, AlgebraShape(2, 2))
    _, anti = sym_anti_level2(sig)
    assert anti[0, 1] == pytest.approx(polygon_area(UNIT_SQUARE), abs=1e-12)
    assert np.abs(sig.level(1)).max() < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_levy_area_random_polygon(seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((7, 2))
    pts = np.vstack([pts, pts[:1]])
    _, anti = sym_anti_level2(signature_of_points(pts, AlgebraShape(2, 2)))
    assert anti[0, 1] == pytest.approx(polygon_area(pts), abs=1e-12)


def test_refinement_invariance(rng):
    sh = AlgebraShape(3, 4)
    pts = random_points(rng, 20, 3, scale=0.3)
    fine = np.empty((2 * len(pts) - 1, 3))
    fine[::2] = pts
    fine[1::2] = 0.5 * (pts[:-1] + pts[1:])
    assert signature_of_points(fine, sh).allclose(signature_of_points(pts, sh), atol=1e-10)


def test_level1_is_exact_chord(rng):
    pts = random_points(rng, 200, 3)
    sig = signature_of_points(pts, AlgebraShape(3, 2))
    assert (sig.level(1) == pts[-1] - pts[0]).all()


def test_timed_path_validation():
    with pytest.raises(PathError):
        TimedPath([0.0, 0.0], [[1.0], [2.0]])
    with pytest.raises(PathError):
        TimedPath([0.0], [[1.0]])
    with pytest.raises(PathError):
        TimedPath([0.0, 1.0], [[1.0], [np.nan]])
    with pytest.raises(ShapeMismatchError):
        compute_signature(TimedPath([0.0, 1.0], [[1.0], [2.0]]), AlgebraShape(3, 2))


def test_batch_matches_single(rng):
    sh = AlgebraShape(3, 3)
    pts = np.stack([random_points(rng, 15, 3, 0.3) for _ in range(4)])
    sigs, flows = batch_signatures(pts, sh, snapshots=[0, 7, 14])
    for i in range(4):
        assert np.allclose(sigs[i], signature_of_points(pts[i], sh).data, atol=1e-13)
        assert np.allclose(flows[i, 1], signature_of_points(pts[i, :8], sh).data, atol=1e-13)
        assert flows[i, 0].tolist() == identity(sh).data.tolist()
    assert (flows[:, -1] == sigs).all()


def test_streaming_equals_batch(rng):
    sh = AlgebraShape(3, 4)
    times = np.cumsum(rng.uniform(0.01, 0.1, 100))
    vals = random_points(rng, 100, 2, 0.1)
    rs = RunningSignature(sh, times[0], vals[0])
    for t, v in zip(times[1:], vals[1:]):
        rs.update(t, v)
    batch = compute_signature(TimedPath(times, vals), sh)
    assert rs.snapshot().allclose(batch, atol=1e-9)
    assert rs.tick_count == 99


def test_zero_asset_move_still_advances_time():
    sh = AlgebraShape(2, 2)
    rs = RunningSignature(sh, 0.0, [1.0])
    rs.update(0.5, [1.0])
    assert rs.snapshot().level(1).tolist() == [0.5, 0.0]


def test_out_of_order_tick_leaves_state():
    sh = AlgebraShape(2, 2)
    rs = RunningSignature(sh, 0.0, [1.0])
    rs.update(1.0, [2.0])
    before = rs.snapshot()
    for bad in (1.0, 0.5):
        with pytest.raises(OutOfOrderTickError):
            rs.update(bad, [3.0])
    with pytest.raises(PathError):
        rs.update(2.0, [np.inf])
    with pytest.raises(ShapeMismatchError):
        rs.update(2.0, [1.0, 2.0])
    assert rs.snapshot() == before
    assert rs.last_time == 1.0


def test_snapshot_is_independent():
    sh = AlgebraShape(2, 2)
    rs = RunningSignature(sh, 0.0, [0.0])
    snap = rs.snapshot()
    rs.update(1.0, [1.0])
    assert snap == identity(sh)


def test_value_matches_inner_product(rng):
    sh = AlgebraShape(3, 3)
    w = TruncatedTensor(sh, rng.standard_normal(sh.size))
    rs = RunningSignature(sh, 0.0, [0.0, 0.0])
    rs.update(0.1, [0.2, -0.1])
    assert rs.value(w) == pytest.approx(float(w.data @ rs.snapshot().data), abs=1e-15)


def test_sigswap_payoff(rng):
    sh = AlgebraShape(2, 2)
    sig = signature_of_points(UNIT_SQUARE, sh)
    assert sigswap_payoff(sig, sig) == zeros(sh)
    atm = sigswap_payoff(sig, identity(sh))
    assert atm.scalar == 0.0 and (atm.data[1:] == sig.data[1:]).all()
    _, anti = sym_anti_level2(sigswap_payoff(sig, zeros(sh)))
    assert anti[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_parse_ticks_log_and_line_numbers():
    text = "time,a,b\n0,1,2\n\n0.5,2,4\n"
    rows = list(parse_ticks(io.StringIO(text)))
    assert [r[0] for r in rows] == [2, 4]
    assert rows[1][2] == pytest.approx(np.log([2.0, 4.0]))
    with pytest.raises(PathError, match=":3:"):
        list(parse_ticks(io.StringIO("time,a\n0,1\n1,-1\n")))
    with pytest.raises(PathError, match=":2:"):
        list(parse_ticks(io.StringIO("time,a\n0,1,2\n")))


def test_parse_iso_times():
    text = "time,a\n2024-01-01T00:00:00Z,1\n2024-01-01T06:00:00Z,1\n"
    rows = list(parse_ticks(io.StringIO(text), time_format="iso", price_transform="raw"))
    assert rows[0][1] == 0.0
    assert rows[1][1] == pytest.approx(0.25 / 365.25)


def test_read_tick_csv_rejects_out_of_order(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("time,a\n0,1\n1,2\n1,3\n")
    with pytest.raises(OutOfOrderTickError, match=":4:"):
        read_tick_csv(p)


@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
def test_streaming_property(seed, m):
    rng = np.random.default_rng(seed)
    sh = AlgebraShape(3, 3)
    times = np.cumsum(rng.uniform(0.01, 0.2, m))
    vals = random_points(rng, m, 2, 0.2)
    rs = RunningSignature(sh, times[0], vals[0])
    for t, v in zip(times[1:], vals[1:]):
        rs.update(t, v)
    assert rs.snapshot().allclose(compute_signature(TimedPath(times, vals), sh), atol=1e-9)
