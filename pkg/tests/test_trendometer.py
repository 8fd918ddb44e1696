import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import cos23, cos23_prime, derivative_roots, direct_scan, plateau_scan
from retroprospect.errors import ValidationError
from retroprospect.evolution import Evolution
from retroprospect.trendometer import (
    Kind,
    ReversalEvent,
    analyze,
    bear_bull_proportions,
    cross_reversal_scan,
    detect_reversals,
    jerkiness_ranking,
    jerkiness_velocity,
    trend_speeds,
)

ints = st.lists(st.integers(-6, 6), min_size=3, max_size=40)


def event(t, j, kind=Kind.BULL, value=0.0):
    b = 1.0 if kind is Kind.BULL else -1.0
    return ReversalEvent(index=int(t), time=float(t), value=value, backward_v=b,
                         forward_v=-j / b, product=-j, jerkiness=j, kind=kind)


def no_zero_steps(x):
    return all(a != b for a, b in zip(x, x[1:]))


class TestDetect:
    def test_peak(self):
        (ev,) = detect_reversals(Evolution.uniform([0, 1, 2, 1, 0]))
        assert (ev.index, ev.product, ev.jerkiness, ev.kind) == (2, -1.0, 1.0, Kind.BULL)
        assert ev.time == 2.0 and ev.value == 2.0

    def test_valley_is_bear(self):
        (ev,) = detect_reversals(Evolution.uniform([3, 1, 4]))
        assert ev.kind is Kind.BEAR
        assert (ev.backward_v, ev.forward_v) == (-2.0, 3.0)

    def test_monotone(self):
        assert detect_reversals(Evolution.uniform(np.arange(10.0) ** 2)) == []

    def test_plateau(self):
        (ev,) = detect_reversals(Evolution.uniform([0, 1, 1, 0]))
        assert (ev.index, ev.jerkiness, ev.kind) == (2, 1.0, Kind.BULL)

    def test_plateau_continuing_trend_is_not_reversal(self):
        assert detect_reversals(Evolution.uniform([0, 1, 1, 1, 2])) == []

    def test_leading_plateau(self):
        (ev,) = detect_reversals(Evolution.uniform([1, 1, 1, 2, 0]))
        assert ev.index == 3

    def test_epsilon_filters_small_products(self):
        e = Evolution.uniform([0, 1, 0.9, 5])
        assert [ev.index for ev in detect_reversals(e)] == [1, 2]
        assert [ev.index for ev in detect_reversals(e, eps=0.2)] == [2]

    def test_nonuniform_grid_uses_local_steps(self):
        (ev,) = detect_reversals(Evolution([0, 2, 3], [0, 4, 1]))
        assert (ev.backward_v, ev.forward_v) == (2.0, -3.0)

    def test_rejects_vector(self):
        with pytest.raises(ValidationError):
            detect_reversals(Evolution([0, 1, 2], [[0, 0], [1, 1], [0, 0]]))

    def test_rejects_short(self):
        with pytest.raises(ValidationError):
            detect_reversals(Evolution([0, 1], [0, 1]))


class TestAnalyticExtremum:
    def test_cos23(self):
        h = 1e-3
        e = Evolution.from_function(cos23, 0.0, 2 * np.pi, h)
        events = detect_reversals(e)
        roots = derivative_roots(cos23_prime, 0.0, e.times[-1])
        assert len(events) == len(roots) == 9
        times = np.array([ev.time for ev in events])
        assert np.all(np.abs(times - roots) <= h)
        kinds = [ev.kind for ev in events]
        assert all(a is not b for a, b in zip(kinds, kinds[1:]))


class TestProperties:
    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=60))
    def test_direct_scan_equivalence(self, x):
        assume(no_zero_steps(x))
        found = [ev.index for ev in detect_reversals(Evolution.uniform(x))]
        assert found == direct_scan(x)

    @given(ints)
    def test_plateau_scan_equivalence(self, x):
        assert [ev.index for ev in detect_reversals(Evolution.uniform(x))] == plateau_scan(x)

    @given(ints)
    def test_kinds_alternate(self, x):
        kinds = [ev.kind for ev in detect_reversals(Evolution.uniform(x))]
        assert all(a is not b for a, b in zip(kinds, kinds[1:]))

    @given(ints)
    def test_events_are_extrema(self, x):
        for ev in detect_reversals(Evolution.uniform(x)):
            j = ev.index
            while x[j - 1] == x[j]:
                j -= 1
            if ev.kind is Kind.BULL:
                assert x[j - 1] < x[ev.index] > x[ev.index + 1]
            else:
                assert x[j - 1] > x[ev.index] < x[ev.index + 1]

    @given(ints, st.floats(0.1, 100), st.floats(-1e3, 1e3))
    def test_affine_equivariance(self, x, alpha, beta):
        x = np.array(x, dtype=float)
        base = detect_reversals(Evolution.uniform(x))
        mapped = detect_reversals(Evolution.uniform(alpha * x + beta))
        assert [(ev.index, ev.kind) for ev in mapped] == [(ev.index, ev.kind) for ev in base]
        for a, b in zip(base, mapped):
            assert b.jerkiness == pytest.approx(alpha**2 * a.jerkiness, rel=1e-9)

    @given(ints)
    def test_sign_flip(self, x):
        x = np.array(x, dtype=float)
        base = detect_reversals(Evolution.uniform(x))
        flipped = detect_reversals(Evolution.uniform(-x))
        assert [ev.index for ev in flipped] == [ev.index for ev in base]
        for a, b in zip(base, flipped):
            assert a.kind is not b.kind
            assert a.jerkiness == b.jerkiness

    @given(ints)
    def test_event_invariants(self, x):
        for ev in detect_reversals(Evolution.uniform(x)):
            assert ev.product < 0 and ev.jerkiness == -ev.product
            assert (ev.kind is Kind.BEAR) == (ev.backward_v < 0)


class TestRanking:
    def test_order(self):
        evs = [event(0, 1), event(1, 5), event(2, 3)]
        assert [ev.jerkiness for ev in jerkiness_ranking(evs)] == [5, 3, 1]

    def test_empty(self):
        assert jerkiness_ranking([]) == []

    def test_ties_chronological(self):
        evs = [event(3, 2), event(1, 2), event(2, 7)]
        assert [ev.time for ev in jerkiness_ranking(evs)] == [2, 1, 3]


class TestProportions:
    def test_weighted(self):
        evs = [event(0, 2, Kind.BEAR), event(1, 1, Kind.BEAR), event(2, 1, Kind.BULL)]
        assert bear_bull_proportions(evs) == (0.75, 0.25)

    def test_all_bull(self):
        assert bear_bull_proportions([event(0, 1), event(1, 4)]) == (0.0, 1.0)

    def test_empty(self):
        assert bear_bull_proportions([]) == (0.0, 0.0)

    def test_sine_symmetry(self):
        e = Evolution.from_function(np.sin, 0.0, 20 * np.pi, 1e-3)
        bear, bull = bear_bull_proportions(detect_reversals(e))
        assert abs(bear - 0.5) <= 0.02 and abs(bull - 0.5) <= 0.02

    @given(ints)
    def test_shares_sum_to_one(self, x):
        evs = detect_reversals(Evolution.uniform(x))
        bear, bull = bear_bull_proportions(evs)
        if evs:
            assert bear + bull == pytest.approx(1.0)
            assert 0 <= bear <= 1


class TestVelocity:
    def test_examples(self):
        assert jerkiness_velocity([event(2, 1), event(4, 3)]) == [((2.0, 4.0), 1.0)]
        assert jerkiness_velocity([event(2, 3), event(4, 3)])[0][1] == 0.0
        assert jerkiness_velocity([event(0, 4), event(3, 1)])[0][1] == -1.0

    def test_too_few(self):
        assert jerkiness_velocity([]) == []
        assert jerkiness_velocity([event(0, 1)]) == []

    def test_trend_speeds(self):
        evs = [event(1, 1, value=2.0), event(3, 1, Kind.BEAR, value=-2.0)]
        assert trend_speeds(evs) == [((1.0, 3.0), -2.0)]


class TestAnalyze:
    def test_report(self):
        r = analyze(Evolution.uniform([0, 2, 1, 3, 0]))
        assert [ev.index for ev in r.events] == [1, 2, 3]
        assert r.total_jerkiness == 2 + 2 + 6
        assert r.bear_share == pytest.approx(0.2)
        assert len(r.velocities) == len(r.speeds) == 2


class TestCrossScan:
    grid = [0, 1, 2]

    def test_two_series(self):
        a = Evolution(self.grid, [0, 1, 0])
        b = Evolution(self.grid, [0, -1, -2])
        (scan,) = cross_reversal_scan([a, b])
        assert scan.index == 1 and scan.time == 1.0
        assert scan.marked[0, 1] and not scan.marked[1, 0]
        np.testing.assert_array_equal(scan.classes, [[-1, -1], [1, 1]])

    def test_identical_copies(self):
        x = [0, 2, 1, 3, 3, 0, 1]
        e = Evolution.uniform(x)
        scans = cross_reversal_scan([e, e, e])
        strict = set(direct_scan(x))
        for s in scans:
            assert s.marked.all() == (s.index in strict)
            assert s.marked.any() == (s.index in strict)

    def test_monotone_never_marked(self):
        t = np.arange(8.0)
        series = [Evolution(t, t), Evolution(t, t**2), Evolution(t, np.exp(t))]
        assert not any(s.marked.any() for s in cross_reversal_scan(series))

    def test_misaligned(self):
        with pytest.raises(ValidationError):
            cross_reversal_scan([Evolution([0, 1, 2], [0, 1, 0]), Evolution([0, 1, 4], [0, 1, 0])])
