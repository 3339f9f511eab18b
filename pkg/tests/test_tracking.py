from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from uie.decision import Decision, select_action, expected_unc_decrease, select_sensors_minimum, distinguishes
from uie.granules import Interval
from uie.network import Grid, Segment, MetricsLedger, MessageAccounting
from uie.predator_prey import build_example
from uie.tracking import (
    Direction, MotionParams, BeliefRegion, TrackerConfig, TrackerState, DirectionForecast,
    propagate_region, reachable_region, shrink_region, forecast_directions, collection_trigger, hypotheses_for_region,
    reachable_cell_count, one_shot_search_cost, per_step_search_cost, horizon,
    step_algorithm_1, step_algorithm_2, step_algorithm_3, step
)
from uie.utils import PreconditionError
from tests.utils import reference_forecast


GRID = Grid(200, 200)
SMALL = Grid(15, 12)


def _region(*cells) -> BeliefRegion:
    return BeliefRegion(frozenset(Segment(*cell) for cell in cells))


def test_directions_order():
    assert [direction.name for direction in Direction] == ["N", "S", "E", "W"]
    assert Direction.N.vector == (0, 1)
    assert Direction.W.vector == (-1, 0)


def test_propagate_four_moves():
    region = propagate_region(BeliefRegion.singleton((50, 50)), MotionParams(4, 1), GRID)
    assert region.cells == {(51, 50), (49, 50), (50, 51), (50, 49)}
    assert not region.anchor_known


def test_propagate_twice():
    params = MotionParams(4, 1)
    region = propagate_region(propagate_region(BeliefRegion.singleton((50, 50)), params, GRID), params, GRID)
    assert region.cells == {
        (50, 50),
        (52, 50), (48, 50), (50, 52), (50, 48),
        (51, 51), (51, 49), (49, 51), (49, 49)
    }


def test_propagate_on_the_border():
    region = propagate_region(BeliefRegion.singleton((0, 0)), MotionParams(4, 2), GRID)
    assert region.cells == {(2, 0), (0, 2)}


@settings(max_examples=60, deadline=None)
@given(
    st.sets(st.tuples(st.integers(0, 14), st.integers(0, 11)), min_size=1, max_size=5),
    st.integers(1, 3),
    st.integers(0, 4)
)
def test_reachable_region_matches_repeated_propagation(cells, vp, steps):
    params = MotionParams(vp + 1, vp)
    region = _region(*cells)
    expected = region
    for _ in range(steps):
        expected = propagate_region(expected, params, SMALL)
    assert reachable_region(region, steps, params, SMALL).cells == expected.cells


def test_search_costs():
    assert reachable_cell_count(5) == 36
    assert per_step_search_cost(5) == 20
    assert one_shot_search_cost(5) == 60
    # One step: the four neighbours
    assert reachable_cell_count(1) == 4


def test_shrink_region():
    a, b, c = Segment(1, 1), Segment(1, 2), Segment(1, 3)
    region = BeliefRegion(frozenset({a, b, c}))
    assert shrink_region(region, set(), {b}).cells == {a, c}
    detected = shrink_region(region, {b}, {b})
    assert detected.cells == {b} and detected.anchor_known
    single = BeliefRegion(frozenset({a}))
    assert shrink_region(single, set(), set()) == single
    # An absence everywhere keeps the region
    assert shrink_region(region, set(), {a, b, c}) == region


def test_empty_region():
    with pytest.raises(PreconditionError):
        BeliefRegion(frozenset())


def test_horizon():
    assert horizon(188, 1.3) == 17
    assert horizon(0, 1.3) == 1
    assert horizon(10_000, 1e-9) == 1


def test_forecast_far_target():
    forecast = forecast_directions(
        Segment(160, 160), BeliefRegion.singleton((66, 66)), TrackerConfig(), MotionParams(4, 3), GRID
    )
    assert forecast.dist_mid == 188
    assert forecast.horizon == 17
    assert select_action(forecast.forecast).action in (Direction.S, Direction.W)


def test_forecast_colocated_on_wall():
    """ Heading into the wall keeps the sink next to every reachable segment """
    params = MotionParams(4, 1)
    forecast = forecast_directions(Segment(0, 10), BeliefRegion.singleton((0, 10)), TrackerConfig(), params, GRID)
    assert forecast.dist_mid == 0
    assert forecast.horizon == 1
    assert forecast.probes[Direction.W] == (0, 10)
    assert forecast.intervals[Direction.W] == Interval(1 + 1 / 3, 1 + 1 / 3)
    decision = select_action(forecast.forecast)
    assert decision.action == Direction.W
    assert decision.uncertainty == pytest.approx(0)


def test_forecast_small_gamma():
    forecast = forecast_directions(
        Segment(10, 10), _region((100, 100), (120, 90)), TrackerConfig(gamma=1e-9), MotionParams(4, 3), GRID
    )
    assert forecast.horizon == 1


@pytest.mark.parametrize("sink, cells, vp, gamma", [
    ((14, 11), [(2, 3)], 1, 1.3),
    ((0, 0), [(7, 7), (8, 6), (9, 7)], 1, 1.3),
    ((7, 2), [(3, 9), (4, 9), (5, 9), (4, 10)], 2, 1.0),
    ((1, 10), [(13, 1), (12, 2)], 3, 2.5),
    ((6, 6), [(6, 6)], 2, 1.3),
])
def test_forecast_matches_reference(sink, cells, vp, gamma):
    cfg, params = TrackerConfig(gamma=gamma), MotionParams(vp + 1, vp)
    region = _region(*cells)
    forecast = forecast_directions(Segment(*sink), region, cfg, params, SMALL)
    expected, steps = reference_forecast(Segment(*sink), region, cfg, params, SMALL)
    assert forecast.horizon == steps
    for interval, reference in zip(forecast.forecast.intervals, expected.intervals):
        assert interval.lo == pytest.approx(reference.lo)
        assert interval.hi == pytest.approx(reference.hi)


def test_shifting_both_bounds_keeps_direction():
    forecast = forecast_directions(
        Segment(30, 40), _region((80, 90), (81, 90), (80, 91)), TrackerConfig(), MotionParams(4, 2), GRID
    )
    decision = select_action(forecast.forecast)
    without_horizon = type(forecast.forecast)(tuple(
        interval.shifted(-forecast.horizon) for interval in forecast.forecast.intervals
    ))
    assert select_action(without_horizon).action == decision.action


def test_trigger_on_uncertainty_decrease():
    example = build_example()
    context = DirectionForecast(example.baseline_forecast, Interval(100, 100), 1, ())
    cfg = TrackerConfig(alpha=0.1, beta=0.0)
    assert collection_trigger(example.baseline, context, BeliefRegion.singleton((0, 0)), example.hypotheses, cfg)
    assert not collection_trigger(
        example.baseline, context, BeliefRegion.singleton((0, 0)), example.hypotheses, TrackerConfig(alpha=0.2, beta=0)
    )


def test_trigger_singleton_far_away():
    sink, region = Segment(180, 180), BeliefRegion.singleton((10, 10))
    cfg, params = TrackerConfig(alpha=1.0, beta=0.0), MotionParams(4, 3)
    forecast = forecast_directions(sink, region, cfg, params, GRID)
    baseline = select_action(forecast.forecast)
    hyps = hypotheses_for_region(sink, region, cfg, params, GRID)
    assert expected_unc_decrease(baseline, hyps) == pytest.approx(0, abs=1e-12)
    assert not collection_trigger(baseline, forecast, region, hyps, cfg)


def test_trigger_distance_rule_first():
    def never():
        raise AssertionError("Hypotheses must not be built when the distance rule fires")

    region = BeliefRegion(frozenset(Segment(x, y) for x in range(6) for y in range(6)))
    context = DirectionForecast(build_example().baseline_forecast, Interval(10, 10), 1, ())
    assert collection_trigger(Decision(0, 0.0), context, region, never, TrackerConfig(beta=2.0))


def test_hypotheses_per_cell():
    sink = Segment(100, 100)
    cfg, params = TrackerConfig(), MotionParams(4, 2)
    region = _region((50, 50), (52, 50), (50, 52), (48, 50))
    hyps = hypotheses_for_region(sink, region, cfg, params, GRID)
    assert len(hyps) == 4
    assert len({hyp.signature.hit for hyp in hyps}) == 4
    assert all(hyp.signature.domain is region.cells for hyp in hyps)
    for hyp in hyps:
        single = forecast_directions(sink, BeliefRegion.singleton(hyp.signature.hit), cfg, params, GRID)
        assert hyp.forecast == single.forecast
        assert hyp.decision.action == select_action(single.forecast).action
        assert hyp.decision.uncertainty == pytest.approx(select_action(single.forecast).uncertainty)


def test_singleton_hypothesis_equals_baseline():
    sink, region = Segment(20, 30), BeliefRegion.singleton((60, 70))
    cfg, params = TrackerConfig(), MotionParams(4, 3)
    hyps = hypotheses_for_region(sink, region, cfg, params, GRID)
    baseline = select_action(forecast_directions(sink, region, cfg, params, GRID).forecast)
    assert len(hyps) == 1
    assert hyps[0].decision.action == baseline.action
    assert expected_unc_decrease(baseline, hyps) == pytest.approx(0, abs=1e-12)


def test_minimum_selection_on_nine_cells():
    sink = Segment(20, 21)
    cfg, params = TrackerConfig(), MotionParams(4, 1)
    region = _region(*[(x, y) for x in (17, 18, 19) for y in (23, 24, 25)])
    hyps = hypotheses_for_region(sink, region, cfg, params, GRID)
    decisions = {}
    for cell in region.cells:
        single = forecast_directions(sink, BeliefRegion.singleton(cell), cfg, params, GRID)
        decisions[cell] = select_action(single.forecast).action
    selected = select_sensors_minimum(hyps)
    assert distinguishes(hyps, selected)
    counts = Counter(decisions.values())
    largest = max(counts.values())
    majority = [action for action, count in counts.items() if count == largest]
    if len(majority) == 1:
        assert selected == {cell for cell, action in decisions.items() if action != majority[0]}


def test_tracker_config_defaults():
    assert TrackerConfig(algorithm=4).strategy == "minimum"
    assert TrackerConfig(algorithm=3).strategy == "exhaustive"
    assert TrackerConfig(algorithm=3, strategy="minimum").violations()
    assert len(TrackerConfig(algorithm=7, alpha=2, beta=-1, gamma=0).violations()) == 4
    assert MotionParams(3, 3).violations()
    assert MotionParams(4, 3).violations(Grid(6, 20))


def _state(algorithm, sink, target, vp=0, v=4, grid=Grid(10, 10), **cfg) -> TrackerState:
    return TrackerState.start(
        grid, MotionParams(v, vp), TrackerConfig(algorithm=algorithm, **cfg), MessageAccounting(),
        Segment(*sink), Segment(*target)
    )


def test_algorithm_1_path_inclusion_catch():
    state, ledger = _state(1, (0, 0), (2, 0)), MetricsLedger()
    step_algorithm_1(state, ledger)
    assert state.caught
    assert state.step == 1
    assert ledger.snapshot() == {"hop_count": 2, "active_time": 1, "deliveries_to_sink": 1}
    with pytest.raises(PreconditionError):
        step(state, ledger)


def test_algorithm_1_pursuit_stops_on_goal_axis():
    state, ledger = _state(1, (0, 0), (2, 5)), MetricsLedger()
    step_algorithm_1(state, ledger)
    assert state.sink == (0, 4)
    step_algorithm_1(state, ledger)
    assert state.sink == (2, 4)
    step_algorithm_1(state, ledger)
    assert state.caught


def test_algorithm_2_rebinds_beacon_on_arrival():
    state, ledger = _state(2, (5, 5), (8, 5)), MetricsLedger()
    state.beacon = state.sink
    step_algorithm_2(state, ledger)
    assert state.beacon == (8, 5)
    # Once when leaving the beacon, once when arriving at the new one
    assert ledger.deliveries_to_sink == 2
    assert state.caught


def test_algorithm_3_forced_collections_pursue_target():
    grid = Grid(60, 60)
    state = _state(3, (50, 50), (10, 25), vp=1, grid=grid, alpha=0.0, beta=float("inf"))
    ledger = MetricsLedger()
    state.target = Segment(11, 25)
    before = grid.hop_distance(state.sink, state.target)
    step_algorithm_3(state, ledger)
    assert state.region.cells == {state.target}
    assert state.region.anchor_known
    assert grid.hop_distance(state.sink, state.target) < before
    assert ledger.deliveries_to_sink == 1
    assert state.activations == [4]
