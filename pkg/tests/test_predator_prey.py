import dataclasses
import pytest

from uie.granules import Interval
from uie.predator_prey import build_example, verify, time_to_catch, sensor_segments, EXPECTED_ROWS, PREY_DISTANCES


def test_matches_published_table():
    assert verify(build_example()) == []


def test_first_row():
    row = build_example().rows[0]
    first, second = row.hypothesis.forecast.intervals
    assert (first.lo, first.hi) == (1, 4)
    assert (second.lo, second.hi) == (3, 8)
    assert row.hypothesis.decision.action == 0
    assert row.hypothesis.decision.uncertainty == pytest.approx(0.07, abs=0.005)
    assert row.granule == (Interval(10, 20), Interval(30, 40))


def test_rows_order_first_prey_fastest():
    example = build_example()
    assert len(example.rows) == 16
    assert [row.readings for row in example.rows] == [expected[0] for expected in EXPECTED_ROWS]
    assert example.rows[1].readings == (0, 1, 0, 0, 1, 0, 0, 0)


def test_scalars():
    example = build_example()
    assert example.probability == pytest.approx(0.7525, abs=0.005)
    assert example.baseline.action == 0
    assert example.baseline.uncertainty == pytest.approx(0.49, abs=0.01)
    assert example.expected_decrease == pytest.approx(0.17, abs=0.015)
    assert example.collect
    assert example.exhaustive == set(range(1, 9))
    assert example.minimum == {4, 5}


def test_higher_threshold_skips_collection():
    assert not build_example(alpha=0.2).collect


def test_time_to_catch():
    assert time_to_catch(Interval(30, 70), 30, Interval(20, 25)) == Interval(3, 14)
    with pytest.raises(ValueError):
        time_to_catch(Interval(30, 70), 20, Interval(20, 25))


def test_sensor_segments():
    segments = sensor_segments(PREY_DISTANCES, 10)
    assert segments[1][0] == (5, Interval(30, 40))
    assert sensor_segments(PREY_DISTANCES, 20) == [
        [(1, Interval(10, 30)), (2, Interval(30, 50))],
        [(3, Interval(30, 50)), (4, Interval(50, 70))]
    ]


def test_verify_reports_mismatches():
    example = dataclasses.replace(build_example(), minimum={1})
    mismatches = verify(example)
    assert len(mismatches) == 1
    assert mismatches[0].startswith("minimum strategy")
