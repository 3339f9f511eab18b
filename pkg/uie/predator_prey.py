""" Two-prey illustration of the method

A predator chooses which of two prey to chase. The distance to each prey is known as an interval, split into segments
watched by one sensor each. Each combination of one detecting sensor per prey is a hypothesis about the full-data
outcome. The module builds the whole family, runs the decision engine on it and checks the outcome against the golden
values of the published table.
"""
# Std lib
import itertools
from dataclasses import dataclass, field
from typing import Tuple, List, Dict, Set, Sequence
# Local
from uie.granules import Interval, prob_leq
from uie.decision import (
    Forecast, Decision, Hypothesis, select_action, mean_hypothesis_uncertainty, expected_unc_decrease,
    select_sensors_exhaustive, select_sensors_minimum
)


PREY_DISTANCES: Tuple[Interval, ...] = (Interval(10, 50), Interval(30, 70))
SEGMENT_LENGTH: float = 10.0
PREDATOR_SPEED: float = 30.0
PREY_SPEED: Interval = Interval(20, 25)
ALPHA: float = 0.1

# (readings, F(1), F(2), chosen action (1-based), uncertainty with two decimals), first prey varying fastest
EXPECTED_ROWS: Tuple[Tuple[Tuple[int, ...], Tuple[int, int], Tuple[int, int], int, float], ...] = (
    ((1, 0, 0, 0, 1, 0, 0, 0), (1, 4), (3, 8), 1, 0.07),
    ((0, 1, 0, 0, 1, 0, 0, 0), (2, 6), (3, 8), 1, 0.45),
    ((0, 0, 1, 0, 1, 0, 0, 0), (3, 8), (3, 8), 1, 1.00),
    ((0, 0, 0, 1, 1, 0, 0, 0), (4, 10), (3, 8), 2, 0.53),
    ((1, 0, 0, 0, 0, 1, 0, 0), (1, 4), (4, 10), 1, 0.00),
    ((0, 1, 0, 0, 0, 1, 0, 0), (2, 6), (4, 10), 1, 0.17),
    ((0, 0, 1, 0, 0, 1, 0, 0), (3, 8), (4, 10), 1, 0.53),
    ((0, 0, 0, 1, 0, 1, 0, 0), (4, 10), (4, 10), 1, 1.00),
    ((1, 0, 0, 0, 0, 0, 1, 0), (1, 4), (5, 12), 1, 0.00),
    ((0, 1, 0, 0, 0, 0, 1, 0), (2, 6), (5, 12), 1, 0.04),
    ((0, 0, 1, 0, 0, 0, 1, 0), (3, 8), (5, 12), 1, 0.26),
    ((0, 0, 0, 1, 0, 0, 1, 0), (4, 10), (5, 12), 1, 0.60),
    ((1, 0, 0, 0, 0, 0, 0, 1), (1, 4), (6, 14), 1, 0.00),
    ((0, 1, 0, 0, 0, 0, 0, 1), (2, 6), (6, 14), 1, 0.00),
    ((0, 0, 1, 0, 0, 0, 0, 1), (3, 8), (6, 14), 1, 0.10),
    ((0, 0, 0, 1, 0, 0, 0, 1), (4, 10), (6, 14), 1, 0.33),
)
EXPECTED_PROBABILITY: float = 0.7525
EXPECTED_BASELINE_UNCERTAINTY: float = 0.49
EXPECTED_MEAN_UNCERTAINTY: float = 0.32
EXPECTED_DECREASE: float = 0.17
EXPECTED_EXHAUSTIVE: Set[int] = set(range(1, 9))
EXPECTED_MINIMUM: Set[int] = {4, 5}


def time_to_catch(distance: Interval, predator_speed: float, prey_speed: Interval) -> Interval:
    """ Time needed to close a distance interval when the prey flees at any speed of `prey_speed`

    >>> time_to_catch(Interval(10, 50), 30, Interval(20, 25))
    Interval(lo=1.0, hi=10.0)
    """
    fastest = predator_speed - prey_speed.lo
    slowest = predator_speed - prey_speed.hi
    if slowest <= 0:
        raise ValueError("The predator must be faster than every prey")
    return Interval(distance.lo / fastest, distance.hi / slowest)


def sensor_segments(distances: Sequence[Interval], segment_length: float) -> List[List[Tuple[int, Interval]]]:
    """ Splits each distance interval into sensor segments, sensors being numbered from 1 across all prey

    >>> [[sensor for sensor, _ in segments] for segments in sensor_segments(PREY_DISTANCES, 10)]
    [[1, 2, 3, 4], [5, 6, 7, 8]]
    """
    out = []
    sensor = 1
    for distance in distances:
        segments = []
        count = int(round(distance.width / segment_length))
        for idx in range(count):
            lo = distance.lo + idx * segment_length
            segments.append((sensor, Interval(lo, lo + segment_length)))
            sensor += 1
        out.append(segments)
    return out


@dataclass(frozen=True)
class ExampleRow:
    granule: Tuple[Interval, ...]
    hypothesis: Hypothesis

    @property
    def readings(self) -> Tuple[int, ...]:
        return tuple(self.hypothesis.signature[sensor] for sensor in sorted(self.hypothesis.signature))


@dataclass
class WorkedExample:
    baseline_forecast: Forecast
    baseline: Decision
    probability: float
    rows: List[ExampleRow]
    mean_uncertainty: float
    expected_decrease: float
    alpha: float
    exhaustive: Set[int] = field(default_factory=set)
    minimum: Set[int] = field(default_factory=set)

    @property
    def hypotheses(self) -> List[Hypothesis]:
        return [row.hypothesis for row in self.rows]

    @property
    def collect(self) -> bool:
        return self.expected_decrease > self.alpha


def build_example(
        distances: Sequence[Interval] = PREY_DISTANCES,
        segment_length: float = SEGMENT_LENGTH,
        predator_speed: float = PREDATOR_SPEED,
        prey_speed: Interval = PREY_SPEED,
        alpha: float = ALPHA
) -> WorkedExample:
    """ Builds the hypothesis family of the example and evaluates every quantity of the method on it """
    def forecast_for(granule: Sequence[Interval]) -> Forecast:
        return Forecast(tuple(time_to_catch(distance, predator_speed, prey_speed) for distance in granule))

    segments = sensor_segments(distances, segment_length)
    sensors = [sensor for prey in segments for sensor, _ in prey]
    baseline_forecast = forecast_for(distances)
    baseline = select_action(baseline_forecast)

    rows = []
    # First prey varies fastest
    for combination in itertools.product(*reversed(segments)):
        combination = tuple(reversed(combination))
        detecting = {sensor for sensor, _ in combination}
        signature: Dict[int, int] = {sensor: int(sensor in detecting) for sensor in sensors}
        granule = tuple(segment for _, segment in combination)
        forecast = forecast_for(granule)
        rows.append(ExampleRow(granule, Hypothesis(signature, forecast, select_action(forecast))))

    hyps = [row.hypothesis for row in rows]
    return WorkedExample(
        baseline_forecast=baseline_forecast,
        baseline=baseline,
        probability=prob_leq(baseline_forecast.intervals[0], baseline_forecast.intervals[1]),
        rows=rows,
        mean_uncertainty=mean_hypothesis_uncertainty(hyps),
        expected_decrease=expected_unc_decrease(baseline, hyps),
        alpha=alpha,
        exhaustive=select_sensors_exhaustive(hyps),
        minimum=select_sensors_minimum(hyps)
    )


def verify(example: WorkedExample) -> List[str]:
    """ Compares the default example with the published values. Returns one line per mismatch.

    >>> verify(build_example())
    []
    """
    mismatches = []
    if len(example.rows) != len(EXPECTED_ROWS):
        return [f"expected {len(EXPECTED_ROWS)} hypotheses, got {len(example.rows)}"]
    for idx, (row, (readings, first, second, action, uncertainty)) in enumerate(zip(example.rows, EXPECTED_ROWS), 1):
        forecast = row.hypothesis.forecast.intervals
        decision = row.hypothesis.decision
        if row.readings != readings:
            mismatches.append(f"row {idx}: readings {row.readings} != {readings}")
        if (forecast[0].lo, forecast[0].hi) != first:
            mismatches.append(f"row {idx}: F(1) {forecast[0]} != {first}")
        if (forecast[1].lo, forecast[1].hi) != second:
            mismatches.append(f"row {idx}: F(2) {forecast[1]} != {second}")
        if decision.action + 1 != action:
            mismatches.append(f"row {idx}: action {decision.action + 1} != {action}")
        if abs(decision.uncertainty - uncertainty) > 0.005:
            mismatches.append(f"row {idx}: UNC {decision.uncertainty:.4f} != {uncertainty:.2f}")

    scalars = (
        ("P[F(1) <= F(2)]", example.probability, EXPECTED_PROBABILITY, 0.005),
        ("UNC(1, S0)", example.baseline.uncertainty, EXPECTED_BASELINE_UNCERTAINTY, 0.01),
        ("mean UNC", example.mean_uncertainty, EXPECTED_MEAN_UNCERTAINTY, 0.01),
        ("dUNC", example.expected_decrease, EXPECTED_DECREASE, 0.015),
    )
    for name, value, expected, tolerance in scalars:
        if abs(value - expected) > tolerance:
            mismatches.append(f"{name}: {value:.4f} != {expected} (+/- {tolerance})")
    if example.baseline.action != 0:
        mismatches.append(f"baseline action {example.baseline.action + 1} != 1")
    if example.exhaustive != EXPECTED_EXHAUSTIVE:
        mismatches.append(f"exhaustive strategy {sorted(example.exhaustive)} != {sorted(EXPECTED_EXHAUSTIVE)}")
    if example.minimum != EXPECTED_MINIMUM:
        mismatches.append(f"minimum strategy {sorted(example.minimum)} != {sorted(EXPECTED_MINIMUM)}")
    return mismatches
