import pytest
import numpy as np
from hypothesis import given, strategies as st

from uie.decision import (
    Forecast, Decision, Hypothesis, DetectionSignature, decide, select_action, mean_hypothesis_uncertainty,
    expected_unc_decrease, select_sensors_exhaustive, select_sensors_minimum, distinguishes
)
from uie.predator_prey import build_example
from uie.utils import PreconditionError, ContractViolation
from tests.utils import brute_force_cover


def _hyp(signature, uncertainty=0.0, action=0, weight=1.0) -> Hypothesis:
    return Hypothesis(signature, Forecast.of((0, 1)), Decision(action, uncertainty), weight)


@pytest.mark.parametrize("intervals, action, uncertainty", [
    (((1, 10), (3, 14)), 0, 0.49),
    (((4, 10), (3, 8)), 1, 0.53),
    (((5, 6), ), 0, 0.0),
])
def test_select_action_examples(intervals, action, uncertainty):
    decision = select_action(Forecast.of(*intervals))
    assert decision.action == action
    assert decision.uncertainty == pytest.approx(uncertainty, abs=0.01)


def test_select_action_empty():
    with pytest.raises(PreconditionError):
        select_action(Forecast(()))


def test_ties_go_to_smallest_action():
    decision = select_action(Forecast.of((1, 3), (0, 4), (1, 3)))
    assert decision.action == 0
    assert decision.uncertainty == pytest.approx(1.0)


def test_identical_rival_gives_full_uncertainty():
    assert select_action(Forecast.of((2, 5), (2, 5), (9, 12))).uncertainty == pytest.approx(1.0)
    # Equal midpoints are enough under uniform distributions
    assert select_action(Forecast.of((0, 10), (4, 6))).uncertainty == pytest.approx(1.0)
    assert select_action(Forecast.of((0, 10), (4, 7))).uncertainty < 1


def test_decide_matches_select_action():
    rng = np.random.default_rng(11)
    lo = rng.uniform(0, 20, size=(50, 4))
    hi = lo + rng.uniform(0, 10, size=(50, 4))
    actions, uncertainties = decide(lo, hi)
    for row in range(50):
        decision = select_action(Forecast.of(*zip(lo[row], hi[row])))
        assert decision.action == actions[row]
        assert decision.uncertainty == pytest.approx(uncertainties[row])


forecasts = st.lists(
    st.tuples(st.integers(0, 100), st.integers(0, 50)).map(lambda pair: (pair[0], pair[0] + pair[1])),
    min_size=1, max_size=6
)


@given(forecasts)
def test_uncertainty_of_choice_is_at_most_one(intervals):
    assert select_action(Forecast.of(*intervals)).uncertainty <= 1 + 1e-12


@given(forecasts, st.integers(-100, 100), st.sampled_from([0.5, 3.0, 7.0]))
def test_argmax_invariance(intervals, offset, factor):
    decision = select_action(Forecast.of(*intervals))
    shifted = Forecast(tuple(interval.shifted(offset) for interval in Forecast.of(*intervals).intervals))
    scaled = Forecast(tuple(interval.scaled(factor) for interval in Forecast.of(*intervals).intervals))
    assert select_action(shifted).action == decision.action
    assert select_action(scaled).action == decision.action


def test_mean_hypothesis_uncertainty():
    assert mean_hypothesis_uncertainty([_hyp({1: 1}, 0.4)]) == pytest.approx(0.4)
    assert mean_hypothesis_uncertainty([
        _hyp({1: 1, 2: 0}, 0.2, weight=3),
        _hyp({1: 0, 2: 1}, 0.4, weight=1)
    ]) == pytest.approx(0.25)
    with pytest.raises(PreconditionError):
        mean_hypothesis_uncertainty([])
    with pytest.raises(PreconditionError):
        _hyp({1: 1}, weight=0)


def test_expected_unc_decrease():
    assert expected_unc_decrease(Decision(0, 0.5), [_hyp({1: 1}, 0.6)]) == pytest.approx(-0.1)
    forecast = Forecast.of((1, 10), (3, 14))
    baseline = select_action(forecast)
    assert expected_unc_decrease(baseline, [Hypothesis({1: 0}, forecast, baseline)]) == 0


def test_two_prey_family():
    example = build_example()
    hyps = example.hypotheses
    assert mean_hypothesis_uncertainty(hyps) == pytest.approx(0.3175, abs=0.001)
    assert mean_hypothesis_uncertainty(hyps) == pytest.approx(0.32, abs=0.01)
    assert expected_unc_decrease(example.baseline, hyps) == pytest.approx(0.17, abs=0.015)
    assert select_sensors_exhaustive(hyps) == set(range(1, 9))
    assert select_sensors_minimum(hyps) == {4, 5}
    assert distinguishes(hyps, {4, 5})
    assert not distinguishes(hyps, {4})


def test_selection_on_single_hypothesis():
    hyps = [_hyp({1: 1, 2: 0, 3: 1})]
    assert select_sensors_exhaustive(hyps) == {1, 3}
    assert select_sensors_minimum(hyps) == set()


def test_selection_when_decisions_agree():
    hyps = [_hyp({1: 1, 2: 0}), _hyp({1: 0, 2: 1})]
    assert select_sensors_minimum(hyps) == set()


def test_inconsistent_domains():
    hyps = [_hyp({1: 1, 2: 0}), _hyp({1: 0, 3: 1})]
    with pytest.raises(ContractViolation):
        select_sensors_exhaustive(hyps)
    with pytest.raises(ContractViolation):
        select_sensors_minimum(hyps)
    with pytest.raises(PreconditionError):
        select_sensors_minimum([])


def test_detection_signature():
    domain = frozenset({"a", "b", "c"})
    signature = DetectionSignature(domain, "b")
    assert signature["b"] == 1 and signature["a"] == 0
    assert len(signature) == 3
    assert signature.support == {"b"}
    with pytest.raises(KeyError):
        signature["z"]
    with pytest.raises(PreconditionError):
        DetectionSignature(domain, "z")


def test_single_cell_family_dissenters():
    cells = [(x, y) for x in range(3) for y in range(3)]
    domain = frozenset(cells)
    dissenters = {(0, 2), (2, 1)}
    hyps = [_hyp(DetectionSignature(domain, cell), action=1 if cell in dissenters else 0) for cell in cells]
    assert select_sensors_minimum(hyps) == dissenters
    assert select_sensors_exhaustive(hyps) == set(cells)
    assert brute_force_cover(hyps, sorted(cells), max_size=2) == dissenters


families = st.integers(min_value=1, max_value=6).flatmap(
    lambda n_sensors: st.lists(
        st.tuples(st.tuples(*[st.integers(0, 1)] * n_sensors), st.integers(0, 2)),
        min_size=1, max_size=8, unique_by=lambda pair: pair[0]
    )
)


@given(families)
def test_minimum_strategy_properties(family):
    hyps = [_hyp(dict(enumerate(readings)), action=action) for readings, action in family]
    minimum = select_sensors_minimum(hyps)
    assert minimum <= select_sensors_exhaustive(hyps)
    assert distinguishes(hyps, minimum)
    optimal = brute_force_cover(hyps, sorted(hyps[0].signature))
    assert optimal is not None and len(minimum) >= len(optimal)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
def test_single_cell_cover_matches_generic_cover(actions):
    cells = list(range(len(actions)))
    domain = frozenset(cells)
    one_hot = [_hyp(DetectionSignature(domain, cell), action=action) for cell, action in zip(cells, actions)]
    generic = [
        _hyp({other: int(other == cell) for other in cells}, action=action)
        for cell, action in zip(cells, actions)
    ]
    assert select_sensors_minimum(one_hot) == select_sensors_minimum(generic)
