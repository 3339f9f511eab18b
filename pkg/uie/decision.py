""" Decision engine: optimal action from interval forecasts, decision uncertainty, expected uncertainty decrease
and the two sensor selection strategies (exhaustive and minimum).
"""
# Std lib
import heapq
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Tuple, List, Dict, Sequence, Hashable, FrozenSet, Set, Optional, Iterator
# Non std lib
import numpy as np
# Local
from uie.granules import Interval, IntervalLike, as_interval, prob_leq_array
from uie.utils import PreconditionError, ContractViolation, message, _sbmsg


ActionId = int
SensorId = Hashable


@dataclass(frozen=True)
class Forecast:
    """ One objective interval per action, indexed by ActionId """
    intervals: Tuple[Interval, ...]

    @classmethod
    def of(cls, *intervals: IntervalLike) -> "Forecast":
        """
        >>> Forecast.of((1, 10), (3, 14)).intervals[1]
        Interval(lo=3.0, hi=14.0)
        """
        return cls(tuple(as_interval(interval) for interval in intervals))

    def __len__(self):
        return len(self.intervals)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.array([interval.lo for interval in self.intervals], dtype=float),
            np.array([interval.hi for interval in self.intervals], dtype=float)
        )


@dataclass(frozen=True)
class Decision:
    action: ActionId
    uncertainty: float


class DetectionSignature(Mapping):
    """ Sensor readings where exactly one sensor of `domain` detects (reading 1) and all others read 0.

    Families of such signatures share their `domain`, which keeps a family over `n` sensors in O(n) memory.

    >>> signature = DetectionSignature(frozenset({1, 2, 3}), 2)
    >>> dict(sorted(signature.items()))
    {1: 0, 2: 1, 3: 0}
    """
    __slots__ = ("domain", "hit")

    def __init__(self, domain: FrozenSet[SensorId], hit: SensorId):
        if hit not in domain:
            raise PreconditionError(f"Detecting sensor {hit!r} is not part of the signature domain")
        self.domain: FrozenSet[SensorId] = domain
        self.hit: SensorId = hit

    @property
    def support(self) -> FrozenSet[SensorId]:
        return frozenset((self.hit, ))

    def __getitem__(self, sensor: SensorId) -> int:
        if sensor not in self.domain:
            raise KeyError(sensor)
        return 1 if sensor == self.hit else 0

    def __iter__(self) -> Iterator[SensorId]:
        return iter(self.domain)

    def __len__(self) -> int:
        return len(self.domain)

    def __repr__(self):
        return f"DetectionSignature(hit={self.hit!r}, sensors={len(self.domain)})"


@dataclass(frozen=True)
class Hypothesis:
    """ A possible full-data outcome: the readings it would produce, the forecast and the decision they induce """
    signature: Mapping
    forecast: Forecast
    decision: Decision
    weight: float = 1.0

    def __post_init__(self):
        if not self.weight > 0:
            raise PreconditionError(f"Hypothesis weight must be positive, got {self.weight}")


def decide(lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """ Maximin selection over several forecasts at once.

    :param lo: Lower bounds, shape (n_forecasts, n_actions)
    :param hi: Upper bounds, same shape
    :return: chosen actions (n_forecasts,) and their decision uncertainties (n_forecasts,)
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    n_forecasts, n_actions = lo.shape
    if n_actions == 0:
        raise PreconditionError("The action set is empty")
    if n_actions == 1:
        return np.zeros(n_forecasts, dtype=int), np.zeros(n_forecasts, dtype=float)
    # probability[f, a, b] = P[F(a) <= F(b)] for forecast f
    probability = prob_leq_array(lo[:, :, None], hi[:, :, None], lo[:, None, :], hi[:, None, :])
    rivals = ~np.eye(n_actions, dtype=bool)
    worst = np.where(rivals, probability, np.inf).min(axis=2)
    actions = worst.argmax(axis=1)
    uncertainty = np.where(rivals, 2 * (1 - probability), -np.inf)[np.arange(n_forecasts), actions].max(axis=1)
    return actions, uncertainty


def select_action(forecast: Forecast) -> Decision:
    """ Picks the action whose worst pairwise probability of being no worse than a rival is the highest.
    Ties go to the smallest action index.

    >>> decision = select_action(Forecast.of((4, 10), (3, 8)))
    >>> decision.action, round(decision.uncertainty, 2)
    (1, 0.53)
    """
    if len(forecast) == 0:
        raise PreconditionError("The action set is empty")
    lo, hi = forecast.bounds()
    actions, uncertainty = decide(lo[None, :], hi[None, :])
    return Decision(int(actions[0]), float(uncertainty[0]))


def mean_hypothesis_uncertainty(hyps: Sequence[Hypothesis]) -> float:
    """ Weighted mean of the decision uncertainties predicted for each hypothesis """
    if not len(hyps):
        raise PreconditionError("At least one hypothesis is required")
    weights = np.array([hyp.weight for hyp in hyps], dtype=float)
    values = np.array([hyp.decision.uncertainty for hyp in hyps], dtype=float)
    return float((weights * values).sum() / weights.sum())


def expected_unc_decrease(baseline: Decision, hyps: Sequence[Hypothesis]) -> float:
    """ Uncertainty of the decision taken without new data minus the mean uncertainty over the hypotheses.
    Can be negative.
    """
    return baseline.uncertainty - mean_hypothesis_uncertainty(hyps)


def _domain(signature: Mapping) -> FrozenSet[SensorId]:
    domain = getattr(signature, "domain", None)
    if domain is None:
        domain = frozenset(signature.keys())
    return domain


def _support(signature: Mapping) -> FrozenSet[SensorId]:
    support = getattr(signature, "support", None)
    if support is None:
        support = frozenset(sensor for sensor, reading in signature.items() if reading)
    return support


def _family_domain(hyps: Sequence[Hypothesis]) -> FrozenSet[SensorId]:
    if not len(hyps):
        raise PreconditionError("At least one hypothesis is required")
    domain = _domain(hyps[0].signature)
    for hyp in hyps[1:]:
        other = _domain(hyp.signature)
        if other is not domain and other != domain:
            raise ContractViolation("Hypothesis signatures do not share the same sensor domain")
    return domain


def select_sensors_exhaustive(hyps: Sequence[Hypothesis]) -> Set[SensorId]:
    """ Every sensor that reads something in at least one hypothesis """
    _family_domain(hyps)
    selected = set()
    for hyp in hyps:
        selected.update(_support(hyp.signature))
    return selected


def _reading_codes(hyps: Sequence[Hypothesis], sensors: List[SensorId]) -> np.ndarray:
    """ Matrix (hypotheses x sensors) of integer codes, equal codes meaning equal readings """
    column = {sensor: idx for idx, sensor in enumerate(sensors)}
    readings = np.zeros((len(hyps), len(sensors)), dtype=float)
    for row, hyp in enumerate(hyps):
        for sensor in _support(hyp.signature):
            readings[row, column[sensor]] = hyp.signature[sensor]
    _, codes = np.unique(readings.ravel(), return_inverse=True)
    return codes.reshape(readings.shape)


def _differing_pairs(keys: np.ndarray, decisions: np.ndarray, n_decisions: int) -> int:
    """ Number of pairs sharing a key while having different decisions """
    _, keys = np.unique(keys, return_inverse=True)
    keys = keys.ravel()
    blocks = np.bincount(keys).astype(np.int64)
    split = np.bincount(keys * n_decisions + decisions).astype(np.int64)
    return int((blocks ** 2).sum() - (split ** 2).sum()) // 2


def _initial_gains(codes: np.ndarray, decisions: np.ndarray, n_decisions: int, uncovered: int) -> np.ndarray:
    remaining = np.zeros(codes.shape[1], dtype=np.int64)
    for code in range(int(codes.max()) + 1):
        reads = codes == code
        same = reads.sum(axis=0).astype(np.int64) ** 2
        for decision in range(n_decisions):
            same = same - reads[decisions == decision].sum(axis=0).astype(np.int64) ** 2
        remaining += same // 2
    return uncovered - remaining


def _one_hot_hits(hyps: Sequence[Hypothesis]) -> Optional[List[SensorId]]:
    """ Detecting sensor of each hypothesis when every signature is a `DetectionSignature` with a distinct hit """
    hits = []
    for hyp in hyps:
        if not isinstance(hyp.signature, DetectionSignature):
            return None
        hits.append(hyp.signature.hit)
    if len(set(hits)) != len(hits):
        return None
    return hits


def _one_hot_cover(hits: List[SensorId], decisions: List[ActionId]) -> Set[SensorId]:
    """ Greedy cover for one-hot families. Selecting the sensor of a hypothesis isolates it from the pool of
    hypotheses that all read zero, separating it from every pooled hypothesis with another decision.
    """
    classes: Dict[ActionId, List[SensorId]] = {}
    for hit, decision in sorted(zip(hits, decisions), key=lambda pair: pair[0], reverse=True):
        classes.setdefault(decision, []).append(hit)
    selected = set()
    # Gain of isolating a hypothesis is the pool size minus the size of its class: smallest class first
    while len(classes) > 1:
        smallest = min(len(members) for members in classes.values())
        decision = min(
            (decision for decision, members in classes.items() if len(members) == smallest),
            key=lambda decision: classes[decision][-1]
        )
        selected.add(classes[decision].pop())
        if not classes[decision]:
            del classes[decision]
    return selected


def select_sensors_minimum(hyps: Sequence[Hypothesis]) -> Set[SensorId]:
    """ Greedy set cover of the hypothesis pairs that lead to different decisions: the returned sensors tell apart
    every such pair. Sensors are taken by decreasing number of newly separated pairs, smallest sensor id first on ties.
    """
    domain = _family_domain(hyps)
    hits = _one_hot_hits(hyps)
    if hits is not None:
        return _one_hot_cover(hits, [hyp.decision.action for hyp in hyps])

    decisions = np.array([hyp.decision.action for hyp in hyps], dtype=np.int64)
    n_decisions = int(decisions.max()) + 1
    blocks = np.zeros(len(hyps), dtype=np.int64)
    uncovered = _differing_pairs(blocks, decisions, n_decisions)
    if uncovered == 0:
        return set()

    sensors = sorted(domain)
    codes = _reading_codes(hyps, sensors)
    n_codes = int(codes.max()) + 1
    gains = _initial_gains(codes, decisions, n_decisions, uncovered)
    # Lazy greedy: stored gains are upper bounds as coverage only shrinks
    heap = [(-int(gain), idx) for idx, gain in enumerate(gains) if gain > 0]
    heapq.heapify(heap)

    selected: List[int] = []
    while uncovered and heap:
        _, idx = heapq.heappop(heap)
        gain = uncovered - _differing_pairs(blocks * n_codes + codes[:, idx], decisions, n_decisions)
        if gain <= 0:
            continue
        if heap and (-gain, idx) > heap[0]:
            heapq.heappush(heap, (-gain, idx))
            continue
        selected.append(idx)
        _, blocks = np.unique(blocks * n_codes + codes[:, idx], return_inverse=True)
        blocks = blocks.ravel().astype(np.int64)
        uncovered -= gain

    if uncovered:
        message(_sbmsg(f"{uncovered} hypothesis pairs with different decisions share identical readings"))
    return {sensors[idx] for idx in selected}


def distinguishes(hyps: Sequence[Hypothesis], sensors: Optional[Set[SensorId]], only_differing: bool = True) -> bool:
    """ Checks by direct pair scan that `sensors` tell apart every pair of hypotheses (every pair with different
    decisions when `only_differing`)
    """
    sensors = sensors or set()
    for j, first in enumerate(hyps):
        for second in hyps[j + 1:]:
            if only_differing and first.decision.action == second.decision.action:
                continue
            if not any(first.signature[sensor] != second.signature[sensor] for sensor in sensors):
                return False
    return True
