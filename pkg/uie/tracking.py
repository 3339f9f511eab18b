""" Mobile sink tracking controllers

The sink keeps a belief region, the set of segments that may hold the target. Between observations the region grows
by the target motion model (one move of `vp` segments along one axis per step). Forecast-driven controllers evaluate
the time needed to catch the target when heading north, south, east or west, and collect new sensor data only when
it is expected to reduce the uncertainty of that choice enough, or when the sink is close to a large region.

Five controllers are available:

1. the sink receives the target location at every step and heads towards it;
2. the target reports to a beacon node, the sink heads to the beacon and learns the new location on arrival;
3. forecast-driven sink collecting data from every sensor of the region;
4. same as 3 with the minimum sensor selection;
5. forecast-driven sink requesting the target location from a beacon node.
"""
# Std lib
import math
from enum import IntEnum
from functools import lru_cache, cached_property
from dataclasses import dataclass, field
from typing import Tuple, List, Dict, Set, FrozenSet, Optional, Callable, Union, Sequence, Iterable
# Non std lib
import numpy as np
# Local
from uie.granules import Interval
from uie.decision import (
    Forecast, Decision, Hypothesis, DetectionSignature, decide, select_action, expected_unc_decrease,
    select_sensors_minimum
)
from uie.network import Grid, Segment, MetricsLedger, MessageAccounting
from uie.utils import PreconditionError, message, _sbmsg


ALGORITHMS: Tuple[int, ...] = (1, 2, 3, 4, 5)
STRATEGIES: Tuple[str, ...] = ("exhaustive", "minimum")
# Rows of the distance computation handled at once
_CHUNK = 2048


class Direction(IntEnum):
    N = 0
    S = 1
    E = 2
    W = 3

    @property
    def vector(self) -> Tuple[int, int]:
        return _VECTORS[self]


_VECTORS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, -1), (1, 0), (-1, 0))
_VECTOR_ARRAY = np.array(_VECTORS, dtype=np.int64)


@dataclass(frozen=True)
class MotionParams:
    """ Speeds in segments per time step. `vp = 0` is accepted for a stationary target. """
    v: int = 4
    vp: int = 3

    def violations(self, grid: Optional[Grid] = None) -> List[str]:
        errors = []
        if self.vp < 0:
            errors.append(f"vp must be >= 0, got {self.vp}")
        if self.v <= self.vp:
            errors.append(f"v must be greater than vp, got v={self.v} and vp={self.vp}")
        if grid is not None and (grid.width <= 2 * self.vp or grid.height <= 2 * self.vp):
            errors.append(f"grid {grid.width}x{grid.height} must be larger than 2*vp={2 * self.vp} on both axes")
        return errors


@dataclass(frozen=True)
class BeliefRegion:
    """ Non-empty set of segments that may hold the target """
    cells: FrozenSet[Segment]
    anchor_known: bool = False

    def __post_init__(self):
        if not self.cells:
            raise PreconditionError("A belief region cannot be empty")

    @classmethod
    def singleton(cls, cell: Segment) -> "BeliefRegion":
        return cls(frozenset((Segment(*cell), )), anchor_known=True)

    @classmethod
    def from_array(cls, cells: np.ndarray, anchor_known: bool = False) -> "BeliefRegion":
        return cls(frozenset(Segment(int(x), int(y)) for x, y in cells), anchor_known=anchor_known)

    @property
    def area(self) -> int:
        return len(self.cells)

    @cached_property
    def sorted_cells(self) -> List[Segment]:
        return sorted(self.cells)

    @cached_property
    def array(self) -> np.ndarray:
        """ (n, 2) coordinates, sorted """
        return np.array(self.sorted_cells, dtype=np.int64).reshape(-1, 2)

    def __contains__(self, cell) -> bool:
        return cell in self.cells


@dataclass(frozen=True)
class TrackerConfig:
    """ Controller parameters. The strategy defaults to `minimum` for algorithm 4 and `exhaustive` otherwise. """
    algorithm: int = 5
    alpha: float = 0.15
    beta: float = 2.0
    gamma: float = 1.3
    strategy: Optional[str] = None

    def __post_init__(self):
        if self.strategy is None:
            object.__setattr__(self, "strategy", "minimum" if self.algorithm == 4 else "exhaustive")

    def violations(self) -> List[str]:
        errors = []
        if self.algorithm not in ALGORITHMS:
            errors.append(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm}")
        if not 0 <= self.alpha <= 1:
            errors.append(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.beta >= 0:
            errors.append(f"beta must be >= 0, got {self.beta}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            errors.append(f"gamma must be a positive number, got {self.gamma}")
        if self.strategy not in STRATEGIES:
            errors.append(f"strategy must be one of {STRATEGIES}, got {self.strategy}")
        elif (self.strategy == "minimum") != (self.algorithm == 4):
            errors.append(f"strategy `{self.strategy}` is not available for algorithm {self.algorithm}")
        return errors


@dataclass(frozen=True)
class DirectionForecast:
    """ Predicted time to catch the target for each heading, in `Direction` order """
    forecast: Forecast
    dist: Interval
    horizon: int
    probes: Tuple[Segment, ...]

    @property
    def dist_mid(self) -> float:
        return self.dist.midpoint

    @property
    def intervals(self) -> Dict[Direction, Interval]:
        return {direction: self.forecast.intervals[direction] for direction in Direction}


def propagate_region(r: BeliefRegion, params: MotionParams, grid: Grid) -> BeliefRegion:
    """ Every segment the target can reach with one move from the region

    >>> sorted(propagate_region(BeliefRegion.singleton((0, 0)), MotionParams(4, 2), Grid(10, 10)).cells)
    [Segment(x=0, y=2), Segment(x=2, y=0)]
    """
    moved = (r.array[:, None, :] + params.vp * _VECTOR_ARRAY[None, :, :]).reshape(-1, 2)
    return BeliefRegion.from_array(_in_grid(moved, grid))


@lru_cache(maxsize=256)
def _displacements(steps: int, vp: int) -> np.ndarray:
    """ Displacements reachable with exactly `steps` moves of `vp` along one axis """
    offsets = np.arange(-steps, steps + 1)
    i, j = np.meshgrid(offsets, offsets, indexing="ij")
    length = np.abs(i) + np.abs(j)
    mask = (length <= steps) & ((steps - length) % 2 == 0)
    out = np.stack([i[mask], j[mask]], axis=1) * vp
    out.setflags(write=False)
    return out


def _in_grid(points: np.ndarray, grid: Grid) -> np.ndarray:
    keep = (points[:, 0] >= 0) & (points[:, 0] < grid.width) & (points[:, 1] >= 0) & (points[:, 1] < grid.height)
    return points[keep]


def reachable_region(r: BeliefRegion, steps: int, params: MotionParams, grid: Grid) -> BeliefRegion:
    """ Same result as `steps` successive calls to `propagate_region`. Relies on the grid being larger than
    `2 * vp` on both axes, so that a target can always move back and forth.
    """
    if steps <= 0:
        return r
    moved = (r.array[:, None, :] + _displacements(steps, params.vp)[None, :, :]).reshape(-1, 2)
    return BeliefRegion.from_array(np.unique(_in_grid(moved, grid), axis=0))


def reachable_cell_count(steps: int) -> int:
    """ Size of the set of segments reachable in exactly `steps` moves on an unbounded grid

    >>> reachable_cell_count(5)
    36
    """
    return len(_displacements(steps, 1))


def per_step_search_cost(steps: int) -> int:
    """ Activations needed when the target is located at each of `steps` steps (4 candidates per step)

    >>> per_step_search_cost(5)
    20
    """
    return 4 * steps


def one_shot_search_cost(steps: int) -> float:
    """ Closed form quoted for locating the target once after `steps` steps. It overestimates
    `reachable_cell_count`, which only counts segments of the right parity.

    >>> one_shot_search_cost(5)
    60.0
    """
    return 0.5 * ((2 * steps + 1) ** 2 - 1)


def shrink_region(r: BeliefRegion, detected: Set[Segment], probed: Iterable[Segment]) -> BeliefRegion:
    """ Applies the outcome of a collection: a detection anchors the region, an absence removes the probed segments

    >>> a, b, c = Segment(0, 0), Segment(0, 1), Segment(0, 2)
    >>> sorted(shrink_region(BeliefRegion(frozenset({a, b, c})), set(), {b}).cells)
    [Segment(x=0, y=0), Segment(x=0, y=2)]
    """
    if detected:
        return BeliefRegion.singleton(next(iter(detected)))
    remaining = r.cells.difference(Segment(*cell) for cell in probed)
    if not remaining:
        message(_sbmsg(f"Collection over {r.area} segments found no target, the belief region is kept"))
        return r
    if len(remaining) == len(r.cells):
        return r
    return BeliefRegion(frozenset(remaining))


def horizon(dist_mid: Union[float, np.ndarray], gamma: float) -> Union[int, np.ndarray]:
    """ Number of steps ahead at which the sink positions are evaluated, at least 1

    >>> horizon(188, 1.3)
    17
    >>> horizon(0, 1.3)
    1
    """
    steps = np.maximum(1, np.floor(gamma * np.sqrt(dist_mid))).astype(np.int64)
    return int(steps) if np.ndim(steps) == 0 else steps


def _probes(sink: Segment, steps: int, params: MotionParams, grid: Grid) -> np.ndarray:
    """ (4, 2) sink positions after `steps` steps in each direction, clamped to the grid """
    probes = np.asarray(sink, dtype=np.int64)[None, :] + steps * params.v * _VECTOR_ARRAY
    probes[:, 0] = np.clip(probes[:, 0], 0, grid.width - 1)
    probes[:, 1] = np.clip(probes[:, 1], 0, grid.height - 1)
    return probes


def _distance_ranges(
        cells: np.ndarray, steps: int, probes: np.ndarray, params: MotionParams, grid: Grid
) -> Tuple[np.ndarray, np.ndarray]:
    """ For each cell, min and max hop distance (n, 4) between each probe and the segments reachable from the
    cell in `steps` steps
    """
    offsets = _displacements(steps, params.vp)
    n = len(cells)
    low = np.empty((n, len(probes)), dtype=np.int64)
    high = np.empty((n, len(probes)), dtype=np.int64)
    for start in range(0, n, _CHUNK):
        block = cells[start:start + _CHUNK]
        points = block[:, None, :] + offsets[None, :, :]
        inside = (
            (points[..., 0] >= 0) & (points[..., 0] < grid.width) &
            (points[..., 1] >= 0) & (points[..., 1] < grid.height)
        )
        distances = np.abs(points[:, :, None, :] - probes[None, None, :, :]).sum(axis=-1)
        low[start:start + _CHUNK] = np.where(inside[..., None], distances, np.iinfo(np.int64).max).min(axis=1)
        high[start:start + _CHUNK] = np.where(inside[..., None], distances, -1).max(axis=1)
    return low, high


def forecast_directions(
        sink: Segment, r: BeliefRegion, cfg: TrackerConfig, params: MotionParams, grid: Grid
) -> DirectionForecast:
    """ Time-to-catch interval for each heading. The sink is projected `h * v` segments ahead, `h` depending on the
    middle of the sink-to-region distance range. The interval bounds the time needed from there to close the
    distance to the region propagated `h` steps ahead, plus the `h` steps of the projection.
    """
    cells = r.array
    distances = np.abs(cells - np.asarray(sink, dtype=np.int64)).sum(axis=1)
    dist = Interval(int(distances.min()), int(distances.max()))
    steps = horizon(dist.midpoint, cfg.gamma)
    probes = _probes(sink, steps, params, grid)
    reach = reachable_region(r, steps, params, grid).array
    reach_distances = np.abs(reach[:, None, :] - probes[None, :, :]).sum(axis=-1)
    closing = params.v - params.vp
    forecast = Forecast(tuple(
        Interval(steps + reach_distances[:, idx].min() / closing, steps + reach_distances[:, idx].max() / closing)
        for idx in range(len(Direction))
    ))
    return DirectionForecast(forecast, dist, steps, tuple(Segment(int(x), int(y)) for x, y in probes))


def hypotheses_for_region(
        sink: Segment, r: BeliefRegion, cfg: TrackerConfig, params: MotionParams, grid: Grid
) -> List[Hypothesis]:
    """ One hypothesis per segment of the region: the target is found there, and the sink decides on the forecast
    of that singleton region. Hypotheses follow the sorted order of the segments.
    """
    cells = r.array
    n = len(cells)
    distances = np.abs(cells - np.asarray(sink, dtype=np.int64)).sum(axis=1)
    # A singleton region has a degenerate distance range
    steps = horizon(distances.astype(float), cfg.gamma)
    closing = params.v - params.vp
    lo = np.empty((n, len(Direction)))
    hi = np.empty((n, len(Direction)))
    for value in np.unique(steps):
        rows = np.flatnonzero(steps == value)
        probes = _probes(sink, int(value), params, grid)
        low, high = _distance_ranges(cells[rows], int(value), probes, params, grid)
        lo[rows] = value + low / closing
        hi[rows] = value + high / closing
    actions, uncertainties = decide(lo, hi)

    hyps = []
    for idx, cell in enumerate(r.sorted_cells):
        forecast = Forecast(tuple(Interval(float(lo[idx, a]), float(hi[idx, a])) for a in range(len(Direction))))
        hyps.append(Hypothesis(
            signature=DetectionSignature(r.cells, cell),
            forecast=forecast,
            decision=Decision(int(actions[idx]), float(uncertainties[idx]))
        ))
    return hyps


HypothesisSource = Union[Sequence[Hypothesis], Callable[[], Sequence[Hypothesis]]]


def collection_trigger(
        baseline: Decision, forecastctx: DirectionForecast, r: BeliefRegion, hyps: HypothesisSource,
        cfg: TrackerConfig
) -> bool:
    """ Collect when the sink is close to a large region, or when new data is expected to lower the decision
    uncertainty by more than `alpha`. `hyps` may be a callable, evaluated only when the distance rule does not fire.
    """
    if forecastctx.dist_mid / math.sqrt(r.area) < cfg.beta:
        return True
    if callable(hyps):
        hyps = hyps()
    return expected_unc_decrease(baseline, hyps) > cfg.alpha


@dataclass
class TrackerState:
    """ Everything a controller knows and updates during a run. `target` is the true target segment, maintained
    by the runner. `target_node` is the last segment where the network located the target.
    """
    grid: Grid
    params: MotionParams
    cfg: TrackerConfig
    acct: MessageAccounting
    sink: Segment
    target: Segment
    target_node: Segment
    beacon: Segment
    region: BeliefRegion
    step: int = 0
    caught: bool = False
    decision: Optional[Decision] = None
    collections: int = 0
    activations: List[int] = field(default_factory=list)

    @classmethod
    def start(
            cls, grid: Grid, params: MotionParams, cfg: TrackerConfig, acct: MessageAccounting,
            sink: Segment, target: Segment
    ) -> "TrackerState":
        """ The initial target segment is known to the sink and to the beacon """
        sink, target = Segment(*sink), Segment(*target)
        return cls(
            grid=grid, params=params, cfg=cfg, acct=acct, sink=sink, target=target, target_node=target,
            beacon=target, region=BeliefRegion.singleton(target)
        )


def _on_path(start: Segment, end: Segment, point: Segment) -> bool:
    """ Whether `point` lies on the axis-aligned segment between `start` and `end`, both included """
    if start.x == end.x == point.x:
        return min(start.y, end.y) <= point.y <= max(start.y, end.y)
    if start.y == end.y == point.y:
        return min(start.x, end.x) <= point.x <= max(start.x, end.x)
    return False


def _move(state: TrackerState, direction: Direction, goal: Optional[Segment] = None) -> Segment:
    """ Destination of the sink. With a `goal`, a move towards it stops on its coordinate. """
    dx, dy = direction.vector
    length = state.params.v
    if goal is not None:
        gap = (goal.x - state.sink.x) * dx + (goal.y - state.sink.y) * dy
        if gap > 0:
            length = min(length, gap)
    return state.grid.clamp(state.sink.x + dx * length, state.sink.y + dy * length)


def pursuit_direction(state: TrackerState, goal: Segment) -> Direction:
    """ Direction whose move ends closest to `goal`, first in N, S, E, W order on ties """
    return min(Direction, key=lambda direction: state.grid.hop_distance(_move(state, direction, goal), goal))


def _advance(state: TrackerState, direction: Direction, goal: Optional[Segment] = None) -> None:
    start = state.sink
    state.sink = _move(state, direction, goal)
    state.caught = state.caught or _on_path(start, state.sink, state.target)


def _query(state: TrackerState, ledger: MetricsLedger, querier: Segment, targets: Set[Segment], local: bool):
    state.activations[-1] += len(targets)
    return state.grid.query_sensors(querier, targets, state.target, state.acct, ledger, local=local)


def _track_in_network(state: TrackerState, ledger: MetricsLedger) -> Segment:
    """ The previous target node activates the segments the target may have moved to """
    candidates = propagate_region(BeliefRegion.singleton(state.target_node), state.params, state.grid).cells
    detected = _query(state, ledger, state.target_node, set(candidates), local=True)
    if detected:
        state.target_node = next(iter(detected))
    return state.target_node


def _forecast_and_decide(state: TrackerState) -> Tuple[DirectionForecast, Decision]:
    forecast = forecast_directions(state.sink, state.region, state.cfg, state.params, state.grid)
    return forecast, select_action(forecast.forecast)


def _begin(state: TrackerState) -> None:
    state.step += 1
    state.activations.append(0)


def step_algorithm_1(state: TrackerState, ledger: MetricsLedger) -> TrackerState:
    """ Per-step location report to the sink, which heads to the reported segment """
    _begin(state)
    node = _track_in_network(state, ledger)
    state.grid.report_to_sink(node, state.sink, ledger)
    state.region = BeliefRegion.singleton(node)
    _advance(state, pursuit_direction(state, node), goal=node)
    return state


def _rendezvous(state: TrackerState, ledger: MetricsLedger) -> bool:
    if state.sink != state.beacon:
        return False
    ledger.deliver(0, kind="rendezvous")
    state.beacon = state.target_node
    state.region = BeliefRegion.singleton(state.target_node)
    return True


def step_algorithm_2(state: TrackerState, ledger: MetricsLedger) -> TrackerState:
    """ The target reports to a beacon node. The sink heads to the beacon, and learns the target location there. """
    _begin(state)
    node = _track_in_network(state, ledger)
    state.grid.report_to_beacon(node, state.beacon, ledger)
    if not _rendezvous(state, ledger):
        state.region = propagate_region(state.region, state.params, state.grid)
    _advance(state, pursuit_direction(state, state.beacon), goal=state.beacon)
    _rendezvous(state, ledger)
    return state


def _collect(state: TrackerState, ledger: MetricsLedger, minimum: bool) -> TrackerState:
    """ Forecast-driven step with data collection from the sink (algorithms 3 and 4) """
    _begin(state)
    state.region = propagate_region(state.region, state.params, state.grid)
    forecast, decision = _forecast_and_decide(state)
    built: List[List[Hypothesis]] = []

    def hypotheses() -> List[Hypothesis]:
        if not built:
            built.append(hypotheses_for_region(state.sink, state.region, state.cfg, state.params, state.grid))
        return built[0]

    if collection_trigger(decision, forecast, state.region, hypotheses, state.cfg):
        state.collections += 1
        if minimum:
            probed = select_sensors_minimum(hypotheses())
        else:
            probed = set(state.region.cells)
        detected = _query(state, ledger, state.sink, probed, local=False)
        if detected:
            ledger.deliver(0, kind="detection")
        state.region = shrink_region(state.region, detected, probed)
        forecast, decision = _forecast_and_decide(state)
    state.decision = decision
    _advance(state, Direction(decision.action))
    return state


def step_algorithm_3(state: TrackerState, ledger: MetricsLedger) -> TrackerState:
    return _collect(state, ledger, minimum=False)


def step_algorithm_4(state: TrackerState, ledger: MetricsLedger) -> TrackerState:
    return _collect(state, ledger, minimum=True)


def step_algorithm_5(state: TrackerState, ledger: MetricsLedger) -> TrackerState:
    """ The target reports to a beacon node every step, the sink asks the beacon when the trigger fires """
    _begin(state)
    node = _track_in_network(state, ledger)
    state.grid.report_to_beacon(node, state.beacon, ledger)
    state.region = propagate_region(state.region, state.params, state.grid)
    forecast, decision = _forecast_and_decide(state)

    def hypotheses() -> List[Hypothesis]:
        return hypotheses_for_region(state.sink, state.region, state.cfg, state.params, state.grid)

    if collection_trigger(decision, forecast, state.region, hypotheses, state.cfg):
        state.collections += 1
        state.grid.request_from_beacon(state.sink, state.beacon, ledger)
        state.region = BeliefRegion.singleton(node)
        state.beacon = node
        forecast, decision = _forecast_and_decide(state)
    state.decision = decision
    _advance(state, Direction(decision.action))
    return state


STEPS: Dict[int, Callable[[TrackerState, MetricsLedger], TrackerState]] = {
    1: step_algorithm_1,
    2: step_algorithm_2,
    3: step_algorithm_3,
    4: step_algorithm_4,
    5: step_algorithm_5,
}


def step(state: TrackerState, ledger: MetricsLedger) -> TrackerState:
    """ Runs one step of the controller selected by `state.cfg.algorithm` """
    if state.caught:
        raise PreconditionError("The target is already caught")
    return STEPS[state.cfg.algorithm](state, ledger)
