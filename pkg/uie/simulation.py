""" Seeded discrete-time runner: random target trajectories, tracker execution, batches, sweeps and comparisons """
# Std lib
import math
import itertools
import dataclasses
from dataclasses import dataclass, field
from typing import Tuple, List, Dict, Optional, Any, Sequence
# Non std lib
import numpy as np
# Local
from uie.network import Grid, Segment, MetricsLedger, MessageAccounting
from uie.tracking import MotionParams, TrackerConfig, TrackerState, Direction, ALGORITHMS, step
from uie.task import SimulationBatchTask
from uie.utils import ConfigurationError, ContractViolation


DEFAULT_GRID: Tuple[int, int] = (200, 200)
DEFAULT_SINK: Tuple[int, int] = (160, 160)
DEFAULT_TARGET: Tuple[int, int] = (66, 66)
DEFAULT_RUNS: int = 100
METRICS: Tuple[str, ...] = ("time_to_catch", "hop_count", "active_time", "deliveries_to_sink")
# Steps allowed per segment of initial distance and per unit of closing speed
MAX_STEPS_FACTOR: int = 50


@dataclass(frozen=True)
class SimConfig:
    grid: Tuple[int, int] = DEFAULT_GRID
    sink_start: Tuple[int, int] = DEFAULT_SINK
    target_start: Tuple[int, int] = DEFAULT_TARGET
    params: MotionParams = field(default_factory=MotionParams)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    seed: int = 0
    max_steps: Optional[int] = None
    accounting: MessageAccounting = field(default_factory=MessageAccounting)

    def violations(self) -> List[str]:
        errors = []
        grid = None
        try:
            grid = Grid(*self.grid)
        except ValueError as error:
            errors.append(str(error))
        if grid is not None:
            for name in ("sink_start", "target_start"):
                if not grid.contains(getattr(self, name)):
                    errors.append(f"{name} {tuple(getattr(self, name))} is outside of the grid")
        if tuple(self.sink_start) == tuple(self.target_start):
            errors.append("sink and target must start on different segments")
        errors.extend(self.params.violations(grid))
        errors.extend(self.tracker.violations())
        if self.max_steps is not None and self.max_steps <= 0:
            errors.append(f"max_steps must be > 0, got {self.max_steps}")
        if not 0 <= self.seed < 2 ** 64:
            errors.append(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        return errors

    def validate(self) -> None:
        errors = self.violations()
        if errors:
            raise ConfigurationError(errors)

    @property
    def initial_distance(self) -> int:
        return abs(self.sink_start[0] - self.target_start[0]) + abs(self.sink_start[1] - self.target_start[1])

    def resolved_max_steps(self) -> int:
        """ Explicit `max_steps`, or 50 times the initial distance divided by the closing speed

        >>> SimConfig(params=MotionParams(4, 3)).resolved_max_steps()
        9400
        """
        if self.max_steps is not None:
            return self.max_steps
        return int(math.ceil(MAX_STEPS_FACTOR * self.initial_distance / (self.params.v - self.params.vp)))

    def with_seed(self, seed: int) -> "SimConfig":
        return dataclasses.replace(self, seed=seed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": list(self.grid),
            "sink_start": list(self.sink_start),
            "target_start": list(self.target_start),
            "v": self.params.v,
            "vp": self.params.vp,
            "algorithm": self.tracker.algorithm,
            "alpha": self.tracker.alpha,
            "beta": self.tracker.beta,
            "gamma": self.tracker.gamma,
            "strategy": self.tracker.strategy,
            "seed": self.seed,
            "max_steps": self.resolved_max_steps(),
            "count_queries": self.accounting.count_queries,
            "local_activation": self.accounting.local_activation
        }


@dataclass
class RunResult:
    seed: int
    caught: bool
    time_to_catch: int
    ledger: MetricsLedger
    sink_trajectory: List[Segment]
    target_trajectory: List[Segment]
    # Cumulative (hops, active time, deliveries) after each step
    history: List[Tuple[int, int, int]] = field(default_factory=list)
    activations: List[int] = field(default_factory=list)
    collections: int = 0

    @property
    def steps(self) -> int:
        return len(self.sink_trajectory) - 1

    def metric(self, name: str) -> float:
        if name == "time_to_catch":
            return self.time_to_catch
        return getattr(self.ledger, name)

    def trajectory_rows(self) -> List[List[int]]:
        """ One row per step: step, sink x/y, target x/y, cumulative hops, active time and deliveries """
        history = [(0, 0, 0)] + list(self.history)
        return [
            [idx, sink.x, sink.y, target.x, target.y, *history[idx]]
            for idx, (sink, target) in enumerate(zip(self.sink_trajectory, self.target_trajectory))
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "caught": self.caught,
            "time_to_catch": self.time_to_catch,
            "ledger": self.ledger.snapshot(),
            "sink_trajectory": [list(segment) for segment in self.sink_trajectory],
            "target_trajectory": [list(segment) for segment in self.target_trajectory],
            "history": [list(entry) for entry in self.history],
            "activations": list(self.activations),
            "collections": self.collections
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "RunResult":
        return cls(
            seed=document["seed"],
            caught=document["caught"],
            time_to_catch=document["time_to_catch"],
            ledger=MetricsLedger(**document["ledger"]),
            sink_trajectory=[Segment(*segment) for segment in document["sink_trajectory"]],
            target_trajectory=[Segment(*segment) for segment in document["target_trajectory"]],
            history=[tuple(entry) for entry in document["history"]],
            activations=list(document["activations"]),
            collections=document["collections"]
        )


@dataclass
class BatchStats:
    """ Mean and population standard deviation of each metric. Time-to-catch only counts caught runs. """
    n: int
    caught: int
    mean: Dict[str, float]
    sd: Dict[str, float]

    @property
    def not_caught(self) -> int:
        return self.n - self.caught

    @classmethod
    def from_results(cls, results: Sequence[RunResult]) -> "BatchStats":
        if not len(results):
            raise ValueError("Statistics require at least one run")
        mean, sd = {}, {}
        for metric in METRICS:
            values = np.array([
                result.metric(metric) for result in results
                if metric != "time_to_catch" or result.caught
            ], dtype=float)
            mean[metric] = float(values.mean()) if len(values) else float("nan")
            sd[metric] = float(values.std()) if len(values) else float("nan")
        return cls(n=len(results), caught=sum(result.caught for result in results), mean=mean, sd=sd)

    def columns(self) -> List[float]:
        """ Mean and sd of each metric, in `METRICS` order """
        return [value for metric in METRICS for value in (self.mean[metric], self.sd[metric])]

    @staticmethod
    def header() -> List[str]:
        return [f"{metric}_{stat}" for metric in METRICS for stat in ("mean", "sd")] + ["caught", "not_caught"]

    def row(self) -> List[Any]:
        return self.columns() + [self.caught, self.not_caught]

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "caught": self.caught, "not_caught": self.not_caught, "mean": self.mean, "sd": self.sd}


def _move_target(target: Segment, rng: np.random.Generator, params: MotionParams, grid: Grid) -> Segment:
    """ Moves the target by `vp` in a direction drawn uniformly among those staying in the grid """
    feasible = []
    for direction in Direction:
        dx, dy = direction.vector
        candidate = Segment(target.x + dx * params.vp, target.y + dy * params.vp)
        if grid.contains(candidate):
            feasible.append(candidate)
    return feasible[int(rng.integers(len(feasible)))]


def run_simulation(cfg: SimConfig) -> RunResult:
    """ Runs a controller until it catches the target or `max_steps` is reached. The output is fully determined by
    the configuration and its seed.

    :raises ConfigurationError: listing every violation of the configuration
    :raises ContractViolation: when the target leaves the belief region of the sink
    """
    cfg.validate()
    grid = Grid(*cfg.grid)
    rng = np.random.default_rng(cfg.seed)
    state = TrackerState.start(grid, cfg.params, cfg.tracker, cfg.accounting, cfg.sink_start, cfg.target_start)
    ledger = MetricsLedger()
    sinks, targets, history = [state.sink], [state.target], []
    max_steps = cfg.resolved_max_steps()

    while not state.caught and state.step < max_steps:
        state.target = _move_target(state.target, rng, cfg.params, grid)
        step(state, ledger)
        if state.target not in state.region:
            raise ContractViolation(
                f"Step {state.step}: target {tuple(state.target)} is outside of the belief region "
                f"({state.region.area} segments, algorithm {cfg.tracker.algorithm})"
            )
        sinks.append(state.sink)
        targets.append(state.target)
        history.append((ledger.hop_count, ledger.active_time, ledger.deliveries_to_sink))

    return RunResult(
        seed=cfg.seed,
        caught=state.caught,
        time_to_catch=state.step,
        ledger=ledger,
        sink_trajectory=sinks,
        target_trajectory=targets,
        history=history,
        activations=state.activations,
        collections=state.collections
    )


def run_seeds(
        cfg: SimConfig, n: int, base_seed: Optional[int] = None, workers: int = 1,
        output_dir: Optional[str] = None, quiet: bool = True
) -> List[RunResult]:
    """ Runs `n` simulations, run `i` using seed `base_seed + i` (`base_seed` defaults to `cfg.seed`) """
    if n < 1:
        raise ConfigurationError([f"runs must be >= 1, got {n}"])
    cfg.validate()
    base_seed = cfg.seed if base_seed is None else base_seed
    task = SimulationBatchTask(
        [base_seed + idx for idx in range(n)],
        config=cfg,
        runner=run_simulation,
        loader=RunResult.from_dict,
        output_dir=output_dir,
        multiprocess=workers,
        quiet=quiet
    )
    task.process()
    return task.results


def run_batch(
        cfg: SimConfig, n: int, base_seed: Optional[int] = None, workers: int = 1,
        output_dir: Optional[str] = None, quiet: bool = True
) -> BatchStats:
    """ Statistics over `n` runs seeded `base_seed + i` """
    return BatchStats.from_results(run_seeds(cfg, n, base_seed, workers=workers, output_dir=output_dir, quiet=quiet))


def _with_tracker(cfg: SimConfig, **changes) -> SimConfig:
    return dataclasses.replace(cfg, tracker=dataclasses.replace(cfg.tracker, **changes))


def sweep(
        cfg: SimConfig, alphas: Sequence[float], betas: Sequence[float], gammas: Sequence[float], n: int,
        base_seed: Optional[int] = None, workers: int = 1, quiet: bool = True, output_dir: Optional[str] = None
) -> List[Tuple[float, float, float, BatchStats]]:
    """ Batch statistics for every (alpha, beta, gamma) combination, alpha varying slowest """
    empty = [name for name, axis in (("alpha", alphas), ("beta", betas), ("gamma", gammas)) if not len(axis)]
    if empty:
        raise ConfigurationError([f"{name} axis is empty" for name in empty])
    cells = list(itertools.product(alphas, betas, gammas))
    configs = [_with_tracker(cfg, alpha=alpha, beta=beta, gamma=gamma) for alpha, beta, gamma in cells]
    errors = [error for config in configs for error in config.violations()]
    if errors:
        raise ConfigurationError(sorted(set(errors)))
    return [
        (alpha, beta, gamma, run_batch(config, n, base_seed, workers=workers, output_dir=output_dir, quiet=quiet))
        for (alpha, beta, gamma), config in zip(cells, configs)
    ]


def compare(
        cfg: SimConfig, n: int, algorithms: Sequence[int] = ALGORITHMS, velocities: Sequence[int] = (1, 2, 3),
        base_seed: Optional[int] = None, workers: int = 1, quiet: bool = True, output_dir: Optional[str] = None
) -> List[Tuple[int, int, BatchStats]]:
    """ Batch statistics for every (algorithm, vp) pair. Algorithm 4 uses the minimum strategy, the others the
    exhaustive one.
    """
    configs = [
        (
            algorithm,
            vp,
            dataclasses.replace(
                cfg,
                params=dataclasses.replace(cfg.params, vp=vp),
                tracker=dataclasses.replace(cfg.tracker, algorithm=algorithm, strategy=None)
            )
        )
        for algorithm in algorithms
        for vp in velocities
    ]
    errors = [error for _, _, config in configs for error in config.violations()]
    if errors:
        raise ConfigurationError(sorted(set(errors)))
    return [
        (algorithm, vp, run_batch(config, n, base_seed, workers=workers, output_dir=output_dir, quiet=quiet))
        for algorithm, vp, config in configs
    ]
