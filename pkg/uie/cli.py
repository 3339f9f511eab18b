""" Command line front end

Every command resolves an `ExperimentSpec` from the defaults, an optional YAML file (`--config`) and the flags, in
increasing order of priority. The whole specification is validated before anything runs and is echoed in the outputs.

Exit codes: 0 success, 1 invalid configuration, 2 fixture mismatch or broken run invariant, 3 I/O error.
"""
# Std lib
import os
import functools
import dataclasses
from dataclasses import dataclass, field
from typing import Tuple, List, Dict, Optional, Any, Callable, Sequence
# Non std lib
import click
# Local
from uie import utils
from uie.utils import ConfigurationError, PreconditionError, ContractViolation, parse_pair, parse_grid, parse_floats
from uie.network import MessageAccounting
from uie.tracking import MotionParams, TrackerConfig, ALGORITHMS, STRATEGIES
from uie.simulation import (
    SimConfig, BatchStats, DEFAULT_GRID, DEFAULT_SINK, DEFAULT_TARGET, DEFAULT_RUNS, run_simulation, sweep, compare
)
from uie.predator_prey import build_example, verify, WorkedExample


EXIT_VALIDATION = 1
EXIT_MISMATCH = 2
EXIT_IO = 3
FORMATS = ("csv", "json")


def _to_int(value: Any) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValueError(value)
    return int(value)


def _to_flag(value: Any) -> bool:
    """
    >>> _to_flag("off"), _to_flag(True)
    (False, True)
    """
    if isinstance(value, bool):
        return value
    lowered = str(value).strip().lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ValueError(value)


def _to_pair(parser: Callable[[str], Tuple[int, int]]) -> Callable[[Any], Tuple[int, int]]:
    def convert(value: Any) -> Tuple[int, int]:
        if isinstance(value, str):
            return parser(value)
        first, second = value
        return _to_int(first), _to_int(second)
    return convert


def _to_ints(value: Any) -> List[int]:
    if isinstance(value, str):
        return [_to_int(part) for part in value.split(",") if part.strip()]
    if isinstance(value, (int, float)):
        return [_to_int(value)]
    return [_to_int(element) for element in value]


def _to_floats(value: Any) -> List[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    return parse_floats(value)


_CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "grid": _to_pair(parse_grid),
    "sink": _to_pair(parse_pair),
    "target": _to_pair(parse_pair),
    "v": _to_int,
    "vp": _to_int,
    "algorithm": _to_int,
    "alpha": float,
    "beta": float,
    "gamma": float,
    "strategy": str,
    "seed": _to_int,
    "max_steps": _to_int,
    "count_queries": _to_flag,
    "local_activation": _to_flag,
    "runs": _to_int,
    "workers": _to_int,
    "alphas": _to_floats,
    "betas": _to_floats,
    "gammas": _to_floats,
    "velocities": _to_ints,
    "algorithms": _to_ints,
    "out": str,
    "format": str,
    "trajectory": str,
    "cache": str,
    "quiet": _to_flag,
}


@dataclass
class ExperimentSpec:
    """ Declarative description of one command invocation """
    command: str = "run"
    grid: Tuple[int, int] = DEFAULT_GRID
    sink: Tuple[int, int] = DEFAULT_SINK
    target: Tuple[int, int] = DEFAULT_TARGET
    v: int = 4
    vp: int = 3
    algorithm: int = 5
    alpha: float = 0.15
    beta: float = 2.0
    gamma: float = 1.3
    strategy: Optional[str] = None
    seed: int = 0
    max_steps: Optional[int] = None
    count_queries: bool = True
    local_activation: bool = True
    runs: int = DEFAULT_RUNS
    workers: int = 1
    alphas: Optional[List[float]] = None
    betas: Optional[List[float]] = None
    gammas: Optional[List[float]] = None
    velocities: List[int] = field(default_factory=lambda: [1, 2, 3])
    algorithms: List[int] = field(default_factory=lambda: list(ALGORITHMS))
    out: Optional[str] = None
    format: str = "csv"
    trajectory: Optional[str] = None
    cache: Optional[str] = None
    quiet: bool = False

    @classmethod
    def build(cls, command: str, config: Optional[str] = None, **overrides) -> "ExperimentSpec":
        """ Defaults, then the YAML file, then the non-None `overrides`. Raises a `ConfigurationError` listing every
        problem found.

        >>> ExperimentSpec.build("run", alg=None, vp="2", sink="0,0").sink
        (0, 0)
        """
        values: Dict[str, Any] = {}
        if config:
            values.update(utils.load_yaml(config))
        values.update({key: value for key, value in overrides.items() if value is not None})
        # Flag name of the algorithm
        if "alg" in values:
            values["algorithm"] = values.pop("alg")

        errors = [f"unknown setting `{key}`" for key in sorted(set(values) - set(_CONVERTERS))]
        converted = {}
        for key, value in values.items():
            if key not in _CONVERTERS:
                continue
            try:
                converted[key] = _CONVERTERS[key](value)
            except (TypeError, ValueError):
                errors.append(f"{key}: invalid value {value!r}")
        if errors:
            raise ConfigurationError(errors)
        spec = cls(command=command, **converted)
        spec.validate()
        return spec

    def sim_config(self) -> SimConfig:
        return SimConfig(
            grid=tuple(self.grid),
            sink_start=tuple(self.sink),
            target_start=tuple(self.target),
            params=MotionParams(self.v, self.vp),
            tracker=TrackerConfig(self.algorithm, self.alpha, self.beta, self.gamma, self.strategy),
            seed=self.seed,
            max_steps=self.max_steps,
            accounting=MessageAccounting(self.count_queries, self.local_activation)
        )

    def violations(self) -> List[str]:
        errors = []
        if self.command != "compare":
            errors.extend(self.sim_config().violations())
        if self.runs < 1:
            errors.append(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            errors.append(f"workers must be >= 1, got {self.workers}")
        if self.format not in FORMATS:
            errors.append(f"format must be one of {FORMATS}, got {self.format}")
        if self.command == "sweep":
            for name in ("alphas", "betas", "gammas"):
                if getattr(self, name) is not None and not getattr(self, name):
                    errors.append(f"{name[:-1]} axis is empty")
        if self.command == "compare":
            if not self.velocities:
                errors.append("velocity list is empty")
            if not self.algorithms:
                errors.append("algorithm list is empty")
            for algorithm in self.algorithms:
                for vp in self.velocities:
                    base = dataclasses.replace(self, algorithm=algorithm, vp=vp, strategy=None, command="run")
                    errors.extend(base.sim_config().violations())
        for path in (self.out, self.trajectory, self.cache):
            if path and not _writable(path):
                errors.append(f"output path `{path}` is not writable")
        # Several (algorithm, vp) pairs may share a violation
        return list(dict.fromkeys(errors))

    def validate(self) -> None:
        errors = self.violations()
        if errors:
            raise ConfigurationError(errors)

    def axes(self) -> Tuple[List[float], List[float], List[float]]:
        return (
            self.alphas if self.alphas is not None else [self.alpha],
            self.betas if self.betas is not None else [self.beta],
            self.gammas if self.gammas is not None else [self.gamma]
        )

    def to_dict(self) -> Dict[str, Any]:
        document = dataclasses.asdict(self)
        for key in ("grid", "sink", "target"):
            document[key] = list(document[key])
        document["strategy"] = self.sim_config().tracker.strategy
        return document


def _writable(path: str) -> bool:
    """ Whether `path` can be created: its closest existing ancestor must be a writable directory """
    directory = os.path.dirname(os.path.abspath(path))
    while not os.path.exists(directory):
        directory = os.path.dirname(directory)
    return os.path.isdir(directory) and os.access(directory, os.W_OK)


def _exit_codes(func: Callable) -> Callable:
    """ Maps the library errors to the exit codes of the command line """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except (ConfigurationError, PreconditionError) as error:
            utils.message(str(error))
            ctx.exit(EXIT_VALIDATION)
        except ContractViolation as error:
            utils.message(f"Broken invariant: {error}")
            ctx.exit(EXIT_MISMATCH)
        except OSError as error:
            utils.message(f"I/O error on `{error.filename or ''}`: {error.strerror or error}")
            ctx.exit(EXIT_IO)
    return wrapper


def _simulation_options(func: Callable) -> Callable:
    options = [
        click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="YAML experiment file, overridden by the flags"),
        click.option("--alg", type=int, default=None, help="Tracking algorithm, 1 to 5"),
        click.option("--v", "v", type=int, default=None, help="Sink speed (segments per step)"),
        click.option("--vp", type=int, default=None, help="Target speed (segments per step)"),
        click.option("--alpha", type=float, default=None, help="Uncertainty decrease threshold"),
        click.option("--beta", type=float, default=None, help="Distance threshold"),
        click.option("--gamma", type=float, default=None, help="Prediction horizon parameter"),
        click.option("--strategy", type=click.Choice(STRATEGIES), default=None, help="Sensor selection strategy"),
        click.option("--seed", type=int, default=None, help="Seed of the first run"),
        click.option("--grid", type=str, default=None, help="Grid size as WxH"),
        click.option("--sink", type=str, default=None, help="Sink start as x,y"),
        click.option("--target", type=str, default=None, help="Target start as x,y"),
        click.option("--max-steps", "max_steps", type=int, default=None, help="Step limit of a run"),
        click.option("--count-queries", "count_queries", type=click.Choice(["on", "off"]), default=None,
                     help="Charge hops for sink queries and absence reports"),
        click.option("--local-activation", "local_activation", type=click.Choice(["on", "off"]), default=None,
                     help="Charge hops for in-network activations"),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (stdout by default)"),
        click.option("--format", "format", type=click.Choice(FORMATS), default=None, help="Output format"),
        click.option("--quiet", is_flag=True, default=None, help="No progress bar"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _batch_options(func: Callable) -> Callable:
    options = [
        click.option("--runs", type=int, default=None, help="Runs per cell"),
        click.option("--workers", type=int, default=None, help="Threads running simulations"),
        click.option("--cache", type=click.Path(file_okay=False), default=None,
                     help="Directory keeping each run, finished runs are not computed again"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _write_table(spec: ExperimentSpec, header: List[str], rows: List[List[Any]]) -> None:
    if spec.format == "json":
        utils.write_json(spec.out, {
            "experiment": spec.to_dict(),
            "rows": [dict(zip(header, row)) for row in rows]
        })
        return
    utils.write_csv(spec.out, header, rows)
    if spec.out:
        utils.write_json(utils.change_ext(spec.out, "json"), {"experiment": spec.to_dict(), "header": header})


@click.group()
def cli():
    """ Uncertainty-based information extraction: worked example and mobile sink tracking simulator """


def format_report(example: WorkedExample) -> List[str]:
    first, second = example.baseline_forecast.intervals
    lines = [
        f"Baseline forecast: F(1)={first} F(2)={second}",
        f"P[F(1) <= F(2)] = {example.probability:.4f}",
        f"UNC(1, S0) = {example.baseline.uncertainty:.4f} (action {example.baseline.action + 1})",
        "",
        "row readings         granule          F(1)    F(2)    a UNC",
    ]
    for idx, row in enumerate(example.rows, 1):
        forecast = row.hypothesis.forecast.intervals
        lines.append(
            f"{idx:>3} {','.join(str(value) for value in row.readings):<16} "
            f"{'x'.join(str(interval) for interval in row.granule):<16} "
            f"{str(forecast[0]):<7} {str(forecast[1]):<7} "
            f"{row.hypothesis.decision.action + 1} {row.hypothesis.decision.uncertainty:.2f}"
        )
    lines.extend([
        "",
        f"mean UNC = {example.mean_uncertainty:.4f}",
        f"dUNC = {example.expected_decrease:.4f} (alpha = {example.alpha}, collect: {'yes' if example.collect else 'no'})",
        f"exhaustive strategy: {sorted(example.exhaustive)}",
        f"minimum strategy: {sorted(example.minimum)}",
    ])
    return lines


@cli.command("example")
@click.option("--format", "format", type=click.Choice(["text", "json"]), default="text")
@_exit_codes
def cmd_example(format: str):
    """ Two-prey illustration, checked against its published values """
    example = build_example()
    if format == "json":
        utils.write_json(None, {
            "probability": example.probability,
            "baseline": dataclasses.asdict(example.baseline),
            "rows": [
                {
                    "readings": list(row.readings),
                    "granule": [[interval.lo, interval.hi] for interval in row.granule],
                    "forecast": [[interval.lo, interval.hi] for interval in row.hypothesis.forecast.intervals],
                    "action": row.hypothesis.decision.action + 1,
                    "uncertainty": row.hypothesis.decision.uncertainty
                }
                for row in example.rows
            ],
            "mean_uncertainty": example.mean_uncertainty,
            "expected_decrease": example.expected_decrease,
            "exhaustive": sorted(example.exhaustive),
            "minimum": sorted(example.minimum)
        })
    else:
        for line in format_report(example):
            click.echo(line)
    mismatches = verify(example)
    if mismatches:
        utils.message("Mismatches with the expected values:")
        for mismatch in mismatches:
            utils.message(f" - {mismatch}")
        click.get_current_context().exit(EXIT_MISMATCH)


@cli.command("run")
@_simulation_options
@click.option("--trajectory", type=click.Path(dir_okay=False), default=None, help="Per-step trajectory CSV")
@_exit_codes
def cmd_run(config, **flags):
    """ Single seeded run """
    spec = ExperimentSpec.build("run", config, **flags)
    result = run_simulation(spec.sim_config())
    utils.write_json(spec.out, {"experiment": spec.to_dict(), "result": result.to_dict()})
    if spec.trajectory:
        utils.write_csv(
            spec.trajectory,
            ["step", "sink_x", "sink_y", "target_x", "target_y", "hop_count", "active_time", "deliveries_to_sink"],
            result.trajectory_rows()
        )
    if not spec.quiet:
        utils.message(utils._sbmsg(
            f"{'Caught' if result.caught else 'Not caught'} after {result.time_to_catch} steps, "
            f"{result.ledger.hop_count} hops"
        ))


@cli.command("compare")
@_simulation_options
@_batch_options
@click.option("--velocities", type=str, default=None, help="Target speeds, e.g. 1,2,3")
@click.option("--algorithms", type=str, default=None, help="Algorithms, e.g. 1,2,3,4,5")
@_exit_codes
def cmd_compare(config, **flags):
    """ Every algorithm at every target speed """
    spec = ExperimentSpec.build("compare", config, **flags)
    if not spec.quiet:
        utils.message(f"[Task] Comparing {len(spec.algorithms)} algorithms at vp={spec.velocities}")
    rows = compare(
        spec.sim_config(), spec.runs, algorithms=spec.algorithms, velocities=spec.velocities,
        workers=spec.workers, quiet=spec.quiet, output_dir=spec.cache
    )
    _write_table(
        spec,
        ["algorithm", "vp", "n"] + BatchStats.header(),
        [[algorithm, vp, stats.n] + stats.row() for algorithm, vp, stats in rows]
    )


@cli.command("sweep")
@_simulation_options
@_batch_options
@click.option("--alphas", type=str, default=None, help="Values of alpha, list (0.05,0.15) or range (0.05:0.3:0.05)")
@click.option("--betas", type=str, default=None, help="Values of beta")
@click.option("--gammas", type=str, default=None, help="Values of gamma")
@_exit_codes
def cmd_sweep(config, **flags):
    """ Batch statistics over a grid of (alpha, beta, gamma) values """
    spec = ExperimentSpec.build("sweep", config, **flags)
    alphas, betas, gammas = spec.axes()
    if not spec.quiet:
        utils.message(f"[Task] Sweeping {len(alphas) * len(betas) * len(gammas)} parameter cells")
    rows = sweep(
        spec.sim_config(), alphas, betas, gammas, spec.runs,
        workers=spec.workers, quiet=spec.quiet, output_dir=spec.cache
    )
    _write_table(
        spec,
        ["alpha", "beta", "gamma", "n"] + BatchStats.header(),
        [[alpha, beta, gamma, stats.n] + stats.row() for alpha, beta, gamma, stats in rows]
    )


def main(args: Optional[Sequence[str]] = None) -> int:
    """ Runs the command line and returns its exit code. Usage errors exit with the validation code. """
    try:
        code = cli.main(args=args, prog_name="uie", standalone_mode=False)
    except click.exceptions.Abort:
        return EXIT_VALIDATION
    except click.ClickException as error:
        error.show()
        return EXIT_VALIDATION
    return code if isinstance(code, int) else 0
