import glob
import shutil
import os.path
import itertools
from typing import List, Sequence, Set, Optional, Tuple
import numpy as np

from uie.granules import Interval
from uie.decision import Hypothesis, Forecast, distinguishes
from uie.network import Grid, Segment
from uie.tracking import BeliefRegion, MotionParams, TrackerConfig, Direction, propagate_region, horizon

_HERE = os.path.relpath(os.path.dirname(__file__))


def get_input(path_like: str) -> List[str]:
    """ Return a list of content matching `path_like`

    :param path_like: A UNIX wildcard path or normal path
    :return: List of matching files or directories

    >>> get_input("experiment.yaml")
    ['tests/assets/experiment.yaml']
    """
    return glob.glob(os.path.join(_HERE, "assets", path_like))


def get_output(path_like: str) -> str:
    """ Return the output path for a given string

    :param path_like: A UNIX wildcard path or normal path
    :return: List of matching files or directories

    >>> get_output("run.json")
    'test_output/run.json'
    """
    return os.path.relpath(os.path.join(_HERE, "..", "test_output", path_like))


def clear_output():
    shutil.rmtree(get_output(""))


def unit_draws(draws: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """ Two independent U(0, 1) samples, rescaled by `mc_prob_leq` onto any pair of intervals """
    return rng.random(draws), rng.random(draws)


def mc_prob_leq(a: Interval, b: Interval, unit: Tuple[np.ndarray, np.ndarray]) -> float:
    """ Monte-Carlo estimate of P(X <= Y) for independent uniform X over `a` and Y over `b` """
    u, w = unit
    x = a.lo + (a.hi - a.lo) * u
    y = b.lo + (b.hi - b.lo) * w
    return np.count_nonzero(x <= y) / len(u)


def brute_force_cover(hyps: Sequence[Hypothesis], sensors: Sequence, max_size: Optional[int] = None) -> Optional[Set]:
    """ Smallest sensor set telling apart every pair of hypotheses with different decisions """
    max_size = len(sensors) if max_size is None else max_size
    for size in range(max_size + 1):
        for subset in itertools.combinations(sensors, size):
            if distinguishes(hyps, set(subset)):
                return set(subset)
    return None


def reference_forecast(
        sink: Segment, region: BeliefRegion, cfg: TrackerConfig, params: MotionParams, grid: Grid
) -> Tuple[Forecast, int]:
    """ Direction forecast computed literally: the region is propagated one step at a time and every distance
    is measured with the grid metric
    """
    distances = [grid.hop_distance(sink, cell) for cell in region.cells]
    steps = horizon((min(distances) + max(distances)) / 2, cfg.gamma)
    propagated = region
    for _ in range(steps):
        propagated = propagate_region(propagated, params, grid)
    intervals = []
    for direction in Direction:
        dx, dy = direction.vector
        probe = grid.clamp(sink[0] + dx * steps * params.v, sink[1] + dy * steps * params.v)
        reach = [grid.hop_distance(probe, cell) for cell in propagated.cells]
        closing = params.v - params.vp
        intervals.append(Interval(steps + min(reach) / closing, steps + max(reach) / closing))
    return Forecast(tuple(intervals)), steps
