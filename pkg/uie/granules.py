""" Interval granules and the probabilistic comparison kernel

Objective values handled by the decision engine are crisp intervals. Two intervals are compared by assuming an
independent uniform distribution over each of them: `prob_leq(a, b)` is the probability that a draw from `a` does not
exceed a draw from `b`. The value is computed in closed form (area of the part of the rectangle `a x b` lying above
the diagonal), so results are deterministic.

>>> round(prob_leq((1, 10), (3, 14)), 4)
0.7525
>>> round(unc_leq((1, 4), (3, 8)), 2)
0.07
"""
# Std lib
import math
from dataclasses import dataclass
from typing import Union, Tuple
# Non std lib
import numpy as np
# Local
from uie.utils import PreconditionError


@dataclass(frozen=True)
class Interval:
    """ Closed real interval [lo, hi], degenerate intervals (lo == hi) included

    >>> Interval(1, 4).shifted(2)
    Interval(lo=3, hi=6)
    >>> Interval(3, 8).midpoint
    5.5
    """
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise PreconditionError(f"Interval bounds must be finite, got ({self.lo}, {self.hi})")
        if self.lo > self.hi:
            raise PreconditionError(f"Interval lower bound is above its upper bound: ({self.lo}, {self.hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def shifted(self, offset: float) -> "Interval":
        return Interval(self.lo + offset, self.hi + offset)

    def scaled(self, factor: float) -> "Interval":
        """ Multiplication by a positive constant """
        if factor <= 0:
            raise PreconditionError(f"Scale factor must be positive, got {factor}")
        return Interval(self.lo * factor, self.hi * factor)

    def __str__(self):
        return f"({self.lo:g},{self.hi:g})"


IntervalLike = Union[Interval, Tuple[float, float]]


def as_interval(value: IntervalLike) -> Interval:
    """ Accepts an `Interval` or a `(lo, hi)` pair, the latter being validated """
    if isinstance(value, Interval):
        if value.lo > value.hi:
            raise PreconditionError(f"Interval lower bound is above its upper bound: ({value.lo}, {value.hi})")
        return value
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise PreconditionError(f"Expected an interval or a (lo, hi) pair, got {value!r}")
    return Interval(float(lo), float(hi))


def _integrated_cdf(y: np.ndarray, lo: np.ndarray, hi: np.ndarray, width: np.ndarray) -> np.ndarray:
    """ Integral of the uniform CDF over [lo, hi] from -inf to y """
    return np.where(
        y <= lo,
        0.0,
        np.where(y >= hi, width / 2 + (y - hi), (y - lo) ** 2 / (2 * width))
    )


def prob_leq_array(a_lo, a_hi, b_lo, b_hi) -> np.ndarray:
    """ Vectorised P(X <= Y) for X ~ U[a_lo, a_hi] and Y ~ U[b_lo, b_hi], independent. Inputs are broadcast
    together and are expected to be valid bounds.

    Two point intervals compare as 1 / 0.5 / 0 (below / equal / above).

    >>> prob_leq_array([0, 3], [1, 8], [5, 3], [6, 8]).tolist()
    [1.0, 0.5]
    """
    a_lo, a_hi, b_lo, b_hi = np.broadcast_arrays(
        *(np.asarray(bound, dtype=float) for bound in (a_lo, a_hi, b_lo, b_hi))
    )
    width_a = a_hi - a_lo
    width_b = b_hi - b_lo
    with np.errstate(divide="ignore", invalid="ignore"):
        spread_b = (
            _integrated_cdf(b_hi, a_lo, a_hi, width_a) - _integrated_cdf(b_lo, a_lo, a_hi, width_a)
        ) / width_b
        point_b = np.clip((b_lo - a_lo) / width_a, 0.0, 1.0)
    points = np.where(a_lo < b_lo, 1.0, np.where(a_lo == b_lo, 0.5, 0.0))
    out = np.where(width_b > 0, spread_b, np.where(width_a > 0, point_b, points))
    return np.clip(out, 0.0, 1.0)


def prob_leq(a: IntervalLike, b: IntervalLike) -> float:
    """ Probability that a uniform draw over `a` does not exceed an independent uniform draw over `b`

    >>> prob_leq((0, 1), (5, 6))
    1.0
    >>> prob_leq((3, 8), (3, 8))
    0.5
    """
    a, b = as_interval(a), as_interval(b)
    return float(prob_leq_array(a.lo, a.hi, b.lo, b.hi))


def unc_leq(a: IntervalLike, b: IntervalLike) -> float:
    """ Uncertainty of the statement `a <= b`: twice the probability that it is false """
    return 2 * (1 - prob_leq(a, b))


def com_leq(a: IntervalLike, b: IntervalLike) -> float:
    """ Confidence of the statement `a <= b`: P(X <= Y) - P(X > Y)

    >>> com_leq((3, 8), (3, 8))
    0.0
    """
    return 1 - unc_leq(a, b)
