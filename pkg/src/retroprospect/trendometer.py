"""Trend-reversal detection, jerkiness ranking and bear/bull statistics.

A trend reversal of a scalar series happens at a sample where the backward
and forward velocities have opposite signs. The absolute value of their
product is the *jerkiness* of the reversal. A reversal with a negative
backward velocity ends a falling trend (a local minimum, "bear"); one with
a positive backward velocity ends a rising trend (a local maximum, "bull").

Flat runs are bridged: when one or more consecutive steps have zero
difference, the reversal is reported at the last sample of the flat run,
using the last nonzero velocity before it and the first nonzero velocity
after it.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .tensor import classify_array, pairwise_velocities

__all__ = [
    "Kind",
    "ReversalEvent",
    "ReversalReport",
    "FINANCIAL_EPSILON",
    "detect_reversals",
    "jerkiness_ranking",
    "bear_bull_proportions",
    "jerkiness_velocity",
    "trend_speeds",
    "analyze",
    "CrossReversals",
    "cross_reversal_scan",
]

# absorbs decimal rounding in CSV price inputs
FINANCIAL_EPSILON = 1e-9


class Kind(enum.Enum):
    BEAR = "Bear"
    BULL = "Bull"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ReversalEvent:
    index: int
    time: float
    value: float
    backward_v: float
    forward_v: float
    product: float
    jerkiness: float
    kind: Kind


@dataclass
class ReversalReport:
    events: list
    bear_share: float
    bull_share: float
    velocities: list = field(default_factory=list)
    speeds: list = field(default_factory=list)

    @property
    def total_jerkiness(self):
        return float(sum(e.jerkiness for e in self.events))


def _reversal_arrays(t, x, eps):
    """Vectorized core of :func:`detect_reversals`.

    Returns index, backward and forward velocity arrays of the events.
    """
    q = np.diff(x) / np.diff(t)
    nonzero = q != 0
    positions = np.arange(len(q))
    # index of the most recent nonzero quotient at or before each step
    last = np.maximum.accumulate(np.where(nonzero, positions, -1))
    # candidate samples i = 1..n-2: forward step i, backward steps up to i-1
    i = np.arange(1, len(x) - 1)
    prev = last[i - 1]
    ok = nonzero[i] & (prev >= 0)
    i, prev = i[ok], prev[ok]
    b = q[prev]
    f = q[i]
    hit = b * f < -eps
    return i[hit], b[hit], f[hit]


def detect_reversals(e, eps=0.0):
    """Detect the trend reversals of a scalar evolution.

    Args:
        e: scalar :class:`~retroprospect.evolution.Evolution` with at
            least three samples.
        eps: an event is reported only when the velocity product is below
            ``-eps``.

    Returns:
        list of :class:`ReversalEvent` in chronological order.
    """
    if e.dimension != 1:
        raise ValidationError("reversal detection needs a scalar series")
    if len(e) < 3:
        raise ValidationError("reversal detection needs at least three samples")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    x = e.scalar()
    idx, b, f = _reversal_arrays(e.times, x, eps)
    events = []
    for i, bv, fv in zip(idx.tolist(), b.tolist(), f.tolist()):
        p = bv * fv
        events.append(ReversalEvent(
            index=i,
            time=float(e.times[i]),
            value=float(x[i]),
            backward_v=bv,
            forward_v=fv,
            product=p,
            jerkiness=-p,
            kind=Kind.BEAR if bv < 0 else Kind.BULL,
        ))
    return events


def jerkiness_ranking(events):
    """Events by decreasing jerkiness; ties keep chronological order."""
    return sorted(events, key=lambda ev: (-ev.jerkiness, ev.time))


def bear_bull_proportions(events):
    """Jerkiness-weighted shares of bear and bull reversals.

    Returns ``(0.0, 0.0)`` for an empty event list.
    """
    total = sum(ev.jerkiness for ev in events)
    if not events or total == 0:
        return 0.0, 0.0
    bear = sum(ev.jerkiness for ev in events if ev.kind is Kind.BEAR)
    bear_share = bear / total
    return bear_share, 1.0 - bear_share


def jerkiness_velocity(events):
    """Jerkiness variation per unit time between consecutive reversals.

    Returns a list of ``((t_k, t_next), (J_next - J_k) / (t_next - t_k))``.
    """
    out = []
    for a, b in zip(events, events[1:]):
        out.append(((a.time, b.time), (b.jerkiness - a.jerkiness) / (b.time - a.time)))
    return out


def trend_speeds(events):
    """Mean slope of the series over each congruence period between reversals."""
    out = []
    for a, b in zip(events, events[1:]):
        out.append(((a.time, b.time), (b.value - a.value) / (b.time - a.time)))
    return out


def analyze(e, eps=0.0):
    """Run detection and all summary statistics on one scalar series."""
    events = detect_reversals(e, eps)
    bear, bull = bear_bull_proportions(events)
    return ReversalReport(
        events=events,
        bear_share=bear,
        bull_share=bull,
        velocities=jerkiness_velocity(events),
        speeds=trend_speeds(events),
    )


@dataclass(frozen=True, eq=False)
class CrossReversals:
    """Pairwise connection matrix of a family of series at one date."""

    index: int
    time: float
    matrix: np.ndarray
    classes: np.ndarray
    marked: np.ndarray  # boolean, True where M[a, b] < -eps


def cross_reversal_scan(series, eps=0.0):
    """Pairwise connection matrices of aligned scalar series at every interior date.

    Entry ``(a, b)`` is marked when the trend of series ``a`` is followed
    by the opposite trend of series ``b``.
    """
    backward, forward = pairwise_velocities(series)
    times = series[0].times
    out = []
    for k in range(len(backward)):
        m = np.multiply.outer(backward[k], forward[k])
        out.append(CrossReversals(
            index=k + 1,
            time=float(times[k + 1]),
            matrix=m,
            classes=classify_array(m, eps),
            marked=m < -eps,
        ))
    return out
