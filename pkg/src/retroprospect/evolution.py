"""Sampled evolutions and their one-sided difference quotients.

An :class:`Evolution` is a trajectory ``t -> x(t)`` observed on a strictly
increasing time grid. At a sample index ``i`` the retrospective (backward)
velocity is the quotient over the step that ends at ``i`` and the
prospective (forward) velocity is the quotient over the step that starts
at ``i``. Each quotient uses its own local step, so nonuniform grids are
fine. No extrapolation to a vanishing step is attempted.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Evolution",
    "VelocityPair",
    "backward_quotient",
    "forward_quotient",
    "velocity_pair",
    "peano_quotient",
    "second_order_quotient",
]

_UNIFORM_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Evolution:
    """A time-gridded sampled trajectory in ``dimension``-dimensional space.

    Args:
        times: strictly increasing timestamps, shape ``(n,)``.
        values: samples, shape ``(n,)`` for scalar series or ``(n, dim)``.

    The arrays are copied, converted to float64 and made read-only.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if times.ndim != 1:
            raise ValidationError("times must be one-dimensional")
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValidationError("values must be a sequence of vectors")
        if len(times) != len(values):
            raise ValidationError(
                f"times and values differ in length ({len(times)} != {len(values)})")
        if len(times) < 2:
            raise ValidationError("an evolution needs at least two samples")
        if values.shape[1] < 1:
            raise ValidationError("dimension must be positive")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValidationError("times and values must be finite")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("times must be strictly increasing")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, values, step=1.0, start=0.0):
        """Build an evolution on the grid ``start + k*step``."""
        values = np.asarray(values, dtype=np.float64)
        times = start + step * np.arange(len(values), dtype=np.float64)
        return cls(times, values)

    @classmethod
    def from_function(cls, func, start, stop, step):
        """Sample ``func`` on ``np.arange(start, stop, step)``."""
        times = np.arange(start, stop, step, dtype=np.float64)
        return cls(times, np.asarray(func(times), dtype=np.float64))

    def __len__(self):
        return len(self.times)

    @property
    def dimension(self):
        return self.values.shape[1]

    @property
    def steps(self):
        return np.diff(self.times)

    def is_uniform(self):
        steps = self.steps
        return bool(np.all(np.abs(steps - steps[0]) <= _UNIFORM_RTOL * steps[0]))

    def scalar(self):
        """Return the values of a scalar evolution as a flat array."""
        if self.dimension != 1:
            raise ValidationError(
                f"expected a scalar evolution, got dimension {self.dimension}")
        return self.values[:, 0]

    def reversed(self):
        """Time-reversed evolution: times negated and reversed, values reversed."""
        return Evolution(-self.times[::-1], self.values[::-1])

    def interior_indices(self):
        return range(1, len(self) - 1)


@dataclass(frozen=True, eq=False)
class VelocityPair:
    """Backward and forward one-step velocities at an interior index."""

    backward: np.ndarray
    forward: np.ndarray
    index: int


def _check_index(e, i, lo, hi, what):
    if not isinstance(i, (int, np.integer)) or not lo <= i <= hi:
        raise IndexError(f"{what}: index {i} outside [{lo}, {hi}] for n={len(e)}")


def backward_quotient(e, i):
    """Retrospective quotient ``(x[i] - x[i-1]) / (t[i] - t[i-1])``."""
    _check_index(e, i, 1, len(e) - 1, "backward quotient")
    return (e.values[i] - e.values[i - 1]) / (e.times[i] - e.times[i - 1])


def forward_quotient(e, i):
    """Prospective quotient ``(x[i+1] - x[i]) / (t[i+1] - t[i])``."""
    _check_index(e, i, 0, len(e) - 2, "forward quotient")
    return (e.values[i + 1] - e.values[i]) / (e.times[i + 1] - e.times[i])


def velocity_pair(e, i):
    _check_index(e, i, 1, len(e) - 2, "velocity pair")
    return VelocityPair(backward_quotient(e, i), forward_quotient(e, i), int(i))


def peano_quotient(e, i):
    """Average of the backward and forward quotients at an interior index.

    On a uniform grid this is the centered quotient
    ``(x[i+1] - x[i-1]) / (2h)``.
    """
    _check_index(e, i, 1, len(e) - 2, "peano quotient")
    return 0.5 * (backward_quotient(e, i) + forward_quotient(e, i))


def second_order_quotient(f, point, backward_dir=1.0, forward_dir=1.0, h=None):
    """Second-order quotient ``(F(x + h*uf) + F(x - h*ub) - 2 F(x)) / h**2``.

    Args:
        f: a callable map or an :class:`Evolution`. For an evolution,
            ``point`` is an interior sample index, both directions are +1,
            the grid must be uniform and ``h`` defaults to the grid step.
        point: evaluation point (or sample index for an evolution).
        backward_dir: direction ``ub`` of the retrospective probe.
        forward_dir: direction ``uf`` of the prospective probe.
        h: positive step.

    Returns:
        np.ndarray: the quotient, one entry per output component.
    """
    if isinstance(f, Evolution):
        if not f.is_uniform():
            raise ValidationError("second-order quotient of an evolution needs a uniform grid")
        step = float(f.steps[0])
        if h is not None and abs(h - step) > _UNIFORM_RTOL * step:
            raise ValidationError(f"h={h} does not match the grid step {step}")
        if h is not None and h <= 0:
            raise ValidationError("h must be positive")
        _check_index(f, point, 1, len(f) - 2, "second-order quotient")
        v = f.values
        return (v[point + 1] + v[point - 1] - 2.0 * v[point]) / step**2

    if h is None or not h > 0:
        raise ValidationError("h must be positive")
    x = np.asarray(point, dtype=np.float64)
    ub = np.asarray(backward_dir, dtype=np.float64)
    uf = np.asarray(forward_dir, dtype=np.float64)
    y = np.asarray(f(x), dtype=np.float64)
    ahead = np.asarray(f(x + h * uf), dtype=np.float64)
    behind = np.asarray(f(x - h * ub), dtype=np.float64)
    return np.atleast_1d((ahead + behind - 2.0 * y) / h**2)
