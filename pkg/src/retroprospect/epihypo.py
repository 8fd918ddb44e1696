"""Directional epi/hypo derivatives of numerical functions.

For ``V: R^l -> R`` the prospective epiderivative in direction ``u`` is the
lower limit of ``(V(x + h u) - V(x)) / h`` as ``h -> 0+`` and the
hypoderivative is the upper limit. The retrospective versions use
``(V(x) - V(x - h u)) / h``. Limits are not computable from finitely many
evaluations, so they are estimated by the min and max of the quotients on
a geometric step schedule ``h0 * ratio**k``. The estimate is exact for
functions with genuine one-sided directional derivatives that are linear
along the probed rays (``|x|``, piecewise-linear maps).
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Schedule",
    "DirectionalDerivatives",
    "FermatVerdict",
    "estimate_directional",
    "is_reversal_direction_pair",
    "fermat_check",
    "canonical_directions",
    "FUNCTIONS",
]


@dataclass(frozen=True)
class Schedule:
    """Geometric step schedule ``h0 * ratio**k`` for ``k = 0..count-1``."""

    h0: float = 1e-3
    ratio: float = 0.5
    count: int = 12

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValidationError("h0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValidationError("ratio must lie in (0, 1)")
        if self.count < 3:
            raise ValidationError("count must be at least 3")

    def steps(self):
        return self.h0 * self.ratio ** np.arange(self.count, dtype=np.float64)


@dataclass(frozen=True)
class DirectionalDerivatives:
    epi_forward: float
    hypo_forward: float
    epi_backward: float
    hypo_backward: float


class FermatVerdict(enum.Enum):
    CONSISTENT_WITH_MIN = "ConsistentWithMin"
    CONSISTENT_WITH_MAX = "ConsistentWithMax"
    NEITHER = "Neither"

    def __str__(self):
        return self.value


def _evaluate(V, point):
    value = float(V(point))
    if not math.isfinite(value):
        raise ValidationError(f"non-finite function value at {point!r}")
    return value


def _quotients(V, x, y, direction, steps, sign):
    """Difference quotients along ``sign * direction`` (sign=+1 forward, -1 backward)."""
    out = np.empty(len(steps))
    for k, h in enumerate(steps):
        probe = _evaluate(V, x + sign * h * direction)
        out[k] = (probe - y) / h if sign > 0 else (y - probe) / h
    return out


def estimate_directional(V, x, backward_dir, forward_dir, schedule=None):
    """Estimate the four directional derivatives of ``V`` at ``x``.

    Args:
        V: callable taking a float64 array of shape ``(l,)`` (a 0-d array
            for scalar points) and returning a real number.
        x: evaluation point.
        backward_dir: direction of the retrospective quotients.
        forward_dir: direction of the prospective quotients.
        schedule: :class:`Schedule`; defaults to ``Schedule()``.

    Returns:
        DirectionalDerivatives
    """
    schedule = schedule or Schedule()
    x = np.asarray(x, dtype=np.float64)
    ub = np.asarray(backward_dir, dtype=np.float64)
    uf = np.asarray(forward_dir, dtype=np.float64)
    steps = schedule.steps()
    y = _evaluate(V, x)
    fwd = _quotients(V, x, y, uf, steps, +1)
    bwd = _quotients(V, x, y, ub, steps, -1)
    return DirectionalDerivatives(
        epi_forward=float(fwd.min()),
        hypo_forward=float(fwd.max()),
        epi_backward=float(bwd.min()),
        hypo_backward=float(bwd.max()),
    )


def is_reversal_direction_pair(d):
    """True when the backward and forward epiderivatives have opposite signs."""
    return bool(d.epi_backward * d.epi_forward < 0)


def canonical_directions(dim):
    """The ``2 * dim`` signed canonical basis vectors."""
    eye = np.eye(dim)
    return [s * eye[k] for k in range(dim) for s in (1.0, -1.0)]


def fermat_check(V, x, directions=None, schedule=None, tol=None):
    """Check the first-order necessary conditions for a local extremum.

    At a local minimum every forward epiderivative is nonnegative and every
    backward hypoderivative nonpositive; at a local maximum the forward
    hypoderivatives are nonpositive and the backward epiderivatives
    nonnegative. Passing the check does not prove an extremum. When both
    sets of conditions hold (a locally flat ``V``) the minimum verdict is
    returned.
    """
    x = np.asarray(x, dtype=np.float64)
    if directions is None:
        directions = canonical_directions(max(x.size, 1))
        if x.ndim == 0:
            directions = [np.float64(d[0]) for d in directions]
    if tol is None:
        tol = 1e-8 * (1.0 + abs(_evaluate(V, x)))
    derivs = [estimate_directional(V, x, u, u, schedule) for u in directions]
    if all(d.epi_forward >= -tol and d.hypo_backward <= tol for d in derivs):
        return FermatVerdict.CONSISTENT_WITH_MIN
    if all(d.hypo_forward <= tol and d.epi_backward >= -tol for d in derivs):
        return FermatVerdict.CONSISTENT_WITH_MAX
    return FermatVerdict.NEITHER


def _oscillating(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim:
        x = x[0]
    if x == 0 or abs(x) < 1e-300:
        # |x sin(1/x)| <= |x|, and 1/x would overflow
        return 0.0
    return float(x * math.sin(1.0 / x))


def _first(x):
    x = np.asarray(x, dtype=np.float64)
    return float(x if x.ndim == 0 else x[0])


# Built-in test functions for the command line; all accept scalars or vectors.
FUNCTIONS = {
    "abs": lambda x: float(np.linalg.norm(np.atleast_1d(x), 1)),
    "square": lambda x: float(np.sum(np.square(x))),
    "neg_square": lambda x: -float(np.sum(np.square(x))),
    "linear": lambda x: float(np.sum(x)),
    "cos23": lambda x: 1.0 - math.cos(2 * _first(x)) * math.cos(3 * _first(x)),
    "xsin": _oscillating,
}
