"""Retro-prospective differential inclusions.

The forward velocity of an evolution is constrained by time, state and the
backward velocity already observed::

    forward velocity of x at t  in  G(t, x(t), backward velocity of x at t)

Set-valued maps are supplied as deterministic finite samplers. The Euler
scheme picks ``v_j`` from ``G(t_j, x_j, v_{j-1})`` and sets
``x_{j+1} = x_j + h v_j``, starting from a state ``x0`` and an initial
backward velocity ``v0``.

Connection-tensor constraints ``backward ⊗ forward in C(t, x)`` are imposed
by filtering the samples of an unconstrained map ``F`` (see
:func:`build_regulation_map`).
"""

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleError, ValidationError
from .tensor import ConnectionTensor

__all__ = [
    "SetValuedOracle",
    "Tube",
    "Trajectory",
    "ConstraintMap",
    "TangentialCheck",
    "POLICIES",
    "euler_step",
    "simulate",
    "tangential_condition_sample",
    "build_regulation_map",
    "minmax_entry_constraint",
    "nonpositive_cone",
    "nonnegative_cone",
    "everything",
    "constant_map",
    "decay_map",
    "history_map",
    "box_map",
    "box_tube",
    "whole_space_tube",
    "point_tube",
    "direction_grid",
]


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class SetValuedOracle:
    """Finite sample of a set-valued map ``(t, x, backward) -> set of velocities``.

    A map that ignores the backward velocity plays the role of ``F(t, x)``.
    """

    sampler: object
    description: str = ""

    def __call__(self, t, x, backward):
        return [_vec(w) for w in self.sampler(t, _vec(x), _vec(backward))]


@dataclass(frozen=True)
class Tube:
    """Time-dependent constraint set ``K(t)``.

    Args:
        membership: ``(t, x) -> bool``.
        tangent_sampler: ``(t, x, direction) -> list of vectors`` where
            direction is ``"backward"`` or ``"forward"``; samples of the
            backward/forward derivative of the tube at ``(t, x)``.
        distance: optional ``(t, x) -> float`` distance to ``K(t)``, used
            for epsilon-inflated viability checks.
    """

    membership: object
    tangent_sampler: object = None
    label: str = ""
    distance: object = None

    def contains(self, t, x, epsilon=0.0):
        if epsilon > 0 and self.distance is not None:
            return bool(self.distance(t, _vec(x)) <= epsilon)
        return bool(self.membership(t, _vec(x)))

    def tangents(self, t, x, direction):
        if self.tangent_sampler is None:
            return None
        return [_vec(v) for v in self.tangent_sampler(t, _vec(x), direction)]


@dataclass(frozen=True)
class ConstraintMap:
    """Membership test ``(t, x, tensor) -> bool`` for ``C(t, x)``.

    ``tensor`` is a :class:`~retroprospect.tensor.ConnectionTensor`; its
    ``entries`` matrix is the object constrained, and its two factors are
    available for constraints that depend on the backward velocity.
    """

    test: object
    label: str = ""

    def __call__(self, t, x, tensor):
        return bool(self.test(t, x, tensor))


@dataclass
class Trajectory:
    """Output of :func:`simulate`.

    ``states[j]`` is ``x_j`` at ``t0 + j*h``; ``selected[j]`` is the velocity
    picked from the sample of ``G`` at step ``j`` (so
    ``states[j+1] == states[j] + h*selected[j]``); ``velocities[j]`` is the
    realized quotient ``(states[j+1] - states[j]) / h``. The two agree up to
    floating-point rounding and exactly for dyadic data.
    """

    h: float
    t0: float
    v0: np.ndarray
    states: np.ndarray
    selected: np.ndarray
    viable: np.ndarray
    stopped_at: int = None

    @property
    def times(self):
        return self.t0 + self.h * np.arange(len(self.states))

    @property
    def velocities(self):
        return np.diff(self.states, axis=0) / self.h

    @property
    def backward_inputs(self):
        """The backward velocity fed to ``G`` at each step."""
        return np.vstack([self.v0[None, :], self.selected[:-1]])


# Norm ties go to the lexicographically greatest vector, so (1, 0) beats (0, 1).
def _min_norm(candidates):
    return max(candidates, key=lambda w: (-float(np.linalg.norm(w)), tuple(w.tolist())))


def _max_norm(candidates):
    return max(candidates, key=lambda w: (float(np.linalg.norm(w)), tuple(w.tolist())))


POLICIES = {
    "min_norm": _min_norm,
    "max_norm": _max_norm,
    "first": lambda candidates: candidates[0],
}


def _policy(policy):
    if callable(policy):
        return policy
    try:
        return POLICIES[policy]
    except KeyError:
        raise ValidationError(f"unknown selection policy {policy!r}") from None


def euler_step(G, t, x, prev_v, h, policy="min_norm"):
    """One step of the retro-prospective Euler scheme.

    Returns:
        tuple: ``(x_next, chosen_v)`` with ``x_next = x + h * chosen_v``.

    Raises:
        EmptySampleError: if ``G(t, x, prev_v)`` has no sample.
    """
    if not h > 0:
        raise ValidationError("h must be positive")
    x = _vec(x)
    candidates = G(t, x, _vec(prev_v))
    if not candidates:
        raise EmptySampleError(
            f"empty velocity sample at t={t:g}, x={x.tolist()}", t=t, x=x)
    chosen = _vec(_policy(policy)(candidates))
    if chosen.shape != x.shape:
        raise ValidationError(f"velocity of shape {chosen.shape} for state of shape {x.shape}")
    return x + h * chosen, chosen


def simulate(G, t0, x0, v0, h, steps, tube=None, policy="min_norm",
             stop_on_violation=True, epsilon=0.0):
    """Iterate :func:`euler_step` from ``(t0, x0)`` with initial backward velocity ``v0``.

    If a tube is given, the membership of every state (inflated by
    ``epsilon`` when the tube declares a distance) is recorded; by default
    the run stops right after the first violating state.
    """
    if steps < 0:
        raise ValidationError("steps must be nonnegative")
    x = _vec(x0)
    prev = _vec(v0)
    if prev.shape != x.shape:
        raise ValidationError("x0 and v0 must have the same dimension")
    states = [x]
    selected = []
    viable = [tube.contains(t0, x, epsilon) if tube is not None else True]
    stopped_at = None
    if tube is not None and not viable[0] and stop_on_violation:
        stopped_at = 0
    for j in range(steps if stopped_at is None else 0):
        t = t0 + j * h
        try:
            x, v = euler_step(G, t, x, prev, h, policy)
        except EmptySampleError as exc:
            exc.step = j
            raise
        states.append(x)
        selected.append(v)
        prev = v
        ok = tube.contains(t0 + (j + 1) * h, x, epsilon) if tube is not None else True
        viable.append(ok)
        if not ok and stop_on_violation:
            stopped_at = j + 1
            break
    dim = len(x)
    return Trajectory(
        h=float(h),
        t0=float(t0),
        v0=_vec(v0),
        states=np.array(states),
        selected=np.array(selected).reshape(-1, dim),
        viable=np.array(viable, dtype=bool),
        stopped_at=stopped_at,
    )


@dataclass(frozen=True)
class TangentialCheck:
    holds: bool
    witness: np.ndarray = None
    vacuous: bool = False


def tangential_condition_sample(G, tube, t, x, delta=1e-6):
    """Sampled check of the tangential condition of a tube at ``(t, x)``.

    For each sampled backward tangent ``bv``, some velocity of
    ``G(t, x, bv)`` must lie within ``delta`` of a sampled forward
    tangent. Finite sampling makes this evidence, not proof.

    Returns:
        TangentialCheck: ``witness`` is the first failing backward tangent.
        With no backward tangent samples the check holds vacuously and
        ``vacuous`` is set.
    """
    backward = tube.tangents(t, x, "backward")
    forward = tube.tangents(t, x, "forward")
    if backward is None or forward is None:
        raise ValidationError(f"tube {tube.label!r} has no tangent sampler")
    if not backward:
        warnings.warn("no backward tangent samples; tangential condition holds vacuously")
        return TangentialCheck(True, None, vacuous=True)
    fwd = np.array(forward) if forward else None
    for bv in backward:
        ok = False
        if fwd is not None:
            for g in G(t, x, bv):
                if np.min(np.linalg.norm(fwd - g, axis=1)) <= delta:
                    ok = True
                    break
        if not ok:
            return TangentialCheck(False, bv)
    return TangentialCheck(True)


def build_regulation_map(F, C):
    """Velocities of ``F`` whose connection tensor with the backward velocity lies in ``C``."""

    def sampler(t, x, backward):
        return [w for w in F(t, x, backward) if C(t, x, ConnectionTensor(backward, w))]

    return SetValuedOracle(sampler, f"{F.description} | {C.label}")


def minmax_entry_constraint(F, mode="minimize", tol=1e-12):
    """Constraint making tensor entries extremal over the velocities of ``F``.

    For a pair ``(i, j)`` in minimize mode the entry ``b_i * f_j`` must not
    exceed ``min_w b_i * w_j`` over the sample of ``F(t, x)`` (up to ``tol``);
    maximize mode is symmetric.

    Args:
        F: the unconstrained map.
        mode: ``"minimize"``, ``"maximize"``, or an ``l x l`` nested sequence
            of those strings (``None`` leaves a pair unconstrained).
        tol: absolute slack.
    """

    def modes_for(dim):
        if isinstance(mode, str):
            grid = [[mode] * dim for _ in range(dim)]
        else:
            grid = [list(row) for row in mode]
        for row in grid:
            for m in row:
                if m not in ("minimize", "maximize", None):
                    raise ValidationError(f"unknown entry mode {m!r}")
        return grid

    def test(t, x, tensor):
        b, f = tensor.backward, tensor.forward
        grid = modes_for(len(b))
        ws = np.array(F(t, x, b))
        if ws.size == 0:
            return False
        entries = np.multiply.outer(b, f)
        # candidate[k, i, j] = b_i * w_k[j]
        candidate = b[None, :, None] * ws[:, None, :]
        lo = candidate.min(axis=0)
        hi = candidate.max(axis=0)
        for i, j in itertools.product(range(len(b)), repeat=2):
            m = grid[i][j]
            if m == "minimize" and entries[i, j] > lo[i, j] + tol:
                return False
            if m == "maximize" and entries[i, j] < hi[i, j] - tol:
                return False
        return True

    label = mode if isinstance(mode, str) else "mixed"
    return ConstraintMap(test, f"{label} entries over {F.description}")


def nonpositive_cone(tol=0.0):
    return ConstraintMap(lambda t, x, c: bool(np.all(c.entries <= tol)), "nonpositive entries")


def nonnegative_cone(tol=0.0):
    return ConstraintMap(lambda t, x, c: bool(np.all(c.entries >= -tol)), "nonnegative entries")


def everything():
    return ConstraintMap(lambda t, x, c: True, "all tensors")


def constant_map(*velocities):
    vs = [_vec(v) for v in velocities]
    return SetValuedOracle(lambda t, x, b: vs, f"constant {[v.tolist() for v in vs]}")


def decay_map(rate=1.0):
    """``G(t, x, b) = {-rate * x}``."""
    return SetValuedOracle(lambda t, x, b: [-rate * x], f"decay rate={rate:g}")


def history_map():
    """``G(t, x, b) = {b}``: continue with the observed backward velocity."""
    return SetValuedOracle(lambda t, x, b: [b], "history")


def direction_grid(lower, upper, points):
    """Cartesian grid of ``points`` values per axis over the box ``[lower, upper]``."""
    lower, upper = _vec(lower), _vec(upper)
    if lower.shape != upper.shape or np.any(lower > upper):
        raise ValidationError("invalid box bounds")
    if points < 1:
        raise ValidationError("need at least one point per axis")
    axes = [np.linspace(lo, hi, points) if points > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi in zip(lower, upper)]
    return [np.array(p) for p in itertools.product(*axes)]


def box_map(lower, upper, points=3):
    """``G(t, x, b)`` = grid sample of the box ``[lower, upper]``, independent of inputs."""
    grid = direction_grid(lower, upper, points)
    return SetValuedOracle(lambda t, x, b: grid, f"box [{_vec(lower).tolist()}, {_vec(upper).tolist()}]")


def _box_tangents(lower, upper, x, direction, radius, points, atol):
    """Sampled backward/forward derivative of a fixed box at ``x``.

    Forward tangents point inward at active bounds; backward tangents point
    outward (the state arrived from inside).
    """
    axes = []
    for lo, hi, xi in zip(lower, upper, x):
        vals = np.linspace(-radius, radius, points)
        at_lo = abs(xi - lo) <= atol
        at_hi = abs(xi - hi) <= atol
        if at_lo and at_hi:
            vals = np.array([0.0])
        elif at_lo:
            vals = vals[vals >= 0] if direction == "forward" else vals[vals <= 0]
        elif at_hi:
            vals = vals[vals <= 0] if direction == "forward" else vals[vals >= 0]
        axes.append(vals)
    return [np.array(p) for p in itertools.product(*axes)]


def box_tube(lower, upper, radius=1.0, points=21, atol=1e-12):
    """Time-invariant box ``K(t) = [lower, upper]``.

    Tangent samples are grids of ``points`` values per axis over
    ``[-radius, radius]``, cut to the half-line allowed at active bounds.
    """
    lower, upper = _vec(lower), _vec(upper)
    if lower.shape != upper.shape or np.any(lower > upper):
        raise ValidationError("invalid tube bounds")

    def membership(t, x):
        return bool(np.all(x >= lower) and np.all(x <= upper))

    def distance(t, x):
        return float(np.linalg.norm(np.maximum(lower - x, 0) + np.maximum(x - upper, 0)))

    def tangents(t, x, direction):
        if not membership(t, x):
            return []
        return _box_tangents(lower, upper, x, direction, radius, points, atol)

    return Tube(membership, tangents, f"box [{lower.tolist()}, {upper.tolist()}]", distance)


def whole_space_tube(dim=1, radius=1.0, points=21):
    """``K(t) = R^dim``; tangent samples span a grid of the velocity box."""
    grid = direction_grid(-radius * np.ones(dim), radius * np.ones(dim), points)
    return Tube(lambda t, x: True, lambda t, x, d: grid, "whole space",
                lambda t, x: 0.0)


def point_tube(point):
    """``K(t) = {point}``; the only tangent is zero."""
    p = _vec(point)
    zero = [np.zeros_like(p)]
    return Tube(
        lambda t, x: bool(np.array_equal(x, p)),
        lambda t, x, d: zero if np.array_equal(x, p) else [],
        f"point {p.tolist()}",
        lambda t, x: float(np.linalg.norm(x - p)),
    )
