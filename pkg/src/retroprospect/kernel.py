"""Grid approximation of retro-prospective viability kernels.

The kernel is computed on the augmented system with state
``(time, x, backward velocity)``::

    time' = 1
    x'    in G(time, x, backward)
    |backward'| <= c * max |G(time, x, backward)|

restricted to the graph of the tube and to backward velocities admitted by
the tube's backward derivative. Time is discretized into levels
``t0 + m*h`` for ``m = 0..horizon`` and the state and velocity spaces into
regular boxes. A node is viable at the terminal level when it is
admissible; at an earlier level when it is admissible and some sampled
velocity ``w`` of ``G`` together with some admissible change of backward
velocity leads to a viable node at the next level. One backward sweep
over the levels gives the finite-horizon kernel, which shrinks toward the
infinite-horizon kernel as the horizon grows.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["AugmentedGrid", "compute_kernel", "kernel_membership", "regular_axes"]

_TOL = 1e-9


def regular_axes(lower, upper, step):
    """Per-axis node arrays ``lower + k*step`` covering ``[lower, upper]``."""
    lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
    if lower.shape != upper.shape:
        raise ValidationError("grid bounds differ in dimension")
    if not step > 0:
        raise ValidationError("grid resolution must be positive")
    if np.any(upper < lower) or not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValidationError("grid bounds must be finite with lower <= upper")
    axes = []
    for lo, hi in zip(lower, upper):
        n = int(np.floor((hi - lo) / step + _TOL)) + 1
        axes.append(lo + step * np.arange(n, dtype=np.float64))
    return axes


def _nodes(axes):
    return np.array(list(itertools.product(*axes)), dtype=np.float64).reshape(-1, len(axes))


@dataclass(eq=False)
class AugmentedGrid:
    """Viability flags on the ``(time, state, velocity)`` grid.

    ``viable[m, i, k]`` refers to time level ``m``, state node ``i`` and
    velocity node ``k`` (state and velocity nodes flattened in row-major
    order of their axes).
    """

    t0: float
    h: float
    horizon: int
    dx: float
    dv: float
    state_axes: list
    velocity_axes: list
    viable: np.ndarray
    admissible: np.ndarray

    @property
    def times(self):
        return self.t0 + self.h * np.arange(self.horizon + 1)

    @property
    def states(self):
        return _nodes(self.state_axes)

    @property
    def velocities(self):
        return _nodes(self.velocity_axes)

    @property
    def dimension(self):
        return len(self.state_axes)

    @property
    def total_nodes(self):
        return int(self.viable.size)

    @property
    def viable_count(self):
        return int(self.viable.sum())

    def viable_states(self, level=0):
        """State nodes with at least one viable velocity at a time level."""
        return self.states[self.viable[level].any(axis=1)]

    def rows(self):
        """Export rows ``(t, *x, *v, flag)`` in time, state, velocity order."""
        times, states, vels = self.times, self.states, self.velocities
        for m, i, k in itertools.product(range(len(times)), range(len(states)), range(len(vels))):
            yield (times[m], *states[i], *vels[k], int(self.viable[m, i, k]))


def _snap_indices(axes, step, point, radius):
    """Flat indices of the state nodes a successor point snaps to.

    ``radius`` ``None`` means nearest node only; otherwise every node within
    ``radius`` in each coordinate. Points off the grid have no node.
    """
    per_axis = []
    for axis, p in zip(axes, point):
        if radius is None:
            k = int(np.rint((p - axis[0]) / step))
            if k < 0 or k >= len(axis) or abs(axis[k] - p) > 0.5 * step * (1 + _TOL):
                return []
            per_axis.append([k])
        else:
            ks = np.nonzero(np.abs(axis - p) <= radius * (1 + _TOL))[0]
            if ks.size == 0:
                return []
            per_axis.append(ks.tolist())
    shape = [len(a) for a in axes]
    return [int(np.ravel_multi_index(ks, shape)) for ks in itertools.product(*per_axis)]


def _velocity_successors(vels, k, dv, radius):
    """Velocity nodes whose cell meets the ball of ``radius`` around node ``k``."""
    gap = np.maximum(np.abs(vels - vels[k]) - 0.5 * dv, 0.0)
    return np.nonzero(np.linalg.norm(gap, axis=1) <= radius + _TOL * dv)[0]


def _admitted_velocities(tube, t, x, vels, dv):
    samples = tube.tangents(t, x, "backward")
    if samples is None:
        return np.ones(len(vels), dtype=bool)
    if not samples:
        return np.zeros(len(vels), dtype=bool)
    samples = np.array(samples)
    # sup-norm distance from each velocity node to the nearest tangent sample
    dist = np.abs(vels[:, None, :] - samples[None, :, :]).max(axis=2).min(axis=1)
    return dist <= 0.5 * dv * (1 + _TOL)


def compute_kernel(G, tube, x_lower, x_upper, dx, v_lower, v_upper, dv, h, horizon,
                   t0=0.0, c=1.0, lipschitz=0.0):
    """Finite-horizon retro-prospective viability kernel on a regular grid.

    Args:
        G: :class:`~retroprospect.dynamics.SetValuedOracle`.
        tube: :class:`~retroprospect.dynamics.Tube`. Its backward tangent
            samples decide which velocity nodes are admissible at a state
            (within half a velocity cell); a tube without a tangent sampler
            admits every velocity node.
        x_lower, x_upper, dx: state box and resolution.
        v_lower, v_upper, dv: velocity box and resolution.
        h: time step.
        horizon: number of time steps ``M``; levels are ``t0 + m*h``,
            ``m = 0..M``.
        c: bound factor on the rate of change of the backward velocity.
        lipschitz: with ``0`` a successor state snaps to its nearest node;
            with ``L > 0`` it may snap to any node within ``dx + h*L`` in
            each coordinate.

    Returns:
        AugmentedGrid
    """
    if not h > 0:
        raise ValidationError("h must be positive")
    if horizon < 0 or int(horizon) != horizon:
        raise ValidationError("horizon must be a nonnegative integer")
    if c < 0 or lipschitz < 0:
        raise ValidationError("c and lipschitz must be nonnegative")
    state_axes = regular_axes(x_lower, x_upper, dx)
    velocity_axes = regular_axes(v_lower, v_upper, dv)
    if len(state_axes) != len(velocity_axes):
        raise ValidationError("state and velocity boxes differ in dimension")
    states = _nodes(state_axes)
    vels = _nodes(velocity_axes)
    times = t0 + h * np.arange(horizon + 1)
    shape = (len(times), len(states), len(vels))
    if 0 in shape:
        raise ValidationError("empty grid")
    radius = None if lipschitz == 0 else dx + h * lipschitz

    admissible = np.zeros(shape, dtype=bool)
    for m, t in enumerate(times):
        for i, x in enumerate(states):
            if tube.contains(t, x):
                admissible[m, i] = _admitted_velocities(tube, t, x, vels, dv)

    viable = np.zeros(shape, dtype=bool)
    viable[-1] = admissible[-1]
    for m in range(horizon - 1, -1, -1):
        nxt = viable[m + 1]
        if not nxt.any():
            continue
        t = times[m]
        for i, k in zip(*np.nonzero(admissible[m])):
            x, v = states[i], vels[k]
            ws = G(t, x, v)
            if not ws:
                continue
            reach = h * c * max(float(np.linalg.norm(w)) for w in ws)
            vsucc = _velocity_successors(vels, k, dv, reach)
            for w in ws:
                succ = _snap_indices(state_axes, dx, x + h * w, radius)
                if succ and nxt[np.ix_(succ, vsucc)].any():
                    viable[m, i, k] = True
                    break

    return AugmentedGrid(
        t0=float(t0), h=float(h), horizon=int(horizon), dx=float(dx), dv=float(dv),
        state_axes=state_axes, velocity_axes=velocity_axes,
        viable=viable, admissible=admissible,
    )


def _lookup(axis, step, value, what):
    k = int(np.rint((value - axis[0]) / step))
    if k < 0 or k >= len(axis) or abs(axis[k] - value) > 0.5 * step * (1 + _TOL):
        raise ValidationError(f"{what} {value:g} outside the grid")
    return k


def kernel_membership(grid, t, x, v):
    """Nearest-node lookup of the viability flag; snapping radius is half a cell.

    Raises:
        ValidationError: if the query lies outside the grid.
    """
    m = _lookup(grid.times, grid.h, float(t), "time")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if x.size != grid.dimension or v.size != grid.dimension:
        raise ValidationError("query dimension does not match the grid")
    xi = [_lookup(a, grid.dx, p, "state") for a, p in zip(grid.state_axes, x)]
    vi = [_lookup(a, grid.dv, p, "velocity") for a, p in zip(grid.velocity_axes, v)]
    i = int(np.ravel_multi_index(xi, [len(a) for a in grid.state_axes]))
    k = int(np.ravel_multi_index(vi, [len(a) for a in grid.velocity_axes]))
    return bool(grid.viable[m, i, k])
