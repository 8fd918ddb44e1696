"""Named dynamics and tubes referenced by run configurations.

Each builder takes the dimension and the :class:`~retroprospect.config.RunConfig`
view of its dotted parameters (``dynamics.*`` or ``tube.*``).
"""

from . import dynamics as dyn
from .errors import ValidationError

__all__ = ["DYNAMICS", "TUBES", "CONSTRAINTS", "build_dynamics", "build_tube"]


def _decay(dim, params):
    return dyn.decay_map(params.get_float("rate", 1.0))


def _history(dim, params):
    return dyn.history_map()


def _drift(dim, params):
    return dyn.constant_map(params.get_vector("velocity", "1", dim))


def _interval_box(dim, params):
    return dyn.box_map(
        params.get_vector("lower", "-1", dim),
        params.get_vector("upper", "1", dim),
        params.get_int("points", 3),
    )


CONSTRAINTS = {
    "nonpositive": lambda F, tol: dyn.nonpositive_cone(tol),
    "nonnegative": lambda F, tol: dyn.nonnegative_cone(tol),
    "minimize": lambda F, tol: dyn.minmax_entry_constraint(F, "minimize", tol),
    "maximize": lambda F, tol: dyn.minmax_entry_constraint(F, "maximize", tol),
    "everything": lambda F, tol: dyn.everything(),
}


def _controlled(dim, params):
    """Box velocities filtered by a connection-tensor constraint."""
    F = _interval_box(dim, params)
    name = params.get_str("constraint", "nonpositive")
    if name not in CONSTRAINTS:
        raise ValidationError(f"unknown constraint {name!r}; known: {sorted(CONSTRAINTS)}")
    C = CONSTRAINTS[name](F, params.get_float("tol", 1e-12))
    return dyn.build_regulation_map(F, C)


DYNAMICS = {
    "decay": _decay,
    "history": _history,
    "drift": _drift,
    "interval-box": _interval_box,
    "controlled": _controlled,
}


def _box(dim, params):
    return dyn.box_tube(
        params.get_vector("lower", "0", dim),
        params.get_vector("upper", "1", dim),
        radius=params.get_float("radius", 1.0),
        points=params.get_int("points", 21),
    )


def _whole(dim, params):
    return dyn.whole_space_tube(dim, params.get_float("radius", 1.0), params.get_int("points", 21))


def _point(dim, params):
    return dyn.point_tube(params.get_vector("point", "0", dim))


TUBES = {
    "box": _box,
    "interval": _box,
    "whole": _whole,
    "point": _point,
}


def build_dynamics(name, dim, params):
    try:
        builder = DYNAMICS[name]
    except KeyError:
        raise ValidationError(f"unknown dynamics {name!r}; known: {sorted(DYNAMICS)}") from None
    return builder(dim, params)


def build_tube(name, dim, params):
    if name in (None, "", "none"):
        return None
    try:
        builder = TUBES[name]
    except KeyError:
        raise ValidationError(f"unknown tube {name!r}; known: {sorted(TUBES)}") from None
    return builder(dim, params)
