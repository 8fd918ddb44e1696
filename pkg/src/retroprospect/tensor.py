"""Differential connection tensors.

The connection tensor at a junction is the rank-one matrix
``backward ⊗ forward`` whose ``(i, j)`` entry is ``backward[i] * forward[j]``.
The sign of each entry tells whether the incoming trend of component ``i``
is reversed (negative), continued (positive) or stopped (zero) by the
outgoing trend of component ``j``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVelocityError, ValidationError
from .evolution import backward_quotient, forward_quotient

__all__ = [
    "EntryClass",
    "ConnectionTensor",
    "outer",
    "connection_tensor",
    "normalized",
    "classify_entry",
    "classify_array",
    "kfold_product",
    "pairwise_matrix",
    "pairwise_velocities",
]


class EntryClass(enum.IntEnum):
    """Qualitative class of a tensor entry, encoded as -1 / 0 / +1."""

    REVERSAL = -1
    INACTIVE = 0
    CONGRUENCE = 1


def outer(p, q):
    """Rank-one matrix ``M[i, j] = p[i] * q[j]``."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise ValidationError(f"dimension mismatch: {p.size} vs {q.size}")
    return np.multiply.outer(p, q)


@dataclass(frozen=True, eq=False)
class ConnectionTensor:
    """Tensor product of a backward and a forward velocity."""

    backward: np.ndarray
    forward: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.backward, dtype=np.float64))
        f = np.atleast_1d(np.asarray(self.forward, dtype=np.float64))
        if b.shape != f.shape or b.ndim != 1:
            raise ValidationError(f"dimension mismatch: {b.shape} vs {f.shape}")
        object.__setattr__(self, "backward", b)
        object.__setattr__(self, "forward", f)

    @property
    def entries(self):
        return outer(self.backward, self.forward)

    def classes(self, eps=0.0):
        return classify_array(self.entries, eps)


def connection_tensor(pair):
    """Connection tensor of a :class:`~retroprospect.evolution.VelocityPair`."""
    return ConnectionTensor(pair.backward, pair.forward)


def normalized(t, eps=0.0):
    """Entries divided by ``|backward| * |forward|``; unit Frobenius norm.

    Raises:
        DegenerateVelocityError: if either velocity norm is ``<= eps``.
    """
    nb = np.linalg.norm(t.backward)
    nf = np.linalg.norm(t.forward)
    if nb <= eps or nf <= eps:
        raise DegenerateVelocityError(
            f"cannot normalize: |backward|={nb:g}, |forward|={nf:g}, eps={eps:g}")
    return outer(t.backward / nb, t.forward / nf)


def classify_entry(value, eps=0.0):
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    if value < -eps:
        return EntryClass.REVERSAL
    if value > eps:
        return EntryClass.CONGRUENCE
    return EntryClass.INACTIVE


def classify_array(values, eps=0.0):
    """Vectorized :func:`classify_entry`; returns an int8 array of -1/0/+1."""
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    values = np.asarray(values, dtype=np.float64)
    out = np.zeros(values.shape, dtype=np.int8)
    out[values < -eps] = EntryClass.REVERSAL
    out[values > eps] = EntryClass.CONGRUENCE
    return out


def kfold_product(velocities):
    """Product of the scalar velocities of several branches meeting at a junction."""
    velocities = [float(v) for v in velocities]
    if not velocities:
        raise ValidationError("kfold_product needs at least one branch")
    return math.prod(velocities)


def _check_aligned(series):
    if not series:
        raise ValidationError("need at least one series")
    grid = series[0].times
    for k, s in enumerate(series):
        if s.dimension != 1:
            raise ValidationError(f"series {k} is not scalar")
        if s.times.shape != grid.shape or np.any(s.times != grid):
            raise ValidationError(f"series {k} is not aligned with series 0")
    return grid


def pairwise_matrix(series, i, eps=0.0):
    """Cross connection matrix of N aligned scalar series at index ``i``.

    ``M[a, b]`` is the backward velocity of series ``a`` times the forward
    velocity of series ``b``: negative when the trend of ``a`` is followed
    by the opposite trend of ``b``.

    Returns:
        tuple: ``(M, classes)``, both ``(N, N)``; classes hold -1/0/+1.
    """
    _check_aligned(series)
    if not 1 <= i <= len(series[0]) - 2:
        raise IndexError(f"index {i} is not interior")
    b = np.array([backward_quotient(s, i)[0] for s in series])
    f = np.array([forward_quotient(s, i)[0] for s in series])
    m = outer(b, f)
    return m, classify_array(m, eps)


def pairwise_velocities(series):
    """Backward and forward quotients of aligned scalar series at every interior index.

    Returns:
        tuple: ``(backward, forward)`` arrays of shape ``(n - 2, N)``; row
        ``k`` belongs to sample index ``k + 1``.
    """
    grid = _check_aligned(series)
    if len(grid) < 3:
        raise ValidationError("need at least three samples for interior indices")
    x = np.stack([s.scalar() for s in series], axis=1)
    q = np.diff(x, axis=0) / np.diff(grid)[:, None]
    return q[:-1], q[1:]
