"""Interval propagation of an input box through a ReLU network.

Produces sound pre-activation intervals for every node; these decide
which ReLUs are stable (fixed on/off) and provide the node-specific
big-M constants for encoding the unstable ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .mlp import DimensionError, MlpNetwork

__all__ = ["Box", "BoundsTensor", "Status", "propagate", "activation_status"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with finite bounds, lower <= upper elementwise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be equal-length vectors")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box has lower > upper")

    @classmethod
    def from_intervals(cls, intervals) -> "Box":
        arr = np.asarray(intervals, dtype=float)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, points, tol=0.0) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.all(p >= self.lower - tol, axis=-1) & np.all(
            p <= self.upper + tol, axis=-1
        )

    def sample(self, rng, count=None) -> np.ndarray:
        size = None if count is None else (count, self.dim)
        return rng.uniform(self.lower, self.upper, size=size)

    def concat(self, other: "Box") -> "Box":
        return Box(
            np.concatenate([self.lower, other.lower]),
            np.concatenate([self.upper, other.upper]),
        )


class Status(enum.IntEnum):
    """Activation status of one ReLU node over the whole input box."""

    INACTIVE = 0
    ACTIVE = 1
    UNSTABLE = 2


@dataclass(frozen=True)
class BoundsTensor:
    """Per-layer pre- and post-activation intervals.

    pre_lower[i][j] <= zhat_{i,j} <= pre_upper[i][j] for every input in
    the originating box; post intervals clip hidden layers at zero and
    equal the pre intervals on the linear output layer.
    """

    pre_lower: tuple
    pre_upper: tuple
    post_lower: tuple
    post_upper: tuple

    @property
    def layer_count(self) -> int:
        return len(self.pre_lower)

    @property
    def output_lower(self) -> np.ndarray:
        return self.post_lower[-1]

    @property
    def output_upper(self) -> np.ndarray:
        return self.post_upper[-1]


def propagate(net: MlpNetwork, box: Box) -> BoundsTensor:
    """Push the input box through the network with interval arithmetic.

    Each weight row contributes [min(w*l, w*u), max(w*l, w*u)] summed
    over inputs, which is exact for a single affine layer; composing
    layers keeps soundness (every reachable pre-activation stays inside
    its interval) at the cost of some slack.
    """
    if box.dim != net.input_dim:
        raise DimensionError(
            f"box has dimension {box.dim}, network expects {net.input_dim}"
        )
    lo, hi = box.lower, box.upper
    pre_l, pre_u, post_l, post_u = [], [], [], []
    last = net.layer_count - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        wp = np.maximum(w, 0.0)
        wn = np.minimum(w, 0.0)
        zl = wp @ lo + wn @ hi + b
        zu = wp @ hi + wn @ lo + b
        pre_l.append(zl)
        pre_u.append(zu)
        if i == last:
            post_l.append(zl)
            post_u.append(zu)
        else:
            post_l.append(np.maximum(zl, 0.0))
            post_u.append(np.maximum(zu, 0.0))
        lo, hi = post_l[-1], post_u[-1]
    return BoundsTensor(tuple(pre_l), tuple(pre_u), tuple(post_l), tuple(post_u))


def activation_status(bt: BoundsTensor) -> tuple:
    """Classify every hidden node: inactive iff upper <= 0, active iff
    lower >= 0, unstable otherwise. Returns one int array per hidden
    layer with Status values."""
    statuses = []
    for i in range(bt.layer_count - 1):
        zl, zu = bt.pre_lower[i], bt.pre_upper[i]
        st = np.full(zl.shape, Status.UNSTABLE, dtype=np.int8)
        st[zl >= 0.0] = Status.ACTIVE
        st[zu <= 0.0] = Status.INACTIVE
        statuses.append(st)
    return tuple(statuses)
