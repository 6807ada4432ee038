"""Safety index families for collision avoidance and safe following.

State convention throughout: x = [p_x, p_y, v, theta] for a planar
unicycle. All functions accept a single state (4,) or a batch (N, 4).

The raw index phi0 encodes the geometric requirement (negative inside
the allowed set); the shaped index phi adds a distance-rate term and a
margin so the sublevel boundary can be defended with bounded controls.
The control constraint is linear in the state derivative:

    grad_phi(x) . xdot  <=  max(-phi(x)/dt, -gamma)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "COLLISION",
    "FOLLOWING",
    "GeometryError",
    "SafetyIndexSpec",
    "GeomQuantities",
    "geometry",
    "phi0",
    "phi",
    "grad_phi",
    "constraint_terms",
    "safety_margin",
    "constraint_rhs",
]

COLLISION = "collision_avoidance"
FOLLOWING = "safe_following"


class GeometryError(ValueError):
    """State coincides with an obstacle/target center; d and its
    derivatives are undefined there."""


@dataclass(frozen=True)
class SafetyIndexSpec:
    """Index family kind plus parameters and geometry.

    collision_avoidance: phi0 = d_min - d,
        phi = d_min**a1 - d**a1 - a2 * ddot + beta, worst obstacle.
    safe_following: phi0 = (d - d_min) * (d - d_max),
        phi = (d-d_min)**a1 * (d-d_max)**a1
              + a2 * (d*ddot + ddot*(d_min+d_max)) + beta,
        with d measured to the target's current position.

    beta_min is the discrete-time safety margin floor (see
    safety_margin); construction rejects beta below it.
    """

    kind: str
    alpha1: float
    alpha2: float
    beta: float
    gamma: float
    d_min: float
    d_max: float | None = None
    obstacles: tuple = ()
    target: tuple | None = None
    beta_min: float = 0.0

    def __post_init__(self):
        if self.kind not in (COLLISION, FOLLOWING):
            raise ValueError(f"unknown index kind {self.kind!r}")
        if self.d_min <= 0:
            raise ValueError("d_min must be positive")
        if self.alpha1 <= 0:
            raise ValueError("alpha1 must be positive")
        if self.alpha2 < 0:
            raise ValueError("alpha2 must be nonnegative")
        if self.beta < self.beta_min:
            raise ValueError(
                f"beta={self.beta} is below the safety margin {self.beta_min}"
            )
        if self.kind == FOLLOWING:
            if self.d_max is None or self.d_max <= self.d_min:
                raise ValueError("safe following needs d_max > d_min")
            if self.target is None:
                raise ValueError("safe following needs a target position")
        else:
            if not self.obstacles:
                raise ValueError("collision avoidance needs at least one obstacle")
        object.__setattr__(self, "obstacles", tuple(tuple(o) for o in self.obstacles))
        if self.target is not None:
            object.__setattr__(self, "target", tuple(self.target))

    @property
    def centers(self) -> tuple:
        """Reference points distance is measured to."""
        return (self.target,) if self.kind == FOLLOWING else self.obstacles

    def with_target(self, xy) -> "SafetyIndexSpec":
        """New spec tracking the target's current position."""
        return replace(self, target=(float(xy[0]), float(xy[1])))

    def params(self) -> dict:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta": self.beta,
            "gamma": self.gamma,
        }


@dataclass(frozen=True)
class GeomQuantities:
    """Distance, its rate, and their state gradients at one or many states."""

    d: np.ndarray
    ddot: np.ndarray
    grad_d: np.ndarray
    grad_ddot: np.ndarray


def geometry(x, center) -> GeomQuantities:
    """d, ddot and gradients w.r.t. [p_x, p_y, v, theta] for one center.

    d = |p - c|; ddot = (p - c) . [v cos t, v sin t] / d is the range
    rate induced by the agent's own motion.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    dx = xs[:, 0] - center[0]
    dy = xs[:, 1] - center[1]
    v = xs[:, 2]
    th = xs[:, 3]
    d = np.hypot(dx, dy)
    if np.any(d <= 0.0):
        raise GeometryError("state lies exactly on a center point")
    ct, st = np.cos(th), np.sin(th)
    radial = dx * ct + dy * st  # heading projected on the outward ray, times d
    ddot = v * radial / d

    grad_d = np.zeros_like(xs)
    grad_d[:, 0] = dx / d
    grad_d[:, 1] = dy / d

    grad_ddot = np.zeros_like(xs)
    grad_ddot[:, 0] = v * ct / d - ddot * dx / d**2
    grad_ddot[:, 1] = v * st / d - ddot * dy / d**2
    grad_ddot[:, 2] = radial / d
    grad_ddot[:, 3] = v * (-dx * st + dy * ct) / d

    if single:
        return GeomQuantities(d[0], ddot[0], grad_d[0], grad_ddot[0])
    return GeomQuantities(d, ddot, grad_d, grad_ddot)


def _phi0_of_d(spec: SafetyIndexSpec, d):
    if spec.kind == COLLISION:
        return spec.d_min - d
    return (d - spec.d_min) * (d - spec.d_max)


def _phi_of_geom(spec: SafetyIndexSpec, d, ddot):
    a1, a2 = spec.alpha1, spec.alpha2
    if spec.kind == COLLISION:
        return spec.d_min**a1 - d**a1 - a2 * ddot + spec.beta
    lo, hi = d - spec.d_min, d - spec.d_max
    return (
        np.sign(lo) * np.abs(lo) ** a1 * np.sign(hi) * np.abs(hi) ** a1
        + a2 * (d * ddot + ddot * (spec.d_min + spec.d_max))
        + spec.beta
    )


def _grad_phi_of_geom(spec: SafetyIndexSpec, g: GeomQuantities):
    a1, a2 = spec.alpha1, spec.alpha2
    d = np.asarray(g.d)[..., None]
    ddot = np.asarray(g.ddot)[..., None]
    if spec.kind == COLLISION:
        return -a1 * d ** (a1 - 1.0) * g.grad_d - a2 * g.grad_ddot
    lo, hi = d - spec.d_min, d - spec.d_max
    # d/dx of sign(x)|x|^a is a|x|^(a-1), so the product rule gives:
    dphi0s_dd = a1 * (
        np.abs(lo) ** (a1 - 1.0) * np.sign(hi) * np.abs(hi) ** a1
        + np.sign(lo) * np.abs(lo) ** a1 * np.abs(hi) ** (a1 - 1.0)
    )
    return (
        dphi0s_dd * g.grad_d
        + a2 * (ddot * g.grad_d + d * g.grad_ddot)
        + a2 * (spec.d_min + spec.d_max) * g.grad_ddot
    )


def _per_center(spec: SafetyIndexSpec, x):
    return [geometry(x, c) for c in spec.centers]


def phi0(spec: SafetyIndexSpec, x):
    """Raw index; worst (largest) value over centers."""
    vals = [_phi0_of_d(spec, g.d) for g in _per_center(spec, x)]
    return vals[0] if len(vals) == 1 else np.maximum.reduce(vals)


def phi(spec: SafetyIndexSpec, x):
    """Shaped index; worst (largest) value over centers."""
    vals = [_phi_of_geom(spec, g.d, g.ddot) for g in _per_center(spec, x)]
    return vals[0] if len(vals) == 1 else np.maximum.reduce(vals)


def grad_phi(spec: SafetyIndexSpec, x):
    """State gradient of phi, taken on the active (max) center."""
    geoms = _per_center(spec, x)
    grads = [_grad_phi_of_geom(spec, g) for g in geoms]
    if len(geoms) == 1:
        return grads[0]
    vals = np.stack([_phi_of_geom(spec, g.d, g.ddot) for g in geoms])
    active = np.argmax(vals, axis=0)
    stacked = np.stack(grads)
    x = np.asarray(x)
    if x.ndim == 1:
        return stacked[int(active)]
    return stacked[active, np.arange(stacked.shape[1])]


def per_center_terms(spec: SafetyIndexSpec, x):
    """Per-center (phi, grad_phi) arrays, batched like x."""
    out = []
    for g in _per_center(spec, x):
        out.append((_phi_of_geom(spec, g.d, g.ddot), _grad_phi_of_geom(spec, g)))
    return out


def constraint_terms(spec: SafetyIndexSpec, x):
    """Per-center (phi value, phi gradient) pairs for one state.

    Every center contributes its own linear constraint row; their
    intersection is what the controller enforces.
    """
    return [
        (float(p), np.asarray(g, dtype=float))
        for p, g in per_center_terms(spec, x)
    ]


def safety_margin(c: float, x_dot_max: float, dt: float) -> float:
    """Discrete-time margin lambda = c * x_dot_max * dt.

    Used as the lower bound for beta so the first-order constraint keeps
    a buffer against one step's worth of state motion.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    return c * x_dot_max * dt


def constraint_rhs(phi_value: float, gamma: float, dt: float) -> float:
    """Right-hand side max(-phi/dt, -gamma) of the safety row."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return max(-phi_value / dt, -gamma)
