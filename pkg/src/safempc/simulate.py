"""Closed-loop simulation on a planar unicycle.

State [p_x, p_y, v, theta], controls [a, omega], forward-Euler stepping
x_{k+1} = x_k + f(x_k, u_k) dt for both the learned network and the
analytic model (no higher-order integrator, so the model the controller
optimizes is exactly the model being stepped).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import safety
from .bounds import Box, propagate
from .encoder import add_safety_constraint, encode_tracking, solve_step
from .milp import MilpOptions, SolveStatus
from .mlp import Dataset, MlpNetwork, evaluate
from .safety import SafetyIndexSpec, constraint_terms

__all__ = [
    "DEFAULT_DT",
    "DEFAULT_U_BOX",
    "DEFAULT_STATE_BOX",
    "analytic_dynamics",
    "gen_dataset",
    "gen_reference",
    "MilpController",
    "ShootingController",
    "ScenarioConfig",
    "Trajectory",
    "Metrics",
    "StepOutcome",
    "rollout",
    "compute_metrics",
    "aggregate_metrics",
    "phi0_spec",
    "hand_spec",
    "make_collision_task",
    "make_following_task",
]

DEFAULT_DT = 0.05
DEFAULT_U_BOX = Box(np.array([-4.0, -2.0]), np.array([4.0, 2.0]))
# dataset box pads the operating ranges so the model stays accurate at
# the edges the controller actually visits
DEFAULT_STATE_BOX = Box(
    np.array([-6.0, -6.0, -0.5, -2.0 * math.pi]),
    np.array([6.0, 6.0, 2.5, 2.0 * math.pi]),
)
V_LIMITS = (0.0, 2.0)


def analytic_dynamics(x, u) -> np.ndarray:
    """Unicycle xdot = [v cos(theta), v sin(theta), a, omega]."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v, th = x[..., 2], x[..., 3]
    return np.stack(
        [v * np.cos(th), v * np.sin(th), u[..., 0], u[..., 1]], axis=-1
    )


def gen_dataset(n, state_box: Box, control_box: Box, rng) -> Dataset:
    """Uniform (x, u) pairs labeled with the analytic derivative."""
    if n < 1:
        raise ValueError("need at least one record")
    xs = state_box.sample(rng, n)
    us = control_box.sample(rng, n)
    return Dataset(xs, us, analytic_dynamics(xs, us))


def gen_reference(dynamics, x0, n_steps, dt, u_box: Box, rng,
                  ou_theta=2.0, ou_sigma=(2.0, 1.0), v_limits=V_LIMITS):
    """Roll the given dynamics under smoothed random controls.

    Controls follow a clipped Ornstein-Uhlenbeck walk, and acceleration
    is additionally clamped so v stays within v_limits. Every
    consecutive state pair is one Euler step of `dynamics` apart, so the
    result is exactly trackable by a controller optimizing over the same
    dynamics.
    """
    x = np.asarray(x0, dtype=float).copy()
    states = np.empty((n_steps + 1, x.shape[0]))
    states[0] = x
    u = np.zeros(u_box.dim)
    sigma = np.asarray(ou_sigma, dtype=float)
    for k in range(n_steps):
        u = u - ou_theta * u * dt + sigma * math.sqrt(dt) * rng.standard_normal(u_box.dim)
        u = np.clip(u, u_box.lower, u_box.upper)
        # keep the speed inside its envelope
        a_lo = (v_limits[0] - x[2]) / dt
        a_hi = (v_limits[1] - x[2]) / dt
        u[0] = np.clip(u[0], max(a_lo, u_box.lower[0]), min(a_hi, u_box.upper[0]))
        x = x + dynamics(x, u) * dt
        states[k + 1] = x
    return states


# ---------------------------------------------------------------------------
# controllers


@dataclass
class StepOutcome:
    status: str
    feasible: bool
    u: np.ndarray | None
    x_next_model: np.ndarray | None  # next state under the model being optimized
    objective: float | None
    solve_seconds: float


class MilpController:
    """Exact one-step tracking by the mixed-integer encoding."""

    name = "milp"

    def __init__(self, net: MlpNetwork, u_box: Box, dt,
                 options: MilpOptions | None = None, self_check=True):
        self.net = net
        self.u_box = u_box
        self.dt = float(dt)
        self.options = options
        self.self_check = self_check

    def step(self, x, x_ref_next, index: SafetyIndexSpec | None = None) -> StepOutcome:
        t0 = time.perf_counter()
        bt = propagate(self.net, Box(x, x).concat(self.u_box))
        step = encode_tracking(self.net, x, x_ref_next, self.dt, self.u_box, bt)
        if index is not None:
            for phi_val, grad in constraint_terms(index, x):
                add_safety_constraint(step, grad, phi_val, index.gamma, self.dt)
        res = solve_step(step, self.options, self_check=self.self_check)
        elapsed = time.perf_counter() - t0
        if res.status != SolveStatus.OPTIMAL:
            return StepOutcome(res.status.value, False, None, None, None, elapsed)
        return StepOutcome(res.status.value, True, res.u, res.x_next,
                           res.objective, elapsed)


class ShootingController:
    """Sample N candidate controls, keep the safe ones, pick the best
    tracker. Incomplete and suboptimal by construction; serves as the
    baseline the exact method is compared against."""

    name = "shooting"

    def __init__(self, net: MlpNetwork, u_box: Box, dt, n_samples, rng,
                 sampler=None):
        if n_samples < 1:
            raise ValueError("need at least one sample")
        self.net = net
        self.u_box = u_box
        self.dt = float(dt)
        self.n_samples = int(n_samples)
        self.rng = rng
        self.sampler = sampler or (lambda rng, n: self.u_box.sample(rng, n))

    def step(self, x, x_ref_next, index: SafetyIndexSpec | None = None) -> StepOutcome:
        t0 = time.perf_counter()
        x = np.asarray(x, dtype=float)
        us = np.atleast_2d(self.sampler(self.rng, self.n_samples))
        xdots = evaluate(self.net, np.broadcast_to(x, (len(us), x.shape[0])), us)
        keep = np.ones(len(us), dtype=bool)
        if index is not None:
            for phi_val, grad in constraint_terms(index, x):
                rhs = safety.constraint_rhs(phi_val, index.gamma, self.dt)
                keep &= xdots @ grad <= rhs
        if not keep.any():
            return StepOutcome("Infeasible", False, None, None, None,
                               time.perf_counter() - t0)
        x_next = x + self.dt * xdots[keep]
        errs = np.abs(x_next - np.asarray(x_ref_next)).sum(axis=1)
        j = int(np.argmin(errs))
        return StepOutcome("Optimal", True, us[keep][j], x_next[j],
                           float(errs[j]), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# scenarios and rollouts


TASK_TRACKING = "tracking"


@dataclass
class ScenarioConfig:
    """One closed-loop run: model, reference, constraint, execution."""

    task: str
    net: MlpNetwork
    reference: np.ndarray  # (horizon+1, 4)
    dt: float
    u_box: Box
    execution: str = "nndm"  # or "analytic"
    index: SafetyIndexSpec | None = None
    target_path: np.ndarray | None = None  # (horizon+1, 2), following only
    x0: np.ndarray | None = None  # defaults to reference[0]
    seed: int = 0

    def __post_init__(self):
        if self.execution not in ("nndm", "analytic"):
            raise ValueError(f"unknown execution model {self.execution!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if len(self.reference) < 2:
            raise ValueError("reference needs at least one step")

    @property
    def horizon(self) -> int:
        return len(self.reference) - 1

    def index_at(self, k) -> SafetyIndexSpec | None:
        if self.index is None:
            return None
        if self.index.kind == safety.FOLLOWING and self.target_path is not None:
            return self.index.with_target(self.target_path[k])
        return self.index


CSV_HEADER = ("k,px,py,v,theta,a,omega,ref_px,ref_py,ref_v,ref_theta,"
              "phi0,phi,feasible,status,obj,solve_ms")


@dataclass
class Trajectory:
    """Recorded rollout: horizon+1 states, horizon controls."""

    states: np.ndarray
    controls: np.ndarray
    reference: np.ndarray
    phi0s: np.ndarray  # per state, NaN when no index
    phis: np.ndarray
    feasible: np.ndarray  # per step
    statuses: list
    objectives: np.ndarray  # NaN on infeasible steps
    solve_ms: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.controls)

    def to_csv(self, path) -> None:
        def fmt(v):
            return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))

        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for k in range(self.horizon + 1):
                s = self.states[k]
                r = self.reference[k]
                if k < self.horizon:
                    u = self.controls[k]
                    tail = [fmt(u[0]), fmt(u[1]), fmt(r[0]), fmt(r[1]), fmt(r[2]),
                            fmt(r[3]), fmt(self.phi0s[k]), fmt(self.phis[k]),
                            str(int(self.feasible[k])), self.statuses[k],
                            fmt(self.objectives[k]), fmt(self.solve_ms[k])]
                else:
                    tail = ["", "", fmt(r[0]), fmt(r[1]), fmt(r[2]), fmt(r[3]),
                            fmt(self.phi0s[k]), fmt(self.phis[k]), "", "", "", ""]
                fh.write(",".join([str(k), fmt(s[0]), fmt(s[1]), fmt(s[2]),
                                   fmt(s[3])] + tail) + "\n")


@dataclass
class Metrics:
    """Per-trajectory summary; rates aggregate over a batch elsewhere."""

    mean_l1: float
    std_l1: float
    mean_l2: float
    std_l2: float
    success: bool
    phi0_violated: bool
    any_infeasible: bool
    infeasible_steps: int
    min_distance: float
    mean_solve_ms: float
    max_solve_ms: float

    def to_doc(self) -> dict:
        return {
            "mean_l1_error": self.mean_l1,
            "std_l1_error": self.std_l1,
            "mean_l2_error": self.mean_l2,
            "std_l2_error": self.std_l2,
            "success": self.success,
            "phi0_violated": self.phi0_violated,
            "any_infeasible": self.any_infeasible,
            "infeasible_steps": self.infeasible_steps,
            "min_distance": self.min_distance,
            "mean_solve_ms": self.mean_solve_ms,
            "max_solve_ms": self.max_solve_ms,
        }


def rollout(config: ScenarioConfig, controller):
    """Run the closed loop; on an infeasible step the previous control
    is reused (zero control at the first step), which is how a safety
    violation caused by infeasibility actually plays out."""
    h = config.horizon
    n = config.net.state_dim
    states = np.empty((h + 1, n))
    controls = np.zeros((h, config.u_box.dim))
    phi0s = np.full(h + 1, math.nan)
    phis = np.full(h + 1, math.nan)
    feasible = np.ones(h, dtype=bool)
    statuses = []
    objectives = np.full(h, math.nan)
    solve_ms = np.zeros(h)

    x = np.asarray(config.x0 if config.x0 is not None else config.reference[0],
                   dtype=float).copy()
    states[0] = x
    u_prev = np.zeros(config.u_box.dim)
    for k in range(h):
        spec_k = config.index_at(k)
        if spec_k is not None:
            phi0s[k] = float(safety.phi0(spec_k, x))
            phis[k] = float(safety.phi(spec_k, x))
        out = controller.step(x, config.reference[k + 1], spec_k)
        statuses.append(out.status)
        solve_ms[k] = 1000.0 * out.solve_seconds
        if out.feasible:
            u = out.u
            objectives[k] = out.objective
        else:
            feasible[k] = False
            u = u_prev
        controls[k] = u
        if config.execution == "nndm":
            if out.feasible:
                x = out.x_next_model  # same arithmetic path as the solver
            else:
                x = x + config.dt * evaluate(config.net, x, u)
        else:
            x = x + config.dt * analytic_dynamics(x, u)
        states[k + 1] = x
        u_prev = u
    spec_h = config.index_at(h)
    if spec_h is not None:
        phi0s[h] = float(safety.phi0(spec_h, states[h]))
        phis[h] = float(safety.phi(spec_h, states[h]))

    traj = Trajectory(states, controls, np.asarray(config.reference, dtype=float),
                      phi0s, phis, feasible, statuses, objectives, solve_ms)
    return traj, compute_metrics(traj, config)


def compute_metrics(traj: Trajectory, config: ScenarioConfig | None = None) -> Metrics:
    """Tracking errors, safety flags and solve-time stats for one run."""
    diff = traj.states[1:] - traj.reference[1:]
    l1 = np.abs(diff).sum(axis=1)
    l2 = np.sqrt((diff**2).sum(axis=1))
    viol = bool(np.any(traj.phi0s[~np.isnan(traj.phi0s)] > 1e-9))
    bad = int((~traj.feasible).sum())
    min_d = math.nan
    if config is not None and config.index is not None:
        dmin_seen = math.inf
        for k in range(traj.horizon + 1):
            spec_k = config.index_at(k)
            for cx, cy in spec_k.centers:
                dmin_seen = min(
                    dmin_seen,
                    math.hypot(traj.states[k, 0] - cx, traj.states[k, 1] - cy),
                )
        min_d = dmin_seen
    return Metrics(
        mean_l1=float(l1.mean()),
        std_l1=float(l1.std()),
        mean_l2=float(l2.mean()),
        std_l2=float(l2.std()),
        success=not viol and bad == 0,
        phi0_violated=viol,
        any_infeasible=bad > 0,
        infeasible_steps=bad,
        min_distance=min_d,
        mean_solve_ms=float(traj.solve_ms.mean()) if traj.horizon else 0.0,
        max_solve_ms=float(traj.solve_ms.max()) if traj.horizon else 0.0,
    )


def aggregate_metrics(batch) -> dict:
    """Success / violation / infeasible rates over a batch of trials."""
    n = len(batch)
    return {
        "trials": n,
        "success_rate": sum(m.success for m in batch) / n,
        "phi0_violation_rate": sum(m.phi0_violated for m in batch) / n,
        "infeasible_rate": sum(m.any_infeasible for m in batch) / n,
        "mean_l1_error": float(np.mean([m.mean_l1 for m in batch])),
        "mean_l2_error": float(np.mean([m.mean_l2 for m in batch])),
        "mean_solve_ms": float(np.mean([m.mean_solve_ms for m in batch])),
    }


# ---------------------------------------------------------------------------
# task construction


def phi0_spec(kind, d_min, d_max=None, obstacles=(), target=None,
              gamma=0.01) -> SafetyIndexSpec:
    """The raw geometric index used directly as the constraint."""
    return SafetyIndexSpec(kind=kind, alpha1=1.0, alpha2=0.0, beta=0.0,
                           gamma=gamma, d_min=d_min, d_max=d_max,
                           obstacles=obstacles, target=target)


def hand_spec(kind, d_min, d_max=None, obstacles=(), target=None) -> SafetyIndexSpec:
    """A plausible manually tuned index (no optimality claim)."""
    if kind == safety.COLLISION:
        return SafetyIndexSpec(kind=kind, alpha1=2.0, alpha2=1.0, beta=0.15,
                               gamma=0.01, d_min=d_min, obstacles=obstacles)
    return SafetyIndexSpec(kind=kind, alpha1=1.0, alpha2=1.0, beta=0.05,
                           gamma=0.05, d_min=d_min, d_max=d_max, target=target)


def _aim_rollout(net, x0, target, v_hold, n_steps, dt, u_box):
    """Roll the network model under a feedback law that holds speed and
    steers through the target point, then straight on. Keeps the path
    dynamically feasible for the model while pinning its geometry."""
    x = np.asarray(x0, dtype=float).copy()
    states = np.empty((n_steps + 1, 4))
    states[0] = x
    passed = False
    for k in range(n_steps):
        to_t = target - x[:2]
        dist = float(np.hypot(*to_t))
        if dist < 0.25:
            passed = True
        if passed:
            omega = 0.0
        else:
            err = math.remainder(math.atan2(to_t[1], to_t[0]) - x[3], math.tau)
            omega = float(np.clip(4.0 * err, u_box.lower[1], u_box.upper[1]))
        a = float(np.clip((v_hold - x[2]) / dt, u_box.lower[0], u_box.upper[0]))
        u = np.array([a, omega])
        x = x + evaluate(net, x, u) * dt
        states[k + 1] = x
    return states


def make_collision_task(net: MlpNetwork, index: SafetyIndexSpec | None, rng,
                        dt=DEFAULT_DT, horizon=200, u_box=DEFAULT_U_BOX,
                        execution="nndm") -> ScenarioConfig:
    """Head-on approach: the reference drives straight through the
    obstacle disc, so a controller constrained by the raw index runs out
    of feasible controls too late to brake."""
    approach = rng.uniform(0.0, 2.0 * math.pi)
    dist = rng.uniform(2.5, 4.0)
    lateral = rng.uniform(-0.3, 0.3)
    v0 = rng.uniform(1.2, 2.0)
    # wrapped so the model is queried inside its training range
    heading = math.remainder(approach + math.pi, math.tau)
    nx, ny = -math.sin(heading), math.cos(heading)
    x0 = np.array([
        math.cos(approach) * dist + nx * lateral,
        math.sin(approach) * dist + ny * lateral,
        v0,
        heading,
    ])
    reference = _aim_rollout(net, x0, np.zeros(2), v0, horizon, dt, u_box)
    return ScenarioConfig(
        task=safety.COLLISION, net=net, reference=reference, dt=dt,
        u_box=u_box, execution=execution, index=index,
    )


def make_following_task(net: MlpNetwork, index: SafetyIndexSpec | None, rng,
                        d_min=1.0, d_max=3.0, dt=DEFAULT_DT, horizon=200,
                        u_box=DEFAULT_U_BOX, execution="nndm") -> ScenarioConfig:
    """Follow a wandering target from inside the allowed distance band.

    The tracking reference rides behind the target at mid-band, so the
    optimizer naturally holds the band and the index handles transients.
    """
    gap = 0.5 * (d_min + d_max)
    t0 = np.array([
        rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
        rng.uniform(0.5, 1.0), rng.uniform(-math.pi, math.pi),
    ])
    target_states = gen_reference(
        analytic_dynamics, t0, horizon, dt,
        Box(np.array([-1.0, -0.6]), np.array([1.0, 0.6])), rng,
        ou_theta=1.5, ou_sigma=(0.6, 0.4), v_limits=(0.3, 1.2),
    )
    heading = target_states[:, 3]
    reference = target_states.copy()
    reference[:, 0] -= gap * np.cos(heading)
    reference[:, 1] -= gap * np.sin(heading)
    start_jitter = rng.uniform(-0.25, 0.25, size=2) * (d_max - d_min)
    x0 = reference[0].copy()
    x0[:2] += start_jitter
    spec = index.with_target(target_states[0, :2]) if index is not None else None
    return ScenarioConfig(
        task=safety.FOLLOWING, net=net, reference=reference, dt=dt,
        u_box=u_box, execution=execution, index=spec,
        target_path=target_states[:, :2], x0=x0,
    )
