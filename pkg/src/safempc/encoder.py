"""One-step tracking control as a mixed integer program.

The network constraint xdot = f(x_k, u_k) is encoded exactly: stable
ReLUs (decided by interval bounds) become equality or zero rows, each
unstable ReLU gets one binary indicator with node-specific big-M
inequalities, and the l1 tracking objective is linearized with one
auxiliary variable per state. Decoded solutions are checked against a
plain forward pass, so an encoding defect can never pass silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import safety
from .bounds import Box, BoundsTensor, Status, activation_status, propagate
from .milp import (
    BINARY,
    MilpOptions,
    MilpProblem,
    MilpSolution,
    SolveStatus,
    solve_milp,
)
from .mlp import DimensionError, MlpNetwork, forward

__all__ = [
    "EncodedStep",
    "StepResult",
    "EncodingError",
    "SolverFailure",
    "encode_tracking",
    "add_safety_constraint",
    "solve_step",
    "x_dot_max",
    "feasibility_check_exact",
]


class EncodingError(RuntimeError):
    """Decoded solution disagrees with a direct forward pass."""


class SolverFailure(RuntimeError):
    """The MILP solver gave up (numerical breakdown, not infeasibility)."""


@dataclass
class EncodedStep:
    """A built problem plus the variable maps needed to decode it."""

    problem: MilpProblem
    net: MlpNetwork
    x_k: np.ndarray
    x_ref: np.ndarray
    dt: float
    u_box: Box
    statuses: tuple
    u_vars: np.ndarray
    z_vars: list  # per hidden layer: var index per node, -1 for fixed-zero
    zhat_vars: list  # per hidden layer: {node: var index}, unstable only
    delta_vars: list  # per hidden layer: {node: var index}, unstable only
    out_vars: np.ndarray
    x_next_vars: np.ndarray
    t_vars: np.ndarray
    safety_rows: list

    def unstable_count(self) -> int:
        return sum(len(d) for d in self.delta_vars)


@dataclass
class StepResult:
    status: SolveStatus
    u: np.ndarray | None
    x_next: np.ndarray | None
    objective: float | None
    milp: MilpSolution


def _encode_network(problem, net, input_entries, bt, statuses, prefix=""):
    """Add the network body to a problem.

    input_entries: one ('var', idx) or ('const', value) per input entry.
    Returns (z var map per hidden layer, zhat maps, delta maps, output
    variable indices).
    """
    prev = list(input_entries)
    z_vars, zhat_vars, delta_vars = [], [], []
    last = net.layer_count - 1

    def affine_row(target_idx, w_row, bias):
        # target - sum(w * prev_vars) = bias + sum(w * prev_consts)
        coeffs = [(target_idx, 1.0)]
        rhs = bias
        for wkj, entry in zip(w_row, prev):
            if wkj == 0.0:
                continue
            tag, payload = entry
            if tag == "var":
                coeffs.append((payload, -wkj))
            else:
                rhs += wkj * payload
        problem.add_constraint(coeffs, "=", rhs)

    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        width = w.shape[0]
        if i == last:
            out = np.empty(width, dtype=int)
            for j in range(width):
                # equality-pinned, so no upper bound row is needed
                out[j] = problem.add_variable(
                    f"{prefix}out{j}", bt.pre_lower[i][j], math.inf
                )
                affine_row(out[j], w[j], b[j])
            prev = [("var", int(v)) for v in out]
            break

        st = statuses[i]
        zl = np.empty(width, dtype=int)
        zl.fill(-1)
        zh, dl = {}, {}
        for j in range(width):
            lo_hat = bt.pre_lower[i][j]
            up_hat = bt.pre_upper[i][j]
            if st[j] == Status.INACTIVE:
                continue  # z is identically zero over the box
            if st[j] == Status.ACTIVE:
                # equality-pinned, upper bound left open to save a row
                zl[j] = problem.add_variable(
                    f"{prefix}z{i}_{j}", bt.post_lower[i][j], math.inf
                )
                affine_row(zl[j], w[j], b[j])
                continue
            # unstable: zhat free in its interval, z = max(zhat, 0) via
            # the four indicator inequalities (z <= u*delta already caps z)
            zhat = problem.add_variable(f"{prefix}zh{i}_{j}", lo_hat, math.inf)
            affine_row(zhat, w[j], b[j])
            z = problem.add_variable(f"{prefix}z{i}_{j}", 0.0, math.inf)
            delta = problem.add_variable(f"{prefix}d{i}_{j}", kind=BINARY)
            problem.add_constraint([(z, 1.0), (zhat, -1.0)], ">=", 0.0)
            problem.add_constraint(
                [(z, 1.0), (zhat, -1.0), (delta, -lo_hat)], "<=", -lo_hat
            )
            problem.add_constraint([(z, 1.0), (delta, -up_hat)], "<=", 0.0)
            zl[j] = z
            zh[j] = zhat
            dl[j] = delta
        z_vars.append(zl)
        zhat_vars.append(zh)
        delta_vars.append(dl)
        prev = [("var", int(v)) if v >= 0 else ("const", 0.0) for v in zl]

    return z_vars, zhat_vars, delta_vars, out


def _validate_bounds_shape(net, bt):
    if bt.layer_count != net.layer_count:
        raise DimensionError("bounds tensor has wrong layer count")
    for i, w in enumerate(net.weights):
        if bt.pre_lower[i].shape[0] != w.shape[0]:
            raise DimensionError(f"bounds tensor layer {i} has wrong width")


def encode_tracking(net, x_k, x_ref, dt, u_box: Box, bt: BoundsTensor) -> EncodedStep:
    """Build the one-step problem: minimize |x_next - x_ref|_1 subject to
    the network dynamics, x_next = x_k + xdot * dt and u in its box.

    The bounds tensor must come from the input box [x_k, x_k] x U so the
    per-node constants are sound for this state.
    """
    x_k = np.asarray(x_k, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    if x_k.shape != (net.state_dim,) or x_ref.shape != (net.state_dim,):
        raise DimensionError("state or reference has the wrong dimension")
    if u_box.dim != net.control_dim:
        raise DimensionError("control box has the wrong dimension")
    if dt <= 0:
        raise ValueError("dt must be positive")
    _validate_bounds_shape(net, bt)

    problem = MilpProblem()
    u_vars = np.array(
        [
            problem.add_variable(f"u{j}", u_box.lower[j], u_box.upper[j])
            for j in range(net.control_dim)
        ]
    )
    entries = [("const", float(v)) for v in x_k]
    entries += [("var", int(v)) for v in u_vars]
    statuses = activation_status(bt)
    z_vars, zhat_vars, delta_vars, out = _encode_network(
        problem, net, entries, bt, statuses
    )

    x_next = np.empty(net.state_dim, dtype=int)
    t_vars = np.empty(net.state_dim, dtype=int)
    for i in range(net.state_dim):
        lo = x_k[i] + dt * bt.output_lower[i]
        hi = x_k[i] + dt * bt.output_upper[i]
        x_next[i] = problem.add_variable(f"xn{i}", lo, hi)
        problem.add_constraint([(x_next[i], 1.0), (out[i], -dt)], "=", x_k[i])
        t_vars[i] = problem.add_variable(f"t{i}", 0.0, math.inf)
        problem.add_constraint([(t_vars[i], 1.0), (x_next[i], -1.0)], ">=", -x_ref[i])
        problem.add_constraint([(t_vars[i], 1.0), (x_next[i], 1.0)], ">=", x_ref[i])
    problem.set_objective([(int(t), 1.0) for t in t_vars])

    return EncodedStep(
        problem=problem,
        net=net,
        x_k=x_k,
        x_ref=x_ref,
        dt=dt,
        u_box=u_box,
        statuses=statuses,
        u_vars=u_vars,
        z_vars=z_vars,
        zhat_vars=zhat_vars,
        delta_vars=delta_vars,
        out_vars=out,
        x_next_vars=x_next,
        t_vars=t_vars,
        safety_rows=[],
    )


def add_safety_constraint(step: EncodedStep, grad_phi, phi_at_xk, gamma, dt) -> EncodedStep:
    """Append one linear row grad_phi . xdot <= max(-phi/dt, -gamma)."""
    grad_phi = np.asarray(grad_phi, dtype=float)
    if grad_phi.shape != (step.net.state_dim,):
        raise DimensionError("gradient has the wrong dimension")
    if not np.isfinite(grad_phi).all():
        raise ValueError("gradient has non-finite entries")
    rhs = safety.constraint_rhs(phi_at_xk, gamma, dt)
    coeffs = [(int(v), float(g)) for v, g in zip(step.out_vars, grad_phi) if g != 0.0]
    if not coeffs:
        # gradient identically zero: the row degenerates to 0 <= rhs
        coeffs = [(int(step.out_vars[0]), 0.0)]
    row = step.problem.add_constraint(coeffs, "<=", rhs)
    step.safety_rows.append(row)
    return step


def _decode_z(step: EncodedStep, x):
    layers = []
    for zl in step.z_vars:
        vals = np.zeros(zl.shape[0])
        mask = zl >= 0
        vals[mask] = x[zl[mask]]
        layers.append(vals)
    return layers


def solve_step(step: EncodedStep, options: MilpOptions | None = None,
               self_check: bool = True) -> StepResult:
    """Solve an encoded step and decode (u*, x_next*).

    With self_check on, the decoded hidden activations and next state
    are compared to a direct forward pass at u*; disagreement beyond
    1e-6 raises EncodingError instead of returning a wrong answer.
    """
    sol = solve_milp(step.problem, options)
    if sol.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
        return StepResult(sol.status, None, None, None, sol)
    if sol.x is None:
        raise SolverFailure(f"solver returned {sol.status.value} with no incumbent")

    u = sol.x[step.u_vars]
    x_next = sol.x[step.x_next_vars]
    if self_check:
        xdot, trace = forward(step.net, step.x_k, u)
        expect = step.x_k + step.dt * xdot
        if np.max(np.abs(expect - x_next)) > 1e-6:
            raise EncodingError("decoded next state disagrees with forward pass")
        for vals, truth in zip(_decode_z(step, sol.x), trace.post):
            if np.max(np.abs(vals - truth)) > 1e-6:
                raise EncodingError("decoded activations disagree with forward pass")
    return StepResult(sol.status, u, x_next, sol.objective, sol)


def x_dot_max(net: MlpNetwork, state_box: Box, control_box: Box,
              node_limit: int | None = None) -> float:
    """Sound upper bound on max |xdot|_inf over the state and control boxes.

    Solves one MILP per output coordinate and sign. With a node limit
    the branch-and-bound best bound is used, which stays a valid upper
    bound when stopped early.
    """
    if state_box.dim != net.state_dim or control_box.dim != net.control_dim:
        raise DimensionError("box dimensions do not match the network")
    bt = propagate(net, state_box.concat(control_box))
    statuses = activation_status(bt)
    best = 0.0
    opts = MilpOptions(node_limit=node_limit)
    for coord in range(net.state_dim):
        for sign in (1.0, -1.0):
            problem = MilpProblem()
            entries = []
            for j in range(net.state_dim):
                idx = problem.add_variable(
                    f"x{j}", state_box.lower[j], state_box.upper[j]
                )
                entries.append(("var", idx))
            for j in range(net.control_dim):
                idx = problem.add_variable(
                    f"u{j}", control_box.lower[j], control_box.upper[j]
                )
                entries.append(("var", idx))
            _, _, _, out = _encode_network(problem, net, entries, bt, statuses)
            problem.set_objective([(int(out[coord]), -sign)])
            sol = solve_milp(problem, opts)
            if sol.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED,
                              SolveStatus.NUMERICAL_FAILURE):
                raise SolverFailure(f"derivative bound solve: {sol.status.value}")
            best = max(best, -sol.best_bound)
    return best


def feasibility_check_exact(net: MlpNetwork, x, spec, dt, u_box: Box,
                            options: MilpOptions | None = None) -> bool:
    """True iff some u in the box satisfies every linearized safety row.

    Solved exactly as a zero-objective MILP over the network encoding;
    this is the reference checker the sampled grid checker is validated
    against.
    """
    x = np.asarray(x, dtype=float)
    bt = propagate(net, Box(x, x).concat(u_box))
    step = encode_tracking(net, x, x, dt, u_box, bt)
    for phi_val, grad in safety.constraint_terms(spec, x):
        add_safety_constraint(step, grad, phi_val, spec.gamma, dt)
    result = solve_step(step, options, self_check=False)
    if result.status == SolveStatus.INFEASIBLE:
        return False
    if result.status in (SolveStatus.OPTIMAL, SolveStatus.GAP_LIMIT):
        return True
    raise SolverFailure(f"feasibility solve returned {result.status.value}")
