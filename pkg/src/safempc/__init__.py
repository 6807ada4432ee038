"""Safe tracking control for feedforward ReLU dynamics models.

The pipeline: learn a network model of the dynamics, propagate interval
bounds through it, encode one-step tracking as a mixed integer program
solved by an in-package branch-and-bound simplex, constrain it with a
safety index whose parameters are synthesized by CMA-ES to eliminate
states where no safe control exists, and validate everything in
closed-loop simulation on a planar unicycle.
"""

from .bounds import Box, BoundsTensor, Status, activation_status, propagate
from .encoder import (
    EncodedStep,
    add_safety_constraint,
    encode_tracking,
    feasibility_check_exact,
    solve_step,
    x_dot_max,
)
from .milp import (
    BINARY,
    CONTINUOUS,
    MilpOptions,
    MilpProblem,
    MilpSolution,
    SolveStatus,
    solve_lp,
    solve_milp,
)
from .mlp import (
    Dataset,
    ForwardTrace,
    MlpNetwork,
    evaluate,
    forward,
    gradient_check,
    init_network,
    lipschitz_upper_bound,
    load_model,
    mse,
    save_model,
    train,
)
from .safety import (
    COLLISION,
    FOLLOWING,
    SafetyIndexSpec,
    constraint_rhs,
    grad_phi,
    phi,
    phi0,
    safety_margin,
)
from .simulate import (
    MilpController,
    ScenarioConfig,
    ShootingController,
    analytic_dynamics,
    compute_metrics,
    gen_dataset,
    gen_reference,
    rollout,
)
from .synthesis import (
    ExactChecker,
    GridChecker,
    SearchSpace,
    certification_margin,
    certify_feasibility,
    cmaes_synthesize,
    count_infeasible,
    phi_lipschitz_estimate,
    sample_states,
    synthesize_index,
)

__version__ = "0.1.0"
