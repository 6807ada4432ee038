"""Safety-index parameter synthesis.

Searches (gamma, alpha1, alpha2, beta) with CMA-ES to minimize the
number of sampled states at which no admissible control satisfies the
safety constraint. A dense enough sample certifies the result for the
whole region: with sample density delta and Lipschitz constants k_f and
k_phi, passing the eps-tightened constraint at every net point, where
eps = k_phi * (k_f + 2) * delta, implies feasibility everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import safety
from .bounds import Box
from .encoder import feasibility_check_exact
from .mlp import MlpNetwork, evaluate
from .safety import SafetyIndexSpec, geometry, per_center_terms, phi

__all__ = [
    "SearchSpace",
    "FeasibilityReport",
    "GridChecker",
    "ExactChecker",
    "sample_states",
    "default_sampling_region",
    "count_infeasible",
    "CmaEs",
    "cmaes_synthesize",
    "synthesize_index",
    "certification_margin",
    "certify_feasibility",
    "phi_lipschitz_estimate",
    "CertificationResult",
    "SynthesisResult",
]

PARAM_ORDER = ("gamma", "alpha1", "alpha2", "beta")


@dataclass(frozen=True)
class SearchSpace:
    """Per-parameter intervals; alpha1 may instead be a discrete set."""

    gamma: tuple
    alpha1: tuple
    alpha2: tuple
    beta: tuple
    alpha1_choices: tuple | None = None

    def __post_init__(self):
        for name in PARAM_ORDER:
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"empty range for {name}")

    @classmethod
    def collision_default(cls, beta_min=0.0) -> "SearchSpace":
        return cls(
            gamma=(0.001, 0.02),
            alpha1=(0.01, 3.0),
            alpha2=(0.0, 10.0),
            beta=(max(0.1, beta_min), 0.5),
        )

    @classmethod
    def following_default(cls, beta_min=0.0) -> "SearchSpace":
        return cls(
            gamma=(0.001, 1.0),
            alpha1=(1.0, 3.0),
            alpha2=(0.0, 10.0),
            beta=(max(0.01, beta_min), 0.5),
            alpha1_choices=(1.0, 3.0),
        )

    def decode(self, genome) -> dict:
        """Map a genome in [0, 1]^4 to parameter values."""
        params = {}
        for g, name in zip(genome, PARAM_ORDER):
            lo, hi = getattr(self, name)
            params[name] = float(lo + np.clip(g, 0.0, 1.0) * (hi - lo))
        if self.alpha1_choices is not None:
            choices = np.asarray(self.alpha1_choices, dtype=float)
            params["alpha1"] = float(
                choices[np.argmin(np.abs(choices - params["alpha1"]))]
            )
        return params


# ---------------------------------------------------------------------------
# state sampling


def sample_states(region: Box, count, rng, exclude=None) -> np.ndarray:
    """Uniform i.i.d. states from the region, optionally rejecting a
    subset (e.g. points essentially on top of the obstacle).

    Deterministic for a given generator state. Raises if the exclusion
    leaves too little of the region to sample from.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    out = np.empty((count, region.dim))
    have = 0
    attempts = 0
    while have < count:
        draw = region.sample(rng, count - have)
        if exclude is not None:
            draw = draw[~np.asarray(exclude(draw), dtype=bool)]
        take = min(len(draw), count - have)
        out[have : have + take] = draw[:take]
        have += take
        attempts += 1
        if attempts > 200 and have == 0:
            raise ValueError("degenerate region: nothing survives the exclusion")
    return out


def default_sampling_region(d_min, v_max=2.0, center=(0.0, 0.0), half_width=5.0):
    """Box around an obstacle plus the exclusion of near-center states.

    Returns (box, exclude) for sample_states: positions within
    half_width of the center, speeds in [0, v_max], all headings,
    excluding points closer than 0.3 * d_min.
    """
    box = Box(
        np.array([center[0] - half_width, center[1] - half_width, 0.0, -math.pi]),
        np.array([center[0] + half_width, center[1] + half_width, v_max, math.pi]),
    )

    def exclude(points):
        d = np.hypot(points[:, 0] - center[0], points[:, 1] - center[1])
        return d < 0.3 * d_min

    return box, exclude


@dataclass
class FeasibilityReport:
    """Per-state feasibility flags over a fixed sample."""

    states: np.ndarray
    feasible: np.ndarray

    @property
    def infeasible_count(self) -> int:
        return int((~self.feasible).sum())

    @property
    def total(self) -> int:
        return int(self.feasible.shape[0])

    def heatmap(self, bins=20, extent=None):
        """Aggregate infeasible counts onto a (p_x, p_y) grid.

        Returns (infeasible counts, sample counts, x edges, y edges).
        """
        px, py = self.states[:, 0], self.states[:, 1]
        if extent is None:
            extent = [[px.min(), px.max()], [py.min(), py.max()]]
        bad = ~self.feasible
        counts, xe, ye = np.histogram2d(px[bad], py[bad], bins=bins, range=extent)
        totals, _, _ = np.histogram2d(px, py, bins=bins, range=extent)
        return counts, totals, xe, ye


# ---------------------------------------------------------------------------
# feasibility checkers


def _control_grid(u_box: Box, resolution) -> np.ndarray:
    axes = [
        np.linspace(u_box.lower[j], u_box.upper[j], resolution)
        for j in range(u_box.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


class GridChecker:
    """Feasibility by enumerating a uniform control grid.

    prepare() precomputes the network derivative at every (state, grid
    control) pair once; each index candidate is then evaluated with a
    single tensor contraction, which is what makes evolutionary search
    over thousands of states practical.
    """

    name = "grid"

    def __init__(self, net: MlpNetwork, u_box: Box, dt, resolution=41,
                 chunk=200_000):
        self.net = net
        self.u_box = u_box
        self.dt = float(dt)
        self.resolution = int(resolution)
        self.controls = _control_grid(u_box, resolution)
        self._chunk = chunk
        self.states = None
        self._xdots = None

    def prepare(self, states) -> "GridChecker":
        states = np.asarray(states, dtype=float)
        if self.states is not None and states is self.states:
            return self
        n = states.shape[0]
        g = self.controls.shape[0]
        xdots = np.empty((n, g, self.net.state_dim))
        rows_per_state = g
        step = max(1, self._chunk // rows_per_state)
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            xs = np.repeat(states[lo:hi], g, axis=0)
            us = np.tile(self.controls, (hi - lo, 1))
            xdots[lo:hi] = evaluate(self.net, xs, us).reshape(hi - lo, g, -1)
        self.states = states
        self._xdots = xdots
        return self

    def _require_prepared(self):
        if self._xdots is None:
            raise RuntimeError("checker not prepared with states")

    def worst_rate_margin(self, spec: SafetyIndexSpec) -> np.ndarray:
        """Per state: min over grid controls of the worst constraint-row
        slack, max_center(grad_phi . xdot - rhs). Nonpositive means some
        grid control satisfies every row."""
        self._require_prepared()
        margins = None
        for phi_c, grad_c in per_center_terms(spec, self.states):
            rhs = np.maximum(-phi_c / self.dt, -spec.gamma)
            rate = np.einsum("sgd,sd->sg", self._xdots, grad_c)
            m = rate - rhs[:, None]
            margins = m if margins is None else np.maximum(margins, m)
        return margins.min(axis=1)

    def feasible_mask(self, spec: SafetyIndexSpec) -> np.ndarray:
        return self.worst_rate_margin(spec) <= 1e-9

    def _next_phi_min(self, spec: SafetyIndexSpec) -> np.ndarray:
        """Per state: min over grid controls of phi at the Euler step."""
        self._require_prepared()
        n, g, d = self._xdots.shape
        out = np.empty(n)
        step = max(1, self._chunk // g)
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            nxt = self.states[lo:hi, None, :] + self.dt * self._xdots[lo:hi]
            vals = phi(spec, nxt.reshape(-1, d)).reshape(hi - lo, g)
            out[lo:hi] = vals.min(axis=1)
        return out

    def tightened_feasible_mask(self, spec, eps) -> np.ndarray:
        """Existence of a grid control passing the eps-tightened check
        phi(x + f dt) <= max(-eps, phi(x) - (gamma + eps) dt)."""
        phis = phi(spec, self.states)
        threshold = np.maximum(-eps, phis - (spec.gamma + eps) * self.dt)
        return self._next_phi_min(spec) <= threshold

    def untightened_feasible_mask(self, spec) -> np.ndarray:
        """Existence of a grid control with phi(x + f dt) <= max(0,
        phi(x) - gamma dt), the plain discrete safety condition."""
        phis = phi(spec, self.states)
        threshold = np.maximum(0.0, phis - spec.gamma * self.dt)
        return self._next_phi_min(spec) <= threshold


class ExactChecker:
    """Feasibility by one zero-objective MILP per state (reference
    semantics; much slower than the grid)."""

    name = "exact"

    def __init__(self, net: MlpNetwork, u_box: Box, dt):
        self.net = net
        self.u_box = u_box
        self.dt = float(dt)
        self.states = None

    def prepare(self, states) -> "ExactChecker":
        self.states = np.asarray(states, dtype=float)
        return self

    def feasible_mask(self, spec: SafetyIndexSpec) -> np.ndarray:
        if self.states is None:
            raise RuntimeError("checker not prepared with states")
        return np.array(
            [
                feasibility_check_exact(self.net, x, spec, self.dt, self.u_box)
                for x in self.states
            ]
        )


def count_infeasible(states, spec: SafetyIndexSpec, checker) -> FeasibilityReport:
    """Flag every sampled state at which the checker finds no admissible
    control satisfying all safety rows."""
    checker.prepare(states)
    return FeasibilityReport(np.asarray(states, dtype=float),
                             checker.feasible_mask(spec))


# ---------------------------------------------------------------------------
# CMA-ES


class CmaEs:
    """(mu/mu_w, lambda) CMA-ES over a box, minimizing.

    Candidates outside the box are resampled up to 100 times, then
    clipped. Covariance loss of positive definiteness triggers a restart
    with an inflated step size (kept rare by the tiny dimension).
    """

    def __init__(self, x0, sigma0, lower, upper, population=None, seed=0):
        self.n = len(x0)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.rng = np.random.default_rng(seed)
        self.lam = population or 4 + int(3 * math.log(self.n))
        self.mu = self.lam // 2
        w = np.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)
        n, mueff = self.n, self.mueff
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
        self.mean = np.asarray(x0, dtype=float).copy()
        self.sigma = float(sigma0)
        self.cov = np.eye(n)
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.generation = 0
        self.best_x = None
        self.best_f = math.inf

    def _decompose(self):
        try:
            vals, vecs = np.linalg.eigh(0.5 * (self.cov + self.cov.T))
        except np.linalg.LinAlgError:
            vals = np.array([-1.0])
            vecs = None
        if vecs is None or np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            warnings.warn("covariance lost positive definiteness; restarting "
                          "with inflated step size")
            self.cov = np.eye(self.n)
            self.pc[:] = 0.0
            self.ps[:] = 0.0
            self.sigma *= 2.0
            vals, vecs = np.linalg.eigh(self.cov)
        return np.sqrt(vals), vecs

    def ask(self) -> np.ndarray:
        sqrt_vals, vecs = self._decompose()
        self._sqrt_vals, self._vecs = sqrt_vals, vecs
        xs = np.empty((self.lam, self.n))
        for k in range(self.lam):
            for _ in range(100):
                z = self.rng.standard_normal(self.n)
                x = self.mean + self.sigma * (vecs @ (sqrt_vals * z))
                if np.all(x >= self.lower) and np.all(x <= self.upper):
                    break
            xs[k] = np.clip(x, self.lower, self.upper)
        return xs

    def tell(self, xs, fs) -> None:
        order = np.argsort(fs, kind="stable")
        xs = np.asarray(xs)[order]
        fs = np.asarray(fs)[order]
        if fs[0] < self.best_f:
            self.best_f = float(fs[0])
            self.best_x = xs[0].copy()
        old_mean = self.mean
        self.mean = self.weights @ xs[: self.mu]
        y = (self.mean - old_mean) / self.sigma

        inv_sqrt = self._vecs @ np.diag(1.0 / self._sqrt_vals) @ self._vecs.T
        self.ps = (1 - self.cs) * self.ps + math.sqrt(
            self.cs * (2 - self.cs) * self.mueff
        ) * (inv_sqrt @ y)
        self.generation += 1
        expected = math.sqrt(
            1 - (1 - self.cs) ** (2 * self.generation)
        ) * self.chi_n
        hsig = np.linalg.norm(self.ps) / expected < 1.4 + 2 / (self.n + 1)
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(
            self.cc * (2 - self.cc) * self.mueff
        ) * y

        artmp = (xs[: self.mu] - old_mean) / self.sigma
        rank_mu = (self.weights[:, None] * artmp).T @ artmp
        c1a = self.c1 * (1 - (1 - hsig**2) * self.cc * (2 - self.cc))
        self.cov = (
            (1 - c1a - self.cmu) * self.cov
            + self.c1 * np.outer(self.pc, self.pc)
            + self.cmu * rank_mu
        )
        self.sigma *= math.exp(
            (self.cs / self.damps) * (np.linalg.norm(self.ps) / self.chi_n - 1)
        )


def cmaes_synthesize(space: SearchSpace, fitness, population=12, generations=30,
                     seed=0, sigma0=0.3):
    """Minimize fitness(params) over the search space with CMA-ES.

    The genome lives in [0, 1]^4 and is decoded through the space
    (including rounding of discrete alpha1 choices). Returns
    (best params, per-generation history).
    """
    es = CmaEs(
        x0=np.full(len(PARAM_ORDER), 0.5),
        sigma0=sigma0,
        lower=np.zeros(len(PARAM_ORDER)),
        upper=np.ones(len(PARAM_ORDER)),
        population=population,
        seed=seed,
    )
    history = []
    for gen in range(generations):
        xs = es.ask()
        fs = [fitness(space.decode(g)) for g in xs]
        es.tell(xs, fs)
        history.append(
            {
                "generation": gen,
                "best": float(min(fs)),
                "mean": float(np.mean(fs)),
                "best_ever": float(es.best_f),
            }
        )
    return space.decode(es.best_x), history


@dataclass
class SynthesisResult:
    spec: SafetyIndexSpec
    best_fitness: float
    infeasible_count: int
    history: list
    seed: int
    checker_name: str

    def to_doc(self) -> dict:
        return {
            "kind": self.spec.kind,
            "params": self.spec.params(),
            "fitness_history": self.history,
            "seed": self.seed,
            "checker": self.checker_name,
        }


def synthesize_index(kind, checker, states, space: SearchSpace, d_min,
                     d_max=None, obstacles=(), target=None, beta_min=0.0,
                     population=12, generations=30, seed=0) -> SynthesisResult:
    """Search index parameters minimizing the infeasible-state count.

    Ties between equal counts prefer smaller beta, then smaller alpha2
    (less conservative indices), applied as small fitness increments.
    """
    checker.prepare(states)

    def build(params) -> SafetyIndexSpec:
        return SafetyIndexSpec(
            kind=kind,
            alpha1=params["alpha1"],
            alpha2=params["alpha2"],
            beta=params["beta"],
            gamma=params["gamma"],
            d_min=d_min,
            d_max=d_max,
            obstacles=obstacles,
            target=target,
            beta_min=beta_min,
        )

    def fitness(params) -> float:
        spec = build(params)
        bad = int((~checker.feasible_mask(spec)).sum())
        return bad + 1e-4 * params["beta"] + 1e-8 * params["alpha2"]

    best, history = cmaes_synthesize(
        space, fitness, population=population, generations=generations, seed=seed
    )
    spec = build(best)
    count = int((~checker.feasible_mask(spec)).sum())
    return SynthesisResult(
        spec=spec,
        best_fitness=count + 1e-4 * best["beta"] + 1e-8 * best["alpha2"],
        infeasible_count=count,
        history=history,
        seed=seed,
        checker_name=checker.name,
    )


# ---------------------------------------------------------------------------
# certification


class NetBudgetError(ValueError):
    """The delta-net needs more points than the configured budget."""

    def __init__(self, required, budget):
        super().__init__(f"delta-net needs {required} points, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass
class CertificationResult:
    certified: bool
    eps: float
    delta: float
    net_points: int
    witnesses: np.ndarray


def certification_margin(k_f, k_phi, delta) -> float:
    """Constraint tightening eps = k_phi * (k_f + 2) * delta."""
    if min(k_f, k_phi, delta) < 0:
        raise ValueError("all inputs must be nonnegative")
    return k_phi * (k_f + 2.0) * delta


def certify_feasibility(spec: SafetyIndexSpec, region: Box, delta, k_f, k_phi,
                        checker: GridChecker, budget=10_000) -> CertificationResult:
    """Check the eps-tightened constraint on a delta-net of the region.

    Grid spacing is at most 2*delta/sqrt(dim) per dimension so every
    region point lies within delta of a net point; all net points
    passing therefore implies every state in the region admits a control
    satisfying the plain constraint.
    """
    if not isinstance(checker, GridChecker):
        raise ValueError("certification needs a grid checker: the tightened "
                         "check evaluates phi at stepped states, which the "
                         "exact MILP checker cannot express")
    spacing = 2.0 * delta / math.sqrt(region.dim)
    axes = []
    required = 1
    for j in range(region.dim):
        w = region.width[j]
        pts = max(2, int(math.ceil(w / spacing)) + 1) if w > 0 else 1
        required *= pts
        axes.append(np.linspace(region.lower[j], region.upper[j], pts))
    if required > budget:
        raise NetBudgetError(required, budget)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.reshape(-1) for m in mesh], axis=1)
    eps = certification_margin(k_f, k_phi, delta)
    checker.prepare(points)
    ok = checker.tightened_feasible_mask(spec, eps)
    return CertificationResult(
        certified=bool(ok.all()),
        eps=eps,
        delta=float(delta),
        net_points=points.shape[0],
        witnesses=points[~ok],
    )


def phi_lipschitz_estimate(spec: SafetyIndexSpec, region: Box, samples=4096,
                           seed=0, d_floor=None) -> float:
    """1.5 times the largest sampled gradient norm over the region.

    A documented estimate, not a proof; the region must stay away from
    the distance singularity at each center.
    """
    if d_floor is None:
        d_floor = 0.05 * spec.d_min
    for cx, cy in spec.centers:
        # distance from the center to the region's position rectangle
        gx = max(region.lower[0] - cx, 0.0, cx - region.upper[0])
        gy = max(region.lower[1] - cy, 0.0, cy - region.upper[1])
        if math.hypot(gx, gy) < d_floor:
            raise ValueError("region comes too close to a center point")
    rng = np.random.default_rng(seed)
    pts = region.sample(rng, samples)
    worst = 0.0
    for _, grads in per_center_terms(spec, pts):
        worst = max(worst, float(np.linalg.norm(grads, axis=1).max()))
    return 1.5 * worst
