"""Mixed integer linear programming, self-contained.

LP relaxations are solved by a two-phase primal simplex on a dense
tableau; integrality is handled by best-first branch and bound over the
binary variables. Sized for desk-scale problems (a few hundred
variables), which is all the one-step control encodings need.

Determinism: for a fixed problem and options the pivot sequence, node
order, node count and solution are all reproducible.
"""

from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "CONTINUOUS",
    "BINARY",
    "SolveStatus",
    "MilpProblem",
    "MilpOptions",
    "MilpSolution",
    "LpResult",
    "solve_lp",
    "solve_milp",
]

CONTINUOUS = "continuous"
BINARY = "binary"

FEAS_TOL = 1e-7  # constraint satisfaction
PIVOT_TOL = 1e-9  # smallest usable pivot element
COST_TOL = 1e-9  # reduced-cost optimality threshold
INT_TOL = 1e-6  # integrality of binaries

_SENSES = ("<=", "=", ">=")


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    GAP_LIMIT = "GapLimit"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class _Variable:
    name: str
    lower: float
    upper: float
    kind: str


class MilpProblem:
    """Linear objective (minimized), linear rows, continuous + binary vars."""

    SENSE_CODE = {"<=": -1, "=": 0, ">=": 1}

    def __init__(self):
        self._vars: list[_Variable] = []
        self._rows: list[tuple[np.ndarray, np.ndarray, str, float]] = []
        self._obj: dict[int, float] = {}
        self._dense = None

    # -- construction ---------------------------------------------------

    def add_variable(self, name=None, lower=-math.inf, upper=math.inf,
                     kind=CONTINUOUS) -> int:
        idx = len(self._vars)
        if name is None:
            name = f"x{idx}"
        if kind not in (CONTINUOUS, BINARY):
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind == BINARY:
            lower = 0.0 if lower == -math.inf else float(lower)
            upper = 1.0 if upper == math.inf else float(upper)
            if lower < -INT_TOL or upper > 1.0 + INT_TOL:
                raise ValueError(f"binary {name} must have bounds within [0, 1]")
        if lower > upper:
            raise ValueError(f"variable {name}: lower {lower} > upper {upper}")
        self._vars.append(_Variable(name, float(lower), float(upper), kind))
        return idx

    def add_constraint(self, coeffs, sense, rhs) -> int:
        if sense not in _SENSES:
            raise ValueError(f"sense must be one of {_SENSES}, got {sense!r}")
        if not math.isfinite(rhs):
            raise ValueError("constraint rhs must be finite")
        if isinstance(coeffs, dict):
            coeffs = list(coeffs.items())
        idx = np.array([int(j) for j, _ in coeffs], dtype=int)
        val = np.array([float(a) for _, a in coeffs], dtype=float)
        if idx.size and (idx.min() < 0 or idx.max() >= len(self._vars)):
            raise ValueError("constraint references an undeclared variable")
        if not np.isfinite(val).all():
            raise ValueError("constraint has a non-finite coefficient")
        self._rows.append((idx, val, sense, float(rhs)))
        self._dense = None
        return len(self._rows) - 1

    def set_objective(self, coeffs) -> None:
        if isinstance(coeffs, dict):
            coeffs = list(coeffs.items())
        obj = {}
        for j, a in coeffs:
            j = int(j)
            if j < 0 or j >= len(self._vars):
                raise ValueError("objective references an undeclared variable")
            obj[j] = obj.get(j, 0.0) + float(a)
        self._obj = obj

    # -- introspection ---------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self._vars)

    @property
    def num_constraints(self) -> int:
        return len(self._rows)

    def variable_name(self, j) -> str:
        return self._vars[j].name

    def binary_indices(self) -> list:
        return [j for j, v in enumerate(self._vars) if v.kind == BINARY]

    def bounds_arrays(self):
        lo = np.array([v.lower for v in self._vars])
        up = np.array([v.upper for v in self._vars])
        return lo, up

    def objective_array(self) -> np.ndarray:
        c = np.zeros(len(self._vars))
        for j, a in self._obj.items():
            c[j] = a
        return c

    def objective_value(self, x) -> float:
        return float(sum(a * x[j] for j, a in self._obj.items()))

    def dense_rows(self):
        """(A, sense codes, b) with duplicate coefficients merged; cached."""
        if self._dense is None:
            m, n = len(self._rows), len(self._vars)
            A = np.zeros((m, n))
            b = np.empty(m)
            codes = np.empty(m, dtype=np.int8)
            for r, (idx, val, sense, rhs) in enumerate(self._rows):
                np.add.at(A[r], idx, val)
                b[r] = rhs
                codes[r] = self.SENSE_CODE[sense]
            self._dense = (A, codes, b)
        return self._dense

    def row_violation(self, x) -> float:
        """Largest constraint violation of an assignment (0 if feasible)."""
        worst = 0.0
        for idx, val, sense, rhs in self._rows:
            lhs = float(val @ x[idx]) if idx.size else 0.0
            if sense == "<=":
                worst = max(worst, lhs - rhs)
            elif sense == ">=":
                worst = max(worst, rhs - lhs)
            else:
                worst = max(worst, abs(lhs - rhs))
        return worst

    def to_lp_text(self) -> str:
        """Readable dump of the problem, for diffing against other solvers."""

        def term(a, name, first):
            sign = "-" if a < 0 else ("" if first else "+")
            return f"{sign} {abs(a):.12g} {name}".strip()

        lines = ["minimize"]
        if self._obj:
            parts = [
                term(a, self._vars[j].name, i == 0)
                for i, (j, a) in enumerate(sorted(self._obj.items()))
            ]
            lines.append("  " + " ".join(parts))
        else:
            lines.append("  0")
        lines.append("subject to")
        for r, (idx, val, sense, rhs) in enumerate(self._rows):
            order = np.argsort(idx)
            parts = [
                term(val[k], self._vars[idx[k]].name, i == 0)
                for i, k in enumerate(order)
            ]
            lines.append(f"  r{r}: {' '.join(parts) if parts else '0'} {sense} {rhs:.12g}")
        lines.append("bounds")
        for v in self._vars:
            tag = " [binary]" if v.kind == BINARY else ""
            if v.lower == -math.inf and v.upper == math.inf:
                lines.append(f"  {v.name} free{tag}")
            else:
                lines.append(f"  {v.lower:.12g} <= {v.name} <= {v.upper:.12g}{tag}")
        return "\n".join(lines) + "\n"


@dataclass
class LpResult:
    status: SolveStatus
    x: np.ndarray | None = None
    objective: float | None = None


@dataclass
class MilpOptions:
    gap_abs: float = 1e-9
    gap_rel: float = 1e-9
    node_limit: int | None = None
    time_limit: float | None = None
    on_incumbent: object = None  # callback(x, objective, bound, nodes)


@dataclass
class MilpSolution:
    status: SolveStatus
    x: np.ndarray | None
    objective: float | None
    best_bound: float
    gap: float
    nodes: int


# ---------------------------------------------------------------------------
# simplex core


class _Stalled(Exception):
    pass


@njit(cache=True)
def _pivot_kernel(T, basis, r, i, j):
    m, width = T.shape
    piv = T[i, j]
    for col in range(width):
        T[i, col] /= piv
    for k in range(m):
        f = T[k, j]
        if k != i and f != 0.0:
            for col in range(width):
                T[k, col] -= f * T[i, col]
    for k in range(m):
        T[k, j] = 0.0
    T[i, j] = 1.0
    f = r[j]
    if f != 0.0:
        for col in range(width):
            r[col] -= f * T[i, col]
    r[j] = 0.0
    basis[i] = j


def _pivot(T, basis, r, i, j):
    if r is None:
        r = np.zeros(T.shape[1])
    _pivot_kernel(T, basis, r, i, j)


def _rebuild_costrow(T, basis, cost_ext):
    r = np.concatenate([cost_ext, [0.0]])
    cb = cost_ext[basis]
    nz = np.nonzero(cb)[0]
    for i in nz:
        r -= cb[i] * T[i]
    return r


@njit(cache=True)
def _rebuild_costrow_kernel(T, basis, cost_eff, r):
    m, width = T.shape
    for col in range(width - 1):
        r[col] = cost_eff[col]
    r[width - 1] = 0.0
    for i in range(m):
        cb = cost_eff[basis[i]]
        if cb != 0.0:
            for col in range(width):
                r[col] -= cb * T[i, col]


@njit(cache=True)
def _flip_kernel(T, r, cost_eff, ubs, flipped, j):
    # complement variable j: x := ub - x; every nonbasic stays at zero
    m = T.shape[0]
    ub = ubs[j]
    for k in range(m):
        T[k, -1] -= T[k, j] * ub
        T[k, j] = -T[k, j]
    r[j] = -r[j]
    cost_eff[j] = -cost_eff[j]
    flipped[j] = not flipped[j]


@njit(cache=True)
def _pivot_loop_kernel(T, basis, r, allowed, cost_eff, ubs, flipped):
    """Bounded-variable simplex pivots until optimal/unbounded/stall.

    Upper bounds are handled by bound flips instead of extra rows: an
    entering variable may stop at its own bound (column complemented in
    place), and a basic variable may leave at its upper bound (row
    complemented before the pivot). Dantzig's rule switches to Bland's
    after 5*(rows+cols) pivots to break cycling. Returns 0 optimal,
    1 unbounded, 2 stalled.
    """
    m, width = T.shape
    ncols = width - 1
    bland_after = 5 * (m + ncols)
    hard_cap = 200 * (m + ncols) + 10_000
    pivots = 0
    while True:
        # entering column
        j = -1
        if pivots < bland_after:
            best = -COST_TOL
            for col in range(ncols):
                if allowed[col] and r[col] < best:
                    best = r[col]
                    j = col
        else:
            for col in range(ncols):
                if allowed[col] and r[col] < -COST_TOL:
                    j = col
                    break
        if j < 0:
            return 0

        t_dec = np.inf
        t_inc = np.inf
        for k in range(m):
            a = T[k, j]
            if a > PIVOT_TOL:
                ratio = T[k, -1] / a
                if ratio < 0.0:
                    ratio = 0.0
                if ratio < t_dec:
                    t_dec = ratio
            elif a < -PIVOT_TOL:
                ub_b = ubs[basis[k]]
                if np.isfinite(ub_b):
                    ratio = (ub_b - T[k, -1]) / (-a)
                    if ratio < 0.0:
                        ratio = 0.0
                    if ratio < t_inc:
                        t_inc = ratio
        t_own = ubs[j]
        t_star = min(t_dec, min(t_inc, t_own))
        if not np.isfinite(t_star):
            return 1

        if t_own <= t_star * (1.0 + 1e-12):
            _flip_kernel(T, r, cost_eff, ubs, flipped, j)
            pivots += 1
        else:
            band = t_star + 1e-12 * (1.0 + abs(t_star))
            i = -1
            if t_dec <= band:
                if pivots < bland_after:  # strongest pivot among ties
                    best_piv = 0.0
                    for k in range(m):
                        a = T[k, j]
                        if a > PIVOT_TOL:
                            ratio = max(T[k, -1] / a, 0.0)
                            if ratio <= band and a > best_piv:
                                best_piv = a
                                i = k
                else:  # Bland: smallest basic variable index among ties
                    best_idx = 2 * ncols
                    for k in range(m):
                        a = T[k, j]
                        if a > PIVOT_TOL:
                            ratio = max(T[k, -1] / a, 0.0)
                            if ratio <= band and basis[k] < best_idx:
                                best_idx = basis[k]
                                i = k
            else:
                if pivots < bland_after:
                    best_piv = 0.0
                    for k in range(m):
                        a = T[k, j]
                        if a < -PIVOT_TOL and np.isfinite(ubs[basis[k]]):
                            ratio = max((ubs[basis[k]] - T[k, -1]) / (-a), 0.0)
                            if ratio <= band and -a > best_piv:
                                best_piv = -a
                                i = k
                else:
                    best_idx = 2 * ncols
                    for k in range(m):
                        a = T[k, j]
                        if a < -PIVOT_TOL and np.isfinite(ubs[basis[k]]):
                            ratio = max((ubs[basis[k]] - T[k, -1]) / (-a), 0.0)
                            if ratio <= band and basis[k] < best_idx:
                                best_idx = basis[k]
                                i = k
                # leaving variable exits at its upper bound: complement it,
                # renormalize its row, then pivot as usual
                k2 = basis[i]
                _flip_kernel(T, r, cost_eff, ubs, flipped, k2)
                for col in range(width):
                    T[i, col] = -T[i, col]
            _pivot_kernel(T, basis, r, i, j)
            pivots += 1
        if pivots % 500 == 0:
            _rebuild_costrow_kernel(T, basis, cost_eff, r)
        if pivots > hard_cap:
            return 2


def _pivot_loop(T, basis, r, allowed, cost_eff, ubs, flipped):
    code = _pivot_loop_kernel(T, basis, r, allowed, cost_eff, ubs, flipped)
    if code == 2:
        raise _Stalled
    return "unbounded" if code == 1 else "optimal"


def _solve_lp_arrays(rows, n, lower, upper, c):
    """Two-phase simplex over original-variable bounds.

    rows: (dense A, sense array, rhs array) triple. Upper bounds ride
    along as column bounds for the bounded-variable pivots instead of
    extra constraint rows. Returns LpResult in original variable space.
    """
    if np.any(lower > upper + 1e-15):
        return LpResult(SolveStatus.INFEASIBLE)
    A_full, senses_full, b_full = rows
    m = A_full.shape[0]

    # transform every variable to x' in [0, span]:
    #   finite lower  -> x = lower + x'
    #   upper only    -> x = upper - x'   (negated column)
    #   free          -> x = x'+ - x'-    (extra column)
    finite_lo = lower > -math.inf
    finite_up = upper < math.inf
    fixed = lower == upper
    offset = np.where(finite_lo, lower, np.where(finite_up, upper, 0.0))
    offset[~(finite_lo | finite_up)] = 0.0

    keep = np.nonzero(~fixed)[0]
    sign = np.where(finite_lo[keep], 1.0, -1.0)
    sign[~(finite_lo | finite_up)[keep]] = 1.0
    span = np.full(keep.size, math.inf)
    both = (finite_lo & finite_up)[keep]
    span[both] = (upper - lower)[keep][both]

    A = A_full[:, keep] * sign
    b = b_full - A_full @ offset
    free = np.nonzero((~finite_lo & ~finite_up)[keep])[0]
    if free.size:  # mirror column for each free variable
        A = np.hstack([A, -A[:, free]])
        span = np.concatenate([span, np.full(free.size, math.inf)])
    ncols = A.shape[1]

    neg = b < 0
    sense_codes = senses_full.copy()  # -1: <=, 0: =, 1: >=
    if neg.any():
        A[neg] *= -1.0
        b[neg] *= -1.0
        sense_codes[neg] *= -1

    n_slack = int(np.sum(sense_codes != 0))
    n_art = int(np.sum(sense_codes != -1))
    total = ncols + n_slack + n_art
    T = np.zeros((m, total + 1))
    T[:, :ncols] = A
    T[:, -1] = b
    basis = np.empty(m, dtype=int)
    art_cols = []
    sl = ncols
    ar = ncols + n_slack
    for r in range(m):
        s = sense_codes[r]
        if s == -1:
            T[r, sl] = 1.0
            basis[r] = sl
            sl += 1
        else:
            if s == 1:
                T[r, sl] = -1.0
                sl += 1
            T[r, ar] = 1.0
            basis[r] = ar
            art_cols.append(ar)
            ar += 1
    art_mask = np.zeros(total, dtype=bool)
    art_mask[art_cols] = True

    ubs = np.full(total, math.inf)
    ubs[:ncols] = span
    flipped = np.zeros(total, dtype=bool)

    c_std = np.zeros(total)
    c_std[: keep.size] = c[keep] * sign
    if free.size:
        c_std[keep.size : ncols] = -(c[keep] * sign)[free]

    try:
        if art_cols:
            cost1 = np.zeros(total)
            cost1[art_cols] = 1.0
            cost_eff = cost1.copy()
            r1 = _rebuild_costrow(T, basis, cost_eff)
            outcome = _pivot_loop(T, basis, r1, np.ones(total, dtype=bool),
                                  cost_eff, ubs, flipped)
            if outcome == "unbounded":  # phase 1 is bounded below by zero
                return LpResult(SolveStatus.NUMERICAL_FAILURE)
            infeas = float(T[art_mask[basis], -1].sum())
            if infeas > FEAS_TOL:
                return LpResult(SolveStatus.INFEASIBLE)
            # drive leftover artificials out of the basis
            drop = []
            for i in range(m):
                if art_mask[basis[i]]:
                    row = T[i, :total]
                    usable = np.nonzero((~art_mask) & (np.abs(row) > PIVOT_TOL))[0]
                    if usable.size:
                        _pivot(T, basis, None, i, usable[0])
                    else:
                        drop.append(i)  # redundant row
            if drop:
                keep_rows = np.setdiff1d(np.arange(m), np.array(drop))
                T = T[keep_rows]
                basis = basis[keep_rows]
                m = len(keep_rows)

        cost_eff2 = np.where(flipped, -c_std, c_std)
        r2 = _rebuild_costrow(T, basis, cost_eff2)
        outcome = _pivot_loop(T, basis, r2, ~art_mask, cost_eff2, ubs, flipped)
    except _Stalled:
        return LpResult(SolveStatus.NUMERICAL_FAILURE)
    if outcome == "unbounded":
        return LpResult(SolveStatus.UNBOUNDED)

    vals = np.zeros(total)
    vals[basis] = T[:, -1]
    finite_flip = flipped & np.isfinite(ubs)
    vals[finite_flip] = ubs[finite_flip] - vals[finite_flip]
    x = offset.copy()
    x[keep] += sign * vals[: keep.size]
    if free.size:
        x[keep[free]] -= vals[keep.size : keep.size + free.size]
    return LpResult(SolveStatus.OPTIMAL, x, float(c @ x))


def solve_lp(problem: MilpProblem, lower=None, upper=None) -> LpResult:
    """Solve the LP relaxation (integrality dropped).

    Optional lower/upper arrays override the declared variable bounds;
    branch and bound uses this to fix binaries.
    """
    if problem.num_variables == 0:
        raise ValueError("problem has no variables")
    lo, up = problem.bounds_arrays()
    if lower is not None:
        lo = np.asarray(lower, dtype=float)
    if upper is not None:
        up = np.asarray(upper, dtype=float)
    return _solve_lp_arrays(
        problem.dense_rows(), problem.num_variables, lo, up, problem.objective_array()
    )


# ---------------------------------------------------------------------------
# branch and bound


def _check_incumbent(problem, x, binaries):
    viol = problem.row_violation(x)
    lo, up = problem.bounds_arrays()
    viol = max(viol, float(np.max(np.maximum(lo - x, x - up), initial=0.0)))
    int_err = max((abs(x[j] - round(x[j])) for j in binaries), default=0.0)
    return viol <= FEAS_TOL * 10 and int_err <= INT_TOL


def solve_milp(problem: MilpProblem, options: MilpOptions | None = None) -> MilpSolution:
    """Best-first branch and bound.

    Node selection: lowest parent LP bound, then deeper, then node id.
    Branching: most fractional binary, lowest index on ties. Anytime
    behaviour: hitting node or time limits returns the best incumbent
    together with the proven bound.
    """
    opts = options or MilpOptions()
    if problem.num_variables == 0:
        raise ValueError("problem has no variables")
    t0 = time.perf_counter()
    lo0, up0 = problem.bounds_arrays()
    binaries = problem.binary_indices()

    nodes = 0
    next_id = 0
    incumbent = None
    incumbent_obj = math.inf
    # heap entries: (parent bound, -depth, node id, lower, upper)
    heap = []
    heapq.heappush(heap, (-math.inf, 0, next_id, lo0, up0))
    next_id += 1
    best_bound = -math.inf
    failure = None

    def record(x, obj):
        nonlocal incumbent, incumbent_obj
        if obj < incumbent_obj - 1e-15:
            incumbent = x.copy()
            incumbent_obj = obj
            if opts.on_incumbent is not None:
                opts.on_incumbent(incumbent, incumbent_obj, best_bound, nodes)

    def gap_met():
        if incumbent is None:
            return False
        g = incumbent_obj - best_bound
        return g <= opts.gap_abs or g <= opts.gap_rel * max(1.0, abs(incumbent_obj))

    stop = None
    while heap:
        bound, negdepth, nid, lo, up = heapq.heappop(heap)
        if bound > best_bound:
            best_bound = bound
        if gap_met():
            stop = "gap"
            heapq.heappush(heap, (bound, negdepth, nid, lo, up))
            break
        if incumbent is not None and bound >= incumbent_obj - opts.gap_abs:
            continue  # fathomed by bound
        if opts.node_limit is not None and nodes >= opts.node_limit:
            stop = "nodes"
            heapq.heappush(heap, (bound, negdepth, nid, lo, up))
            break
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            stop = "time"
            heapq.heappush(heap, (bound, negdepth, nid, lo, up))
            break

        res = _solve_lp_arrays(problem.dense_rows(), problem.num_variables, lo, up,
                               problem.objective_array())
        nodes += 1
        if res.status == SolveStatus.INFEASIBLE:
            continue
        if res.status == SolveStatus.UNBOUNDED:
            return MilpSolution(SolveStatus.UNBOUNDED, None, None, -math.inf,
                                math.inf, nodes)
        if res.status != SolveStatus.OPTIMAL:
            failure = res.status
            break
        if incumbent is not None and res.objective >= incumbent_obj - opts.gap_abs:
            continue

        frac = [(abs(res.x[j] - round(res.x[j])), j) for j in binaries if lo[j] != up[j]]
        frac = [(f, j) for f, j in frac if f > INT_TOL]
        if frac and incumbent is None:
            # rounding probe: pin binaries at the relaxation's rounded
            # values once, to get an incumbent early and prune the tree
            plo, pup = lo.copy(), up.copy()
            for j in binaries:
                plo[j] = pup[j] = round(res.x[j])
            probe = _solve_lp_arrays(problem.dense_rows(), problem.num_variables,
                                     plo, pup, problem.objective_array())
            if probe.status == SolveStatus.OPTIMAL:
                record(probe.x, probe.objective)
        if not frac:
            x = res.x
            obj = res.objective
            if binaries:
                # re-solve with binaries pinned to clean 0/1 values
                flo, fup = lo.copy(), up.copy()
                for j in binaries:
                    flo[j] = fup[j] = round(res.x[j])
                polished = _solve_lp_arrays(problem.dense_rows(), problem.num_variables,
                                            flo, fup, problem.objective_array())
                if polished.status == SolveStatus.OPTIMAL:
                    x, obj = polished.x, polished.objective
            record(x, obj)
            continue

        # most fractional binary, lowest index on ties
        _, j = max(frac, key=lambda fj: (fj[0], -fj[1]))
        depth = -negdepth + 1
        for fixed in (0.0, 1.0):
            clo, cup = lo.copy(), up.copy()
            clo[j] = cup[j] = fixed
            heapq.heappush(heap, (res.objective, -depth, next_id, clo, cup))
            next_id += 1

    if failure is not None:
        return MilpSolution(failure, None, None, best_bound, math.inf, nodes)

    if not heap:
        if incumbent is None:
            return MilpSolution(SolveStatus.INFEASIBLE, None, None, math.inf,
                                math.inf, nodes)
        best_bound = incumbent_obj
        stop = stop or "exhausted"

    if incumbent is not None and not _check_incumbent(problem, incumbent, binaries):
        return MilpSolution(SolveStatus.NUMERICAL_FAILURE, incumbent,
                            incumbent_obj, best_bound, math.inf, nodes)

    gap = (incumbent_obj - best_bound) if incumbent is not None else math.inf
    gap = max(gap, 0.0)
    if stop in ("exhausted", "gap") and incumbent is not None:
        # a stop caused by a user-loosened gap is reported as GapLimit;
        # proving the default tight gap counts as optimal
        tight = opts.gap_abs <= 1e-6 and opts.gap_rel <= 1e-6
        status = SolveStatus.OPTIMAL if (stop == "exhausted" or tight) \
            else SolveStatus.GAP_LIMIT
    elif stop == "nodes":
        status = SolveStatus.NODE_LIMIT
    else:
        status = SolveStatus.TIME_LIMIT
    return MilpSolution(status, incumbent, incumbent_obj if incumbent is not None
                        else None, best_bound, gap, nodes)
