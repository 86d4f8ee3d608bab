"""Multi-block planner with inter-block energy transfers.

Energy harvested in one block may be banked and spent later.  Introducing a
per-block transfer variable T_i (positive: bank, negative: withdraw) turns
the coupled energy-causality constraints into prefix-sum constraints, and
each block then looks like a single-block problem with overhead g_i + T_i.

The per-block objective scale factor (the normalized objective `o_tilde`)
admits a block-independent maximizer (theta_dot, e_dot), which yields a
closed-form upper bound and the suffix-sum achievability condition.  The
general case alternates per-block single-block solves with an exact LP over
the transfers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .decoder_energy import DecoderEnergyModel
from .single_block import (
    Case,
    FullSolution,
    SolverError,
    SystemParams,
    algorithm1,
    case_ab_pairs,
)
from .channel import capacity

__all__ = [
    "MultiBlockProblem",
    "TransferSchedule",
    "MultiBlockSolution",
    "LpInfeasibleError",
    "ScheduleConditionError",
    "o_tilde",
    "solve_p8",
    "g_dot",
    "upper_bound",
    "theorem2_condition",
    "construct_schedule",
    "lp_step",
    "iterative_solver",
    "threshold_u",
]

_SCHEDULE_TOL = 1e-10
_BOUND_TOL = 1e-8
_CONVERGENCE_TOL = 1e-9
_MAX_ITERATIONS = 200


class LpInfeasibleError(RuntimeError):
    """The transfer LP has no feasible point for the given per-block pairs."""


class ScheduleConditionError(ValueError):
    """The suffix-sum achievability condition does not hold."""


@dataclass(frozen=True)
class MultiBlockProblem:
    """Shared link constants plus per-block overheads g_i."""

    params: SystemParams
    g_list: tuple[float, ...]
    model: DecoderEnergyModel

    def __post_init__(self):
        object.__setattr__(self, "g_list", tuple(float(g) for g in self.g_list))
        if len(self.g_list) < 1:
            raise ValueError("need at least one block")
        for g in self.g_list:
            if g < 0:
                raise ValueError("per-block g must be >= 0")
            if self.params.eta * self.params.e_avg - g < -1e-12:
                raise ValueError("need eta * e_avg >= g for every block")

    @property
    def n_blocks(self) -> int:
        return len(self.g_list)


@dataclass(frozen=True)
class TransferSchedule:
    t_list: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "t_list", tuple(float(t) for t in self.t_list))


@dataclass(frozen=True)
class MultiBlockSolution:
    per_block: tuple[FullSolution, ...]
    cases: tuple[Case, ...]
    schedule: TransferSchedule
    total_bits_per_use: float
    bound: float
    bound_achieved: bool


def o_tilde(theta: float, e_i: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """Normalized objective ((theta-1)/theta) * C(e_i) / (eta*e_i + E(theta)).

    Equals the single-block objective divided by the budget eta*e_avg - g.
    """
    denom = p.eta * e_i + m.evaluate(theta)
    if denom <= 0.0:
        return 0.0
    return (theta - 1.0) / theta * capacity(e_i) / denom


def solve_p8(
    p: SystemParams,
    m: DecoderEnergyModel,
    ab_pairs: list[tuple[float, float, Case]] | None = None,
) -> tuple[float, float]:
    """Maximizer (theta_dot, e_dot) of o_tilde over the box constraints only.

    Solved from the case (a)/(b) candidates; the boundary family (c) does not
    apply because the box has no coupled constraint.  Independent of e_avg
    and g by inspection of o_tilde.
    """
    if ab_pairs is None:
        ab_pairs = case_ab_pairs(p, m)
    # Interior stationary pairs outside the box are not P8-feasible; the box
    # optimum is then on the e_i = e_lim edge, which case (b) supplies.
    in_box = [pair for pair in ab_pairs if pair[1] <= p.e_lim + 1e-9]
    best = max(in_box, key=lambda pair: o_tilde(pair[0], pair[1], p, m))
    return best[0], best[1]


def g_dot(
    p: SystemParams,
    m: DecoderEnergyModel,
    p8: tuple[float, float] | None = None,
) -> float:
    """Minimum per-block overhead-plus-transfer level keeping (theta_dot, e_dot) feasible.

    Returns -inf when e_dot = e_lim: the boundary constraint then never binds.
    """
    theta_dot, e_dot = p8 if p8 is not None else solve_p8(p, m)
    if p.e_lim - e_dot <= 1e-12 * p.e_lim:
        return -math.inf
    energy = m.evaluate(theta_dot)
    return p.eta * p.e_avg - (energy + p.eta * e_dot) * (p.e_lim - p.e_avg) / (
        p.e_lim - e_dot
    )


def upper_bound(prob: MultiBlockProblem) -> float:
    """Sum over blocks of (eta*e_avg - g_i) * o_tilde(theta_dot, e_dot)."""
    p, m = prob.params, prob.model
    theta_dot, e_dot = solve_p8(p, m)
    scale = o_tilde(theta_dot, e_dot, p, m)
    return sum((p.eta * p.e_avg - g) * scale for g in prob.g_list)


def theorem2_condition(prob: MultiBlockProblem, gdot: float | None = None) -> bool:
    """Suffix-sum achievability test: sum_{i>=k} g_i >= (N-k+1) * g_dot for all k."""
    if gdot is None:
        gdot = g_dot(prob.params, prob.model)
    if gdot == -math.inf:
        return True
    suffix = 0.0
    count = 0
    for g in reversed(prob.g_list):
        suffix += g
        count += 1
        if suffix < count * gdot - 1e-12:
            return False
    return True


def construct_schedule(prob: MultiBlockProblem, gdot: float | None = None) -> TransferSchedule:
    """Constructive transfer schedule achieving the upper bound.

    T_1 = max(0, g_dot - g_1); T_i = max(-prefix, g_dot - g_i) afterwards.
    Requires the suffix-sum condition; the result sums to zero and keeps
    every block's overhead-plus-transfer at or above g_dot.
    """
    if gdot is None:
        gdot = g_dot(prob.params, prob.model)
    if not theorem2_condition(prob, gdot):
        raise ScheduleConditionError("suffix-sum condition not met")
    if gdot == -math.inf:
        return TransferSchedule((0.0,) * prob.n_blocks)
    transfers: list[float] = []
    prefix = 0.0
    for i, g in enumerate(prob.g_list):
        t = max(0.0, gdot - g) if i == 0 else max(-prefix, gdot - g)
        transfers.append(t)
        prefix += t
    return TransferSchedule(tuple(transfers))


def _lp_constraints(prob: MultiBlockProblem, thetas, e_is):
    """Inequality system A x <= b for the transfer polytope."""
    p, m = prob.params, prob.model
    n = prob.n_blocks
    rows, rhs = [], []
    # Prefix sums >= 0.
    for k in range(n):
        row = np.zeros(n)
        row[: k + 1] = -1.0
        rows.append(row)
        rhs.append(0.0)
    # T_i <= eta*e_avg - g_i.
    for i in range(n):
        row = np.zeros(n)
        row[i] = 1.0
        rows.append(row)
        rhs.append(p.eta * p.e_avg - prob.g_list[i])
    # Boundary feasibility of the fixed per-block pair, linear in T_i;
    # vacuous when e_i = e_lim.
    for i in range(n):
        gap = p.e_lim - e_is[i]
        if gap <= 1e-12 * p.e_lim:
            continue
        lower = (
            p.eta * p.e_avg * p.e_lim
            - p.eta * p.e_lim * e_is[i]
            - prob.g_list[i] * gap
            - m.evaluate(thetas[i]) * (p.e_lim - p.e_avg)
        )
        row = np.zeros(n)
        row[i] = -gap
        rows.append(row)
        rhs.append(-lower)
    return np.array(rows), np.array(rhs)


def lp_step(prob: MultiBlockProblem, thetas, e_is) -> TransferSchedule:
    """Optimal transfers for fixed per-block (theta_i, e_i).

    Minimizes sum_i o_tilde_i * T_i (the transfer-dependent part of the
    total objective, negated) over the transfer polytope.  Ties are broken
    toward the lexicographically smallest T through a chain of pinning LPs.
    """
    p, m = prob.params, prob.model
    n = prob.n_blocks
    cost = np.array([o_tilde(thetas[i], e_is[i], p, m) for i in range(n)])
    a_ub, b_ub = _lp_constraints(prob, thetas, e_is)
    bounds = [(None, None)] * n
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise LpInfeasibleError(f"transfer LP failed: {res.message}")
    best = np.asarray(res.x, dtype=float)
    value = float(cost @ best)
    # Lexicographic tie-break: pin the objective, then minimize coordinates
    # in order.  Fall back to the plain optimum if the chain degrades.
    a_eq = [cost.copy()]
    b_eq = [value]
    pinned = best.copy()
    ok = True
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        res_i = linprog(
            unit,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=np.array(a_eq),
            b_eq=np.array(b_eq),
            bounds=bounds,
            method="highs",
        )
        if not res_i.success:
            ok = False
            break
        pinned = np.asarray(res_i.x, dtype=float)
        a_eq.append(unit)
        b_eq.append(float(res_i.fun))
    if ok:
        slack = a_ub @ pinned - b_ub
        if np.all(slack <= 1e-9) and abs(cost @ pinned - value) <= 1e-10 * max(
            1.0, abs(value)
        ):
            best = pinned
    return TransferSchedule(tuple(float(t) for t in best))


def _effective_params(p: SystemParams, g_eff: float) -> SystemParams:
    # Clamp roundoff past the zero-budget point; g_eff may be negative.
    g_eff = min(g_eff, p.eta * p.e_avg)
    return replace(p, g=g_eff)


def iterative_solver(prob: MultiBlockProblem) -> MultiBlockSolution:
    """Alternating per-block solves and transfer LPs; local optimum.

    Initialized from the constructive schedule when the suffix-sum condition
    holds (the first pass is then already optimal), otherwise from zeros.
    The objective is non-decreasing across steps; convergence is declared on
    an improvement below 1e-9.
    """
    p, m = prob.params, prob.model
    n = prob.n_blocks
    ab = case_ab_pairs(p, m)
    p8 = solve_p8(p, m, ab)
    gdot = g_dot(p, m, p8)
    bound = sum(p.eta * p.e_avg - g for g in prob.g_list) * o_tilde(p8[0], p8[1], p, m)
    condition = theorem2_condition(prob, gdot)
    schedule = (
        construct_schedule(prob, gdot) if condition else TransferSchedule((0.0,) * n)
    )

    transfers = np.array(schedule.t_list)
    prev_total = -math.inf
    blocks: list[tuple] = []
    total = 0.0
    for _ in range(_MAX_ITERATIONS):
        blocks = []
        total = 0.0
        for i in range(n):
            p_i = _effective_params(p, prob.g_list[i] + transfers[i])
            cand, full = algorithm1(p_i, m, ab_pairs=ab)
            blocks.append((p_i, cand, full))
            total += cand.objective
        if total < prev_total - 1e-9:
            raise SolverError("objective decreased across iterations")
        if total - prev_total < _CONVERGENCE_TOL:
            break
        prev_total = total
        thetas = [cand.theta for _, cand, _ in blocks]
        e_is = [cand.e_i for _, cand, _ in blocks]
        try:
            new_schedule = lp_step(prob, thetas, e_is)
        except LpInfeasibleError:
            break
        transfers = np.array(new_schedule.t_list)

    return MultiBlockSolution(
        per_block=tuple(full for _, _, full in blocks),
        cases=tuple(cand.case_label for _, cand, _ in blocks),
        schedule=TransferSchedule(tuple(float(t) for t in transfers)),
        total_bits_per_use=total,
        bound=bound,
        bound_achieved=abs(total - bound) <= _BOUND_TOL,
    )


def threshold_u(p: SystemParams, m: DecoderEnergyModel, g: float) -> float:
    """The e_avg level at which g_dot equals the uniform per-block overhead g.

    For e_avg at or below this threshold the multi-block upper bound is
    achievable (uniform-g case).  Solves g_dot(e_avg) = g in closed form;
    (theta_dot, e_dot) do not depend on e_avg.  Returns +inf in the
    degenerate e_dot = e_lim case.
    """
    theta_dot, e_dot = solve_p8(p, m)
    if p.e_lim - e_dot <= 1e-12 * p.e_lim:
        return math.inf
    energy = m.evaluate(theta_dot)
    denom = p.eta * p.e_lim + energy
    return (p.e_lim - e_dot) / denom * g + (p.eta * e_dot + energy) / denom * p.e_lim
