"""Brute-force verification oracles, independent of the equation solvers.

Dense grid search for the single-block problem and the normalized box
problem, plus exhaustive vertex enumeration for the transfer LP.  These are
deliberately slow-and-simple; they exist to certify the fast solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import capacity
from .decoder_energy import DecoderEnergyModel, inverse_energy
from .multi_block import MultiBlockProblem, TransferSchedule, _lp_constraints, o_tilde
from .single_block import SystemParams

__all__ = [
    "GridSpec",
    "grid_search_p2",
    "grid_search_p8",
    "enumerate_lp_vertices",
]


@dataclass(frozen=True)
class GridSpec:
    theta_max: float | None = None
    theta_points: int = 1000
    e_points: int = 1000

    def __post_init__(self):
        if self.theta_max is not None and not self.theta_max > 1:
            raise ValueError("theta_max must exceed 1")
        if self.theta_points < 2 or self.e_points < 2:
            raise ValueError("grid counts must be >= 2")


def _objective_matrix(theta_grid, e_grid, budget, p, m):
    cap = capacity(e_grid)
    energy = m.evaluate(theta_grid)
    factor = (theta_grid - 1.0) / theta_grid
    denom = p.eta * e_grid[None, :] + energy[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = factor[:, None] * budget * cap[None, :] / denom
    obj[~np.isfinite(obj)] = 0.0
    return obj, energy


def grid_search_p2(
    p: SystemParams, m: DecoderEnergyModel, spec: GridSpec = GridSpec()
) -> tuple[float, float, float]:
    """Exhaustive feasible-grid maximization of the single-block objective.

    Theta is log-spaced up to the boundary level theta' plus margin (doubled
    if the argmax lands on the upper edge); e_i is linear on [0, e_lim].
    """
    budget = p.eta * p.e_avg - p.g
    if spec.theta_max is not None:
        theta_max = spec.theta_max
    else:
        theta_prime = inverse_energy(m, max(budget, 0.0) / (p.e_lim - p.e_avg) * p.e_lim)
        theta_max = 2.0 * max(theta_prime, 2.0)
    e_grid = np.linspace(0.0, p.e_lim, spec.e_points)
    span = p.e_lim - p.e_avg
    k1 = (p.eta * p.e_lim - p.g) / span
    rhs = budget / span * p.e_lim
    for _ in range(8):
        theta_grid = np.geomspace(1.0 + 1e-6, theta_max, spec.theta_points)
        obj, energy = _objective_matrix(theta_grid, e_grid, budget, p, m)
        mask = energy[:, None] + k1 * e_grid[None, :] >= rhs - 1e-10
        if not mask.any():
            raise ValueError("empty feasible grid; invalid parameters")
        obj = np.where(mask, obj, -np.inf)
        i, j = np.unravel_index(np.argmax(obj), obj.shape)
        if i < spec.theta_points - 1 or budget == 0.0:
            return float(theta_grid[i]), float(e_grid[j]), float(obj[i, j])
        theta_max *= 2.0
    return float(theta_grid[i]), float(e_grid[j]), float(obj[i, j])


def grid_search_p8(
    p: SystemParams, m: DecoderEnergyModel, spec: GridSpec = GridSpec()
) -> tuple[float, float, float]:
    """Exhaustive box maximization of the normalized objective o_tilde.

    Uses only the box constraints (no boundary coupling), so the result does
    not depend on e_avg or g.  The theta range starts at 8 and doubles while
    the argmax sits on the upper edge.
    """
    theta_max = spec.theta_max if spec.theta_max is not None else 8.0
    e_grid = np.linspace(0.0, p.e_lim, spec.e_points)
    for _ in range(16):
        theta_grid = np.geomspace(1.0 + 1e-6, theta_max, spec.theta_points)
        obj, _ = _objective_matrix(theta_grid, e_grid, 1.0, p, m)
        i, j = np.unravel_index(np.argmax(obj), obj.shape)
        if i < spec.theta_points - 1:
            return float(theta_grid[i]), float(e_grid[j]), float(obj[i, j])
        theta_max *= 2.0
    return float(theta_grid[i]), float(e_grid[j]), float(obj[i, j])


def enumerate_lp_vertices(
    prob: MultiBlockProblem, thetas, e_is
) -> tuple[str, TransferSchedule | None]:
    """Exhaustive vertex optimum of the transfer polytope (N <= 4 blocks).

    Intersects every choice of N constraints taken as equalities, keeps the
    feasible points, and returns the cost-minimal one, ties broken toward
    the lexicographically smallest transfer vector.  Status is one of
    "optimal" or "infeasible".
    """
    n = prob.n_blocks
    if n > 4:
        raise ValueError("vertex enumeration limited to N <= 4")
    p, m = prob.params, prob.model
    cost = np.array([o_tilde(thetas[i], e_is[i], p, m) for i in range(n)])
    a_ub, b_ub = _lp_constraints(prob, thetas, e_is)
    vertices = []
    for rows in combinations(range(len(b_ub)), n):
        a = a_ub[list(rows)]
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, b_ub[list(rows)])
        if np.all(a_ub @ x <= b_ub + 1e-9):
            vertices.append(x)
    if not vertices:
        return "infeasible", None
    values = [float(cost @ v) for v in vertices]
    best_value = min(values)
    optimal = [
        v for v, val in zip(vertices, values) if val <= best_value + 1e-9
    ]
    best = min(optimal, key=lambda v: tuple(v))
    return "optimal", TransferSchedule(tuple(float(t) for t in best))
