"""Single-block optimizer for the harvest-then-receive link.

The original four-variable problem (time split alpha, rate R, harvesting
energy e_e, information energy e_i) reduces, through the tight energy
causality and average-power constraints, to a two-variable problem over
(theta, e_i).  All local optima satisfy one of three equation systems:

  (a) interior trade-off:   M(theta) = 0 and N(e_i) = 0,
  (b) peak information power: e_i = e_lim and M(theta) = 0,
  (c) peak harvesting power:  the candidate lies on the e_e = e_lim boundary
      and solves h(theta) = 0 there.

`algorithm1` enumerates the three candidate families, filters infeasible
points, and returns the best one together with the recovered full solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize

from .channel import capacity, capacity_derivative
from .decoder_energy import DecoderEnergyModel, inverse_energy

__all__ = [
    "Case",
    "SystemParams",
    "CandidateSolution",
    "FullSolution",
    "SolverError",
    "InfeasibleRecoveryError",
    "objective",
    "feasible",
    "m_function",
    "n_function",
    "solve_lemma3",
    "solve_lemma4",
    "case_ab_pairs",
    "solve_case_a",
    "solve_case_b",
    "solve_case_c",
    "recover_full",
    "algorithm1",
    "constant_power_baseline",
]

FEAS_TOL = 1e-10
_THETA_CAP = 1e12
_E_CAP = 100.0
_FIXED_POINT_TOL = 1e-9
_DEDUP_TOL = 1e-6
_MAX_ALTERNATIONS = 500
_N_STARTS = 16


class SolverError(RuntimeError):
    """A root bracket could not be established within the search caps."""


class InfeasibleRecoveryError(ValueError):
    """The (theta, e_i) pair would require a time split outside [0, 1]."""


class Case(str, Enum):
    TRADE_OFF = "a"
    MAX_INFO_POWER = "b"
    MAX_HARVEST_POWER = "c"


@dataclass(frozen=True)
class SystemParams:
    """Scalar link constants shared by all solvers.

    eta: RF-to-DC conversion efficiency in (0, 1].
    g: net non-decoding receiver energy per channel use (overhead minus
       ambient harvest).  User-facing inputs require g >= 0 (`validate`);
       the multi-block solver builds internal copies with g shifted by the
       transfer variable, which may be negative.
    e_avg: average-power energy budget per channel use.
    e_lim: peak-power energy cap per channel use.
    n: channel uses per block, reporting only.
    """

    eta: float
    g: float
    e_avg: float
    e_lim: float
    n: int = 1

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must be in (0, 1]")
        if not (0.0 <= self.e_avg < self.e_lim):
            raise ValueError("need 0 <= e_avg < e_lim")
        if self.eta * self.e_avg - self.g < -1e-12:
            raise ValueError("need eta * e_avg >= g (harvest must cover overhead)")
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    def validate(self) -> "SystemParams":
        """Extra checks for user-facing inputs."""
        if self.g < 0:
            raise ValueError("g must be >= 0")
        return self

    @property
    def budget(self) -> float:
        """Net harvestable energy rate eta * e_avg - g."""
        return self.eta * self.e_avg - self.g


@dataclass(frozen=True)
class CandidateSolution:
    theta: float
    e_i: float
    case_label: Case
    objective: float


@dataclass(frozen=True)
class FullSolution:
    alpha: float
    rate: float
    e_e: float
    e_i: float
    theta: float
    bits_per_use: float
    total_bits: float


def objective(theta: float, e_i: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """Reduced objective ((theta-1)/theta) * budget * C(e_i) / (eta*e_i + E(theta)).

    Returns 0 for the degenerate 0/0 point theta = 1, e_i = 0.
    """
    denom = p.eta * e_i + m.evaluate(theta)
    if denom <= 0.0:
        return 0.0
    return (theta - 1.0) / theta * p.budget * capacity(e_i) / denom


def feasible(theta: float, e_i: float, p: SystemParams, m: DecoderEnergyModel) -> bool:
    """Check the reduced problem's constraints within FEAS_TOL."""
    if not (-FEAS_TOL <= e_i <= p.e_lim + FEAS_TOL):
        return False
    if theta < 1.0 - FEAS_TOL:
        return False
    span = p.e_lim - p.e_avg
    lhs = m.evaluate(max(theta, 1.0)) + (p.eta * p.e_lim - p.g) / span * max(e_i, 0.0)
    rhs = p.budget / span * p.e_lim
    return lhs >= rhs - FEAS_TOL


def m_function(theta: float, e_i: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """M(theta) = eta*e_i + E(theta) - (theta-1)*theta*E'(theta); non-increasing."""
    return p.eta * e_i + m.evaluate(theta) - (theta - 1.0) * theta * m.derivative(theta)


def n_function(e_i: float, theta: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """N(e) = C'(e) * (eta*e + E(theta)) - eta*C(e); non-increasing in e."""
    return capacity_derivative(e_i) * (p.eta * e_i + m.evaluate(theta)) - p.eta * capacity(e_i)


def _theta_star(e_i: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """Unique root of M(theta) = 0 for fixed e_i > 0."""
    lo, hi = 1.0, 2.0
    while m_function(hi, e_i, p, m) > 0.0:
        lo = hi
        hi *= 2.0
        if hi > _THETA_CAP:
            raise SolverError("no M-root below theta = 1e12; energy model suspect")
    return float(
        optimize.brentq(
            lambda t: m_function(t, e_i, p, m), lo, hi, xtol=1e-12, rtol=8.9e-16
        )
    )


def _theta0(e_i: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    span = p.e_lim - p.e_avg
    target = max(0.0, (p.budget * p.e_lim - (p.eta * p.e_lim - p.g) * e_i) / span)
    return inverse_energy(m, target)


def solve_lemma3(e_i: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """Constrained optimizer of theta for fixed e_i > 0: max(theta*, theta0)."""
    if not e_i > 0:
        raise ValueError("solve_lemma3 requires e_i > 0")
    return max(_theta_star(e_i, p, m), _theta0(e_i, p, m))


def _e_star(theta: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """Unique root of N(e) = 0 for fixed theta > 1."""
    lo, hi = 1e-12, 1.0
    if n_function(lo, theta, p, m) <= 0.0:
        # Root sits essentially at 0; cannot happen for theta > 1 with a
        # property-(1)/(2) model, so treat as solver failure.
        raise SolverError("N(0+) <= 0; energy model suspect")
    while n_function(hi, theta, p, m) > 0.0:
        lo = hi
        hi *= 2.0
        if hi > _E_CAP:
            raise SolverError("no N-root below e = 100; energy model suspect")
    return float(
        optimize.brentq(
            lambda e: n_function(e, theta, p, m), lo, hi, xtol=1e-14, rtol=8.9e-16
        )
    )


def _e0(theta: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    denom = p.eta * p.e_lim - p.g
    return max(
        0.0,
        p.budget / denom * p.e_lim - (p.e_lim - p.e_avg) / denom * m.evaluate(theta),
    )


def solve_lemma4(theta: float, p: SystemParams, m: DecoderEnergyModel) -> float:
    """Constrained optimizer of e_i for fixed theta > 1."""
    if not theta > 1:
        raise ValueError("solve_lemma4 requires theta > 1")
    return min(max(_e_star(theta, p, m), _e0(theta, p, m)), p.e_lim)


def case_ab_pairs(p: SystemParams, m: DecoderEnergyModel) -> list[tuple[float, float, Case]]:
    """All case (a) stationary pairs plus the case (b) pair.

    Depends only on eta, e_lim, and the energy model (not on e_avg or g), so
    the result can be shared across the blocks of a multi-block problem.
    Case (a) pairs come from alternating the unconstrained M- and N-roots to
    a fixed point from 16 log-spaced starting energies; non-converging starts
    are discarded.
    """
    pairs: list[tuple[float, float]] = []
    seeds = np.geomspace(1e-3 * p.e_lim, p.e_lim, _N_STARTS)
    for seed in seeds:
        e = float(seed)
        theta = math.inf
        converged = False
        try:
            for _ in range(_MAX_ALTERNATIONS):
                theta_new = _theta_star(e, p, m)
                e_new = _e_star(theta_new, p, m)
                if abs(theta_new - theta) < _FIXED_POINT_TOL and abs(e_new - e) < _FIXED_POINT_TOL:
                    theta, e = theta_new, e_new
                    converged = True
                    break
                theta, e = theta_new, e_new
                # Snap onto an already-found fixed point to skip re-convergence.
                if any(abs(theta - t0) < 1e-8 and abs(e - e0) < 1e-8 for t0, e0 in pairs):
                    converged = False
                    break
        except SolverError:
            continue
        if converged and not any(
            abs(theta - t0) < _DEDUP_TOL and abs(e - e0) < _DEDUP_TOL for t0, e0 in pairs
        ):
            pairs.append((theta, e))
    out = [(t, e, Case.TRADE_OFF) for t, e in pairs]
    out.append((_theta_star(p.e_lim, p, m), p.e_lim, Case.MAX_INFO_POWER))
    return out


def solve_case_a(p: SystemParams, m: DecoderEnergyModel) -> list[CandidateSolution]:
    """All distinct interior stationary pairs (M = 0 and N = 0)."""
    return [
        CandidateSolution(t, e, c, objective(t, e, p, m))
        for t, e, c in case_ab_pairs(p, m)
        if c is Case.TRADE_OFF
    ]


def solve_case_b(p: SystemParams, m: DecoderEnergyModel) -> CandidateSolution:
    """Peak information power: e_i = e_lim, theta from M = 0."""
    theta = _theta_star(p.e_lim, p, m)
    return CandidateSolution(
        theta, p.e_lim, Case.MAX_INFO_POWER, objective(theta, p.e_lim, p, m)
    )


def solve_case_c(p: SystemParams, m: DecoderEnergyModel) -> CandidateSolution | None:
    """Peak harvesting power: best point on the e_e = e_lim boundary.

    On that boundary e_i is an affine decreasing function of E(theta); the
    one-dimensional objective has non-increasing derivative proportional to
    h(theta), positive at theta = 1 and negative at theta' (where the
    boundary meets e_i = 0), so a single bisection finds the optimum.
    Returns None when no interior root exists (degenerate bracket).
    """
    if p.budget <= 0.0:
        return None
    denom = p.eta * p.e_lim - p.g
    k = (p.e_lim - p.e_avg) / denom

    def e_tilde(theta: float) -> float:
        return p.budget / denom * p.e_lim - k * m.evaluate(theta)

    def h(theta: float) -> float:
        e = e_tilde(theta)
        if e <= 0.0:
            return -math.inf
        c = capacity(e)
        e_prime = -k * m.derivative(theta)
        c_prime = capacity_derivative(e) * e_prime
        q = theta * theta - theta
        gap = p.e_lim - e
        return gap * c + q * gap * c_prime + q * c * e_prime

    if h(1.0) <= 0.0:
        return None
    theta_prime = inverse_energy(m, p.budget / (p.e_lim - p.e_avg) * p.e_lim)
    gap = max(1e-12, 1e-9 * (theta_prime - 1.0))
    hi = theta_prime - gap
    while hi > 1.0 and h(hi) > 0.0:
        gap *= 1e-2
        hi = theta_prime - gap
        if gap < 1e-15 * theta_prime:
            # Root indistinguishable from theta'; the boundary candidate has
            # e_i ~ 0 and negligible objective.
            break
    if not hi > 1.0 or h(hi) > 0.0:
        theta = hi if hi > 1.0 else 1.0 + 1e-12
    else:
        theta = float(optimize.brentq(h, 1.0, hi, xtol=1e-12, rtol=8.9e-16))
    e_i = max(e_tilde(theta), 0.0)
    return CandidateSolution(
        theta, e_i, Case.MAX_HARVEST_POWER, objective(theta, e_i, p, m)
    )


def recover_full(
    theta: float, e_i: float, p: SystemParams, m: DecoderEnergyModel
) -> FullSolution:
    """Recover (alpha, R, e_e) from a feasible reduced pair.

    The energy-causality and average-power constraints hold with equality by
    construction.
    """
    energy = m.evaluate(theta)
    denom = p.eta * e_i + energy - p.budget
    if denom <= 1e-14:
        raise InfeasibleRecoveryError(
            "eta*e_i + E(theta) must exceed the budget (alpha would leave [0, 1])"
        )
    alpha = 1.0 - p.budget / (p.eta * e_i + energy)
    rate = (theta - 1.0) / theta * capacity(e_i)
    e_e = (energy * p.e_avg + p.g * e_i) / denom
    bits = (1.0 - alpha) * rate
    return FullSolution(alpha, rate, e_e, e_i, theta, bits, bits * p.n)


def _zero_solution(p: SystemParams) -> tuple[CandidateSolution, FullSolution]:
    cand = CandidateSolution(1.0, 0.0, Case.TRADE_OFF, 0.0)
    full = FullSolution(1.0, 0.0, p.e_avg, 0.0, 1.0, 0.0, 0.0)
    return cand, full


def algorithm1(
    p: SystemParams,
    m: DecoderEnergyModel,
    ab_pairs: list[tuple[float, float, Case]] | None = None,
) -> tuple[CandidateSolution, FullSolution]:
    """Globally optimal single-block solution.

    Enumerates case (a)/(b)/(c) candidates, keeps the feasible ones, and
    returns the objective maximizer with its recovered full solution.
    `ab_pairs` lets callers reuse the e_avg/g-independent case (a)/(b) roots.
    """
    if p.budget <= 0.0:
        return _zero_solution(p)
    if ab_pairs is None:
        ab_pairs = case_ab_pairs(p, m)
    candidates = [
        CandidateSolution(t, e, c, objective(t, e, p, m)) for t, e, c in ab_pairs
    ]
    cand_c = solve_case_c(p, m)
    if cand_c is not None:
        candidates.append(cand_c)
    feasible_candidates = [c for c in candidates if feasible(c.theta, c.e_i, p, m)]
    if not feasible_candidates:
        raise SolverError("no feasible candidate; internal consistency failure")
    best = max(feasible_candidates, key=lambda c: c.objective)
    return best, recover_full(best.theta, best.e_i, p, m)


def constant_power_baseline(
    p: SystemParams, m: DecoderEnergyModel
) -> FullSolution:
    """No-power-optimization comparator: e_e = e_i = e_avg, theta optimized."""
    if p.budget <= 0.0 or p.e_avg == 0.0:
        return _zero_solution(p)[1]
    theta = solve_lemma3(p.e_avg, p, m)
    return recover_full(theta, p.e_avg, p, m)
