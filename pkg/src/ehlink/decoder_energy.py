"""Decoder energy curves as functions of the inverse capacity gap theta.

A model maps theta = C/(C - R) >= 1 to the decoding energy per channel use.
Every model must be zero at theta = 1, non-decreasing, convex, and unbounded
as theta grows, and must supply its exact derivative (the solvers consume it
directly).  Two built-ins are provided: theta*log2(theta), which matches
iterative-decoding complexity results for LDPC codes, and a power-law family
c*(theta-1)^p for exercising solver generality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

__all__ = [
    "DecoderEnergyModel",
    "theta_log_theta_model",
    "power_law_model",
    "parse_model",
    "inverse_energy",
]

_LOG2E = 1.0 / math.log(2.0)
_THETA_SLACK = 1e-12


@dataclass(frozen=True)
class DecoderEnergyModel:
    """Immutable decoding-energy curve with its derivative."""

    name: str
    evaluate: Callable
    derivative: Callable


def _check_theta(theta):
    if isinstance(theta, (float, int)):
        if theta < 1.0 - _THETA_SLACK:
            raise ValueError("theta must be >= 1")
        return max(float(theta), 1.0)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 1.0 - _THETA_SLACK):
        raise ValueError("theta must be >= 1")
    return np.maximum(theta, 1.0)


def theta_log_theta_model() -> DecoderEnergyModel:
    """E(theta) = theta * log2(theta), E'(theta) = log2(theta) + 1/ln(2)."""

    def evaluate(theta):
        t = _check_theta(theta)
        if isinstance(t, float):
            return t * math.log2(t)
        return t * np.log2(t)

    def derivative(theta):
        t = _check_theta(theta)
        if isinstance(t, float):
            return math.log2(t) + _LOG2E
        return np.log2(t) + _LOG2E

    return DecoderEnergyModel("theta-log-theta", evaluate, derivative)


def power_law_model(c: float = 1.0, p: float = 2.0) -> DecoderEnergyModel:
    """E(theta) = c * (theta - 1)^p with c > 0 and p >= 1."""
    if not c > 0:
        raise ValueError("power-law coefficient c must be > 0")
    if not p >= 1:
        raise ValueError("power-law exponent p must be >= 1")

    def evaluate(theta):
        t = _check_theta(theta)
        if isinstance(t, float):
            return c * (t - 1.0) ** p
        return c * (t - 1.0) ** p

    def derivative(theta):
        t = _check_theta(theta)
        return c * p * (t - 1.0) ** (p - 1.0)

    return DecoderEnergyModel(f"power-law:c={c:g},p={p:g}", evaluate, derivative)


def parse_model(spec: str) -> DecoderEnergyModel:
    """Build a model from a CLI spec string.

    Accepted forms: ``theta-log-theta`` or ``power-law:c=<float>,p=<float>``.
    """
    spec = spec.strip()
    if spec == "theta-log-theta":
        return theta_log_theta_model()
    if spec.startswith("power-law"):
        kwargs = {}
        _, _, args = spec.partition(":")
        if args:
            for item in args.split(","):
                key, _, value = item.partition("=")
                key = key.strip()
                if key not in ("c", "p"):
                    raise ValueError(f"unknown power-law parameter {key!r}")
                kwargs[key] = float(value)
        return power_law_model(**kwargs)
    raise ValueError(f"unknown decoder energy model {spec!r}")


def inverse_energy(model: DecoderEnergyModel, target: float) -> float:
    """Return theta >= 1 with model.evaluate(theta) == target.

    Monotone bisection (Brent) after doubling the bracket from theta = 1;
    existence is guaranteed by the model growing without bound.
    """
    if target < 0:
        raise ValueError("target energy must be >= 0")
    if target == 0.0:
        return 1.0
    hi = 2.0
    while model.evaluate(hi) < target:
        hi *= 2.0
        if hi > 1e13:
            raise RuntimeError(
                "decoder energy model failed to reach target; unbounded-growth "
                "property violated"
            )
    return float(
        optimize.brentq(
            lambda t: model.evaluate(t) - target, 1.0, hi, xtol=1e-13, rtol=8.9e-16
        )
    )
