"""Gompertz mortality, the survivor index and time-zero whole-life values.

Deaths during the first year are excluded, so the force of mortality is
zero on [0, 1) and Gompertz beyond; the survivor index therefore equals one
at T = 1 and the payout-time density kappa integrates to one over (1, inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import G2ppParams, _zero_bond_unchecked


@dataclass(frozen=True)
class GompertzParams:
    """Force of mortality a * exp(b * age) with constant coefficients."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError("Gompertz coefficients must be > 0")


@dataclass(frozen=True)
class AgeDomain:
    """Closed age interval scanned for model points."""

    x_min: float = 20.0
    x_max: float = 80.0
    step: float = 0.5

    def __post_init__(self):
        if self.x_min < 0.0 or self.x_max <= self.x_min:
            raise ValueError("need 0 <= x_min < x_max")
        if self.step <= 0.0:
            raise ValueError("step must be > 0")

    def grid(self) -> np.ndarray:
        n = int(round((self.x_max - self.x_min) / self.step))
        return np.round(self.x_min + self.step * np.arange(n + 1), 12)


@dataclass(frozen=True)
class QuadratureSpec:
    """Maturity quadrature: trapezoid step and survivor-tail truncation."""

    dt: float = 0.25
    tail_eps: float = 1e-8

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("quadrature step must be > 0")
        if not 0.0 < self.tail_eps <= 1.0:
            raise ValueError("tail_eps must lie in (0, 1]")


def force(params: GompertzParams, s, x):
    """Force of mortality at elapsed time s for initial age x; zero for s < 1."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(s < 0.0) or np.any(x < 0.0):
        raise ValueError("s and x must be >= 0")
    out = np.where(s < 1.0, 0.0, params.a * np.exp((x + s) * params.b))
    return float(out) if out.ndim == 0 else out


def survivor_index(params: GompertzParams, x, T):
    """Probability that an x-aged individual survives to age x + T.

    Closed form of the Gompertz integral with the first year excluded:
    exp{-(a/b) e^{b x} (e^{b T} - e^{b})}.
    """
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(T < 1.0):
        raise ValueError("T must be >= 1")
    out = np.exp(-(params.a / params.b) * np.exp(params.b * x) * (np.exp(params.b * T) - np.exp(params.b)))
    return float(out) if out.ndim == 0 else out


def kappa(params: GompertzParams, x, T):
    """Payout-time density S(x, T) * mu(T, x + T)."""
    return survivor_index(params, x, T) * force(params, T, x)


def choose_t_max(params: GompertzParams, x: float, eps: float, grid_step: float = 0.25) -> float:
    """Smallest grid-aligned horizon with survivor index at or below eps."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if eps >= 1.0:
        return 1.0
    # Invert the closed form of the survivor index.
    t_exact = math.log(math.exp(params.b) + params.b * (-math.log(eps)) / (params.a * math.exp(params.b * x))) / params.b
    n = max(0, math.ceil((t_exact - 1.0) / grid_step - 1e-12))
    return 1.0 + n * grid_step


def maturity_nodes(params: GompertzParams, x: float, quad: QuadratureSpec) -> np.ndarray:
    """Trapezoid nodes from 1 to the eps-truncated horizon."""
    t_max = choose_t_max(params, x, quad.tail_eps, quad.dt)
    n = int(round((t_max - 1.0) / quad.dt))
    return 1.0 + quad.dt * np.arange(n + 1)


def kappa_mass(params: GompertzParams, x: float, quad: QuadratureSpec) -> float:
    """Trapezoid mass of kappa over the truncated maturity domain."""
    nodes = maturity_nodes(params, x, quad)
    return float(np.trapezoid(kappa(params, x, nodes), nodes))


def policy_value_t0(
    params: GompertzParams,
    curve_params: G2ppParams,
    x: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Time-zero discounted value of a unit whole-life benefit at age x.

    Composite trapezoid of kappa(x, T) * P(0, T) from T = 1 to the
    truncated horizon; the discount curve is evaluated at the initial
    deterministic state.
    """
    nodes = maturity_nodes(params, x, quad)
    p0 = _zero_bond_unchecked(curve_params, 0.0, curve_params.chi10, curve_params.chi20, nodes)
    return float(np.trapezoid(kappa(params, x, nodes) * p0, nodes))
