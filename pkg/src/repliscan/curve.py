"""Closed-form discounted bond prices and diffusion loadings.

The short rate is the sum of two correlated mean-reverting factors plus an
affine deterministic shift.  Zero-coupon prices, money-market discount
factors and the two-component diffusion loading of a discounted bond all
have closed forms in the factor state; the correlation between the two
Brownian drivers enters norms through the 2x2 Gram matrix [[1, rho], [rho, 1]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class G2ppParams:
    """Parameters of the two-additive-factor Gaussian short-rate model.

    a1, a2: mean-reversion speeds (per annum), > 0.
    s1, s2: factor volatilities (per annum), >= 0 (zero gives the
        deterministic limit used by validation runs).
    rho: instantaneous correlation of the drivers, in (-1, 1).
    chi10, chi20: initial factor values.
    phi1, phi2: level and slope of the affine shift phi(t) = phi1 + phi2 t.
    """

    a1: float
    a2: float
    s1: float
    s2: float
    rho: float
    chi10: float = 0.0
    chi20: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        if self.a1 <= 0.0 or self.a2 <= 0.0:
            raise ValueError("mean reversions a1, a2 must be > 0")
        if self.s1 < 0.0 or self.s2 < 0.0:
            raise ValueError("volatilities s1, s2 must be >= 0")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")


@dataclass(frozen=True)
class CurveState:
    """Factor state at a time t in the unit interval.

    chi1, chi2 are the factor values and y1, y2 their integrals from 0 to t.
    Fields may be scalars or per-path arrays of a common shape.
    """

    t: float
    chi1: object
    chi2: object
    y1: object
    y2: object

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("state time must lie in [0, 1]")


def initial_state(params: G2ppParams) -> CurveState:
    return CurveState(t=0.0, chi1=params.chi10, chi2=params.chi20, y1=0.0, y2=0.0)


@dataclass(frozen=True)
class VolLoading:
    """Diffusion loading of a discounted bond on the two Brownian drivers."""

    v1: object
    v2: object


def shift_integral(params: G2ppParams, t):
    """Integral of the deterministic shift from 0 to t."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    out = params.phi1 * t + 0.5 * params.phi2 * t * t
    return float(out) if out.ndim == 0 else out


def b_factor(a: float, t, T):
    """Affine maturity coefficient (1 - e^{-a (T-t)}) / a."""
    if a <= 0.0:
        raise ValueError("a must be > 0")
    tau = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(tau < 0.0):
        raise ValueError("T must be >= t")
    out = -np.expm1(-a * tau) / a
    return float(out) if out.ndim == 0 else out


def _int_bb(a1: float, a2: float, tau):
    """Integral over [0, tau] of B_{a1}(u) * B_{a2}(u)."""
    tau = np.asarray(tau, dtype=float)
    term = tau - _bc(a1, tau) - _bc(a2, tau) + _bc(a1 + a2, tau)
    return term / (a1 * a2)


def _bc(c: float, tau):
    return -np.expm1(-c * np.asarray(tau, dtype=float)) / c


def integrated_variance(params: G2ppParams, t, T):
    """Conditional variance of the integral of (chi1 + chi2) over [t, T].

    Three terms: one per factor plus a cross term proportional to
    rho * s1 * s2; each reduces to an integral of products of the affine
    coefficients, evaluated in closed form.
    """
    tau = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(tau < 0.0):
        raise ValueError("T must be >= t")
    v = (
        params.s1**2 * _int_bb(params.a1, params.a1, tau)
        + params.s2**2 * _int_bb(params.a2, params.a2, tau)
        + 2.0 * params.rho * params.s1 * params.s2 * _int_bb(params.a1, params.a2, tau)
    )
    return float(v) if v.ndim == 0 else v


def _zero_bond_unchecked(params: G2ppParams, t, chi1, chi2, T):
    """P(t, T) from the factor state, without the scan-domain restriction."""
    log_p = (
        -(shift_integral(params, T) - shift_integral(params, t))
        - b_factor(params.a1, t, T) * np.asarray(chi1)
        - b_factor(params.a2, t, T) * np.asarray(chi2)
        + 0.5 * integrated_variance(params, t, T)
    )
    out = np.exp(log_p)
    return float(out) if np.ndim(out) == 0 else out


def zero_bond(params: G2ppParams, state: CurveState, T: float):
    """Zero-coupon bond price P(t, T) at the given state.

    Maturities inside the first year are outside the tradable domain and
    are rejected.
    """
    if T <= state.t:
        raise ValueError("maturity must exceed the state time")
    if T <= 1.0:
        raise ValueError("maturity must exceed the unit interval")
    return _zero_bond_unchecked(params, state.t, state.chi1, state.chi2, T)


def discount_factor(params: G2ppParams, state: CurveState):
    """Money-market discount factor D(t) = exp(-y1 - y2 - shift integral)."""
    out = np.exp(
        -np.asarray(state.y1) - np.asarray(state.y2) - shift_integral(params, state.t)
    )
    return float(out) if np.ndim(out) == 0 else out


def discounted_bond(params: G2ppParams, state: CurveState, T: float):
    """Discounted bond price p_t(T) = D(t) P(t, T); a martingale in t."""
    return discount_factor(params, state) * zero_bond(params, state, T)


def vol_loading(params: G2ppParams, state: CurveState, T: float) -> VolLoading:
    """Diffusion loading of p_t(T) on the two correlated drivers.

    p_t(T) is an exponential martingale in the factors, so each component
    is the price times the factor's log-price sensitivity: -s_i B_i(t, T).
    """
    p = discounted_bond(params, state, T)
    b1 = b_factor(params.a1, state.t, T)
    b2 = b_factor(params.a2, state.t, T)
    return VolLoading(v1=-params.s1 * b1 * p, v2=-params.s2 * b2 * p)


def h_inner(rho: float, u: VolLoading, v: VolLoading):
    """Inner product of loadings in the correlated driver metric."""
    if abs(rho) >= 1.0:
        raise ValueError("|rho| must be < 1")
    out = (
        np.asarray(u.v1) * np.asarray(v.v1)
        + np.asarray(u.v2) * np.asarray(v.v2)
        + rho * (np.asarray(u.v1) * np.asarray(v.v2) + np.asarray(u.v2) * np.asarray(v.v1))
    )
    return float(out) if np.ndim(out) == 0 else out


def h_norm_sq(rho: float, v: VolLoading):
    """Squared norm of a loading; nonnegative whenever |rho| < 1."""
    return h_inner(rho, v, v)
