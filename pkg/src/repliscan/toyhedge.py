"""Low-dimensional verification fixtures for the risk functional.

Two classic situations with known answers: delta hedging of a call under a
zero short rate, where the risk vanishes in the continuous-rebalancing
limit, and hedging one risky asset with an imperfectly correlated one,
where the optimal ratio and the residual risk are available in closed form.
In lognormal mode the exposure's gradient is unbounded; the estimates rely
on finite second moments of the simulated prices rather than a uniform
bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .engine import RandomPlan, block_normals, blocks_of
from .scans import MCEstimate

_MODES = ("constant-vol", "lognormal")


@dataclass(frozen=True)
class TwoAssetParams:
    """Two correlated risky assets driving the residual-risk fixture."""

    s1: float
    s2: float
    rho: float
    x10: float = 1.0
    x20: float = 1.0
    mode: str = "constant-vol"

    def __post_init__(self):
        if self.s1 <= 0.0 or self.s2 <= 0.0:
            raise ValueError("volatility scales must be > 0")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.mode == "lognormal" and (self.x10 <= 0.0 or self.x20 <= 0.0):
            raise ValueError("initial values must be > 0 in lognormal mode")


@dataclass(frozen=True)
class ZeroRateClaim:
    """European call with expiry outside the unit interval, zero short rate."""

    strike: float
    expiry: float = 2.0
    vol: float = 0.2

    def __post_init__(self):
        if self.strike <= 0.0:
            raise ValueError("strike must be > 0")
        if self.expiry <= 1.0:
            raise ValueError("expiry must exceed the unit interval")
        if self.vol <= 0.0:
            raise ValueError("vol must be > 0")


@dataclass(frozen=True)
class LognormalAsset:
    """Zero-drift lognormal asset used by the delta-hedging fixture."""

    x0: float
    vol: float

    def __post_init__(self):
        if self.x0 <= 0.0 or self.vol <= 0.0:
            raise ValueError("asset initial value and vol must be > 0")


def optimal_ratio(params: TwoAssetParams, sigma1_t, sigma2_t):
    """Hedge ratio minimizing the squared mismatch: rho * sigma1 / sigma2."""
    sigma2_t = np.asarray(sigma2_t, dtype=float)
    if np.any(sigma2_t == 0.0):
        raise ZeroDivisionError("hedge-asset volatility must be nonzero")
    out = params.rho * np.asarray(sigma1_t, dtype=float) / sigma2_t
    return float(out) if out.ndim == 0 else out


def residual_risk_closed(params: TwoAssetParams) -> float:
    """Risk remaining at the optimal ratio, integrated over the unit interval.

    The optimal ratio leaves sigma1_t^2 (1 - rho^2) at each time; the
    (1 - t)-weighted time integral is 1/2 for constant volatility and
    (e^c - 1 - c) / c^2 with c = s1^2 for the lognormal second moment.
    """
    shrink = 1.0 - params.rho**2
    if params.mode == "constant-vol":
        return shrink * params.s1**2 * 0.5
    c = params.s1**2
    return shrink * params.x10**2 * (np.exp(c) - 1.0 - c) / c


def residual_risk_mc(
    params: TwoAssetParams,
    n_paths: int,
    n_steps: int,
    seed: int = 0,
    ratio: float | None = None,
) -> MCEstimate:
    """Monte-Carlo risk of hedging asset one with asset two.

    Applies the pathwise optimal ratio unless a constant ratio is supplied.
    Lognormal paths use exact stepping.
    """
    plan = RandomPlan(seed=seed, n_paths=n_paths)
    times = np.linspace(0.0, 1.0, n_steps + 1)
    dt = 1.0 / n_steps
    wq = _trap_weights(times) * (1.0 - times)
    mix = np.sqrt(1.0 - params.rho**2)

    values = np.empty(n_paths)
    for start, stop in blocks_of(n_paths):
        z = block_normals(plan, start, stop, n_steps, 2)
        z2 = params.rho * z[:, :, 0] + mix * z[:, :, 1]
        if params.mode == "constant-vol":
            nb = stop - start
            sig1 = np.full((nb, n_steps + 1), params.s1)
            sig2 = np.full((nb, n_steps + 1), params.s2)
        else:
            x1 = _lognormal_paths(params.x10, params.s1, dt, z[:, :, 0])
            x2 = _lognormal_paths(params.x20, params.s2, dt, z2)
            sig1 = params.s1 * x1
            sig2 = params.s2 * x2
        phi = optimal_ratio(params, sig1, sig2) if ratio is None else ratio
        hq = sig1 * sig1 - (2.0 * params.rho) * phi * sig1 * sig2 + phi * phi * sig2 * sig2
        values[start:stop] = hq @ wq

    return _estimate(values)


def bs_zero_rate(claim: ZeroRateClaim, t, x):
    """Zero-rate call value and delta at time t and spot x.

    The value solves the heat-type pricing equation with zero rate; its
    spatial derivative is the hedge ratio.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t < 0.0) or np.any(t >= claim.expiry):
        raise ValueError("need 0 <= t < expiry")
    if np.any(x <= 0.0):
        raise ValueError("spot must be > 0")
    s_rt = claim.vol * np.sqrt(claim.expiry - t)
    d_plus = (np.log(x / claim.strike) + 0.5 * s_rt**2) / s_rt
    d_minus = d_plus - s_rt
    price = x * ndtr(d_plus) - claim.strike * ndtr(d_minus)
    delta = ndtr(d_plus)
    if np.ndim(price) == 0:
        return float(price), float(delta)
    return price, delta


def delta_hedge_risk(
    claim: ZeroRateClaim,
    asset: LognormalAsset,
    rebalance_steps: int,
    n_paths: int,
    n_steps: int = 256,
    seed: int = 0,
    delta_override: float | None = None,
) -> MCEstimate:
    """Risk functional of a discretely rebalanced delta hedge.

    The hedge holds the delta computed at the last rebalance time; the
    mismatch against the current delta accumulates through the squared
    asset volatility with weight (1 - t).  Halving the rebalance interval
    shrinks the estimate toward zero.
    """
    if rebalance_steps < 1:
        raise ValueError("rebalance_steps must be >= 1")
    if n_steps % rebalance_steps != 0:
        raise ValueError("n_steps must be a multiple of rebalance_steps")
    stride = n_steps // rebalance_steps
    plan = RandomPlan(seed=seed, n_paths=n_paths)
    times = np.linspace(0.0, 1.0, n_steps + 1)
    dt = 1.0 / n_steps
    wq = _trap_weights(times) * (1.0 - times)

    values = np.empty(n_paths)
    for start, stop in blocks_of(n_paths):
        z = block_normals(plan, start, stop, n_steps, 1)[:, :, 0]
        x = _lognormal_paths(asset.x0, asset.vol, dt, z)
        held = np.empty(stop - start)
        acc = np.zeros(stop - start)
        for j, tj in enumerate(times):
            _, delta = bs_zero_rate(claim, tj, x[:, j])
            if delta_override is not None:
                held_j = np.full_like(delta, delta_override)
            else:
                if j % stride == 0:
                    held = delta
                held_j = held
            gap = delta - held_j
            acc += wq[j] * gap * gap * (asset.vol * x[:, j]) ** 2
        values[start:stop] = acc

    return _estimate(values)


def _lognormal_paths(x0: float, vol: float, dt: float, z: np.ndarray) -> np.ndarray:
    """Exact zero-drift lognormal paths from per-step standard normals."""
    log_steps = -0.5 * vol * vol * dt + vol * np.sqrt(dt) * z
    out = np.empty((z.shape[0], z.shape[1] + 1))
    out[:, 0] = x0
    out[:, 1:] = x0 * np.exp(np.cumsum(log_steps, axis=1))
    return out


def _trap_weights(times: np.ndarray) -> np.ndarray:
    w = np.empty_like(times)
    w[1:-1] = 0.5 * (times[2:] - times[:-2])
    w[0] = 0.5 * (times[1] - times[0])
    w[-1] = 0.5 * (times[-1] - times[-2])
    return w


def _estimate(values: np.ndarray) -> MCEstimate:
    n = values.size
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(float(values.mean()), se, n)
