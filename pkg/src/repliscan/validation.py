"""Consistency suites behind the `validate` subcommand.

Each check returns a dict with the measured statistic, its threshold and a
pass flag; the CLI aggregates them into the JSON summary and the exit code.
"""

from __future__ import annotations

import numpy as np

from . import curve as _curve
from .curve import G2ppParams
from .engine import FactorPathSet
from .mortality import AgeDomain, GompertzParams, QuadratureSpec, kappa_mass
from .scans import BondPortfolio, variance_identity_check
from .toyhedge import ZeroRateClaim, bs_zero_rate

# Step fine enough that trapezoid error stays inside the mass window; the
# criterion gauges the survivor-tail truncation, not the scan quadrature.
_MASS_DT = 0.0625

_ROUNDOFF = 1e-12  # zero-variance comparisons allow float roundoff only


def _zscore(diff: float, se: float, scale: float = 1.0) -> float:
    """|diff| in units of the standard error, with a roundoff floor.

    The floor keeps deterministic (zero-volatility) runs meaningful, where
    both the difference and the sample error are pure float dust.
    """
    return abs(diff) / (se + _ROUNDOFF * max(scale, 1.0) / 3.0)


def martingale_suite(params: G2ppParams, sim: FactorPathSet) -> dict:
    """Sample means of discounted bonds against their time-zero prices."""
    times = sim.times
    worst = 0.0
    cells = []
    state0 = _curve.initial_state(params)
    for t in (0.25, 0.5, 1.0):
        j = int(np.argmin(np.abs(times - t)))
        state = _curve.CurveState(
            t=float(times[j]), chi1=sim.chi1[:, j], chi2=sim.chi2[:, j],
            y1=sim.y1[:, j], y2=sim.y2[:, j],
        )
        for T in (2.0, 5.0, 10.0):
            p = np.asarray(_curve.discounted_bond(params, state, T))
            p0 = _curve.discounted_bond(params, state0, T)
            se = float(p.std(ddof=1) / np.sqrt(p.size)) if p.size > 1 else 0.0
            z = _zscore(float(p.mean()) - p0, se, p0)
            worst = max(worst, z)
            cells.append({"t": float(times[j]), "T": T, "z": z})
    return {"passed": bool(worst <= 3.0), "measured": float(worst), "threshold": 3.0, "cells": cells}


def variance_identity_suite(
    params: G2ppParams, portfolio: BondPortfolio, sim: FactorPathSet
) -> dict:
    """Variance of the value gap against the integrated loading mismatch."""
    mats = np.sort(portfolio.maturities)
    candidates = [float(mats[0]), float(mats[len(mats) // 2]), float(mats[-1])]
    if len(set(candidates)) < 3:
        candidates = [2.0, 5.0, 8.0]
    worst = 0.0
    cells = []
    for t in (0.5, 1.0):
        j = int(np.argmin(np.abs(sim.times - t)))
        tj = float(sim.times[j])
        for cand in candidates:
            lhs, rhs = variance_identity_check(params, portfolio, cand, tj, sim)
            se = float(np.hypot(lhs.std_error, rhs.std_error))
            z = _zscore(lhs.mean - rhs.mean, se, max(abs(lhs.mean), 1.0))
            worst = max(worst, z)
            cells.append({"t": tj, "candidate": cand, "lhs": lhs.mean, "rhs": rhs.mean, "z": z})
    return {"passed": bool(worst <= 3.0), "measured": float(worst), "threshold": 3.0, "cells": cells}


def kappa_mass_suite(gparams: GompertzParams, domain: AgeDomain) -> dict:
    """Total payout-density mass under the survivor-tail truncation."""
    quad = QuadratureSpec(dt=_MASS_DT, tail_eps=1e-8)
    ages = [domain.x_min, 0.5 * (domain.x_min + domain.x_max), domain.x_max]
    masses = [kappa_mass(gparams, x, quad) for x in ages]
    low, high = min(masses), max(masses)
    passed = low >= 1.0 - 1e-6 and high <= 1.0 + _ROUNDOFF
    return {
        "passed": bool(passed),
        "measured": float(low),
        "threshold": 1.0 - 1e-6,
        "cells": [{"x": x, "mass": m} for x, m in zip(ages, masses)],
    }


def pde_residual_suite(claim: ZeroRateClaim) -> dict:
    """Finite-difference residual of the zero-rate pricing equation.

    Central differences on an interior 10 x 10 lattice of times in the unit
    interval and spots around the strike.  The time step is 1e-5 relative;
    the spot step is 1e-4 relative because a second difference at 1e-5
    sits at the double-precision noise floor, above the pass threshold.
    """
    ts = np.linspace(0.05, 0.95, 10)
    xs = np.linspace(0.6 * claim.strike, 1.6 * claim.strike, 10)
    ht = 1e-5 * claim.expiry
    worst = 0.0
    for t in ts:
        for x in xs:
            price, _ = bs_zero_rate(claim, t, x)
            hx = 1e-4 * x
            up, _ = bs_zero_rate(claim, t + ht, x)
            down, _ = bs_zero_rate(claim, t - ht, x)
            dt_f = (up - down) / (2.0 * ht)
            pxu, _ = bs_zero_rate(claim, t, x + hx)
            pxd, _ = bs_zero_rate(claim, t, x - hx)
            dxx_f = (pxu - 2.0 * price + pxd) / (hx * hx)
            residual = dt_f + 0.5 * claim.vol**2 * x * x * dxx_f
            worst = max(worst, abs(residual) / price)
    return {"passed": bool(worst <= 1e-6), "measured": float(worst), "threshold": 1e-6}
