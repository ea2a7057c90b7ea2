"""Monte-Carlo evaluation of the time-weighted replication risk functionals.

Each functional averages, over simulated factor paths, the time integral of
the squared mismatch between the diffusion loading of a fixed exposure and
that of a single candidate instrument, weighted by (1 - t) over the unit
interval.  Candidate nominals are pinned so the candidate matches the
exposure's value at time zero, which makes a portfolio's own label an exact
(pathwise) zero of its scan.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import curve as _curve
from .curve import G2ppParams
from .engine import FactorPathSet, blocks_of as _blocks
from .mortality import GompertzParams, QuadratureSpec, kappa, maturity_nodes, policy_value_t0


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo mean with its standard error."""

    mean: float
    std_error: float
    n_paths: int

    def __post_init__(self):
        if self.std_error < 0.0:
            raise ValueError("std_error must be >= 0")


@dataclass(frozen=True)
class BondPortfolio:
    """Fixed income exposure: (nominal, maturity) pairs with maturities > 1."""

    entries: tuple[tuple[float, float], ...]

    def __init__(self, entries):
        entries = tuple((float(a), float(T)) for a, T in entries)
        if not entries:
            raise ValueError("portfolio must not be empty")
        mats = [T for _, T in entries]
        if any(T <= 1.0 for T in mats):
            raise ValueError("bond maturities must exceed the unit interval")
        if len(set(mats)) != len(mats):
            raise ValueError("bond maturities must be distinct")
        object.__setattr__(self, "entries", entries)

    @property
    def nominals(self) -> np.ndarray:
        return np.array([a for a, _ in self.entries])

    @property
    def maturities(self) -> np.ndarray:
        return np.array([T for _, T in self.entries])


@dataclass(frozen=True)
class PolicyPortfolio:
    """Whole-life exposure: (count, age) pairs with nonnegative counts."""

    entries: tuple[tuple[float, float], ...]

    def __init__(self, entries):
        entries = tuple((float(a), float(x)) for a, x in entries)
        if not entries:
            raise ValueError("portfolio must not be empty")
        ages = [x for _, x in entries]
        if any(a < 0.0 for a, _ in entries):
            raise ValueError("policy counts must be >= 0")
        if any(x < 0.0 for x in ages):
            raise ValueError("ages must be >= 0")
        if len(set(ages)) != len(ages):
            raise ValueError("ages must be distinct")
        object.__setattr__(self, "entries", entries)

    @property
    def nominals(self) -> np.ndarray:
        return np.array([a for a, _ in self.entries])

    @property
    def ages(self) -> np.ndarray:
        return np.array([x for _, x in self.entries])


@dataclass(frozen=True)
class RiskScan:
    """Per-label Monte-Carlo estimates of a risk functional plus its refined minimizer."""

    labels: np.ndarray
    means: np.ndarray
    std_errors: np.ndarray
    n_paths: int
    minimizer_label: float
    minimizer_value: float

    @property
    def minimizer(self) -> tuple[float, float]:
        return (self.minimizer_label, self.minimizer_value)


# ---------------------------------------------------------------------------
# shared loading machinery


def _check_sim(curve_params: G2ppParams, sim: FactorPathSet):
    if sim.params != curve_params:
        raise ValueError("path set was simulated under different curve parameters")


def _time_weights(times: np.ndarray, weighted: bool = True) -> np.ndarray:
    """Trapezoid weights on the grid, optionally carrying the (1 - t) factor."""
    w = np.empty_like(times)
    w[1:-1] = 0.5 * (times[2:] - times[:-2])
    w[0] = 0.5 * (times[1] - times[0])
    w[-1] = 0.5 * (times[-1] - times[-2])
    return w * (1.0 - times) if weighted else w


def _coef_tables(params: G2ppParams, times: np.ndarray, mats: np.ndarray):
    """Per (time, maturity) tables: B1, B2 and the state-free log-price part."""
    tau = mats[None, :] - times[:, None]
    b1 = -np.expm1(-params.a1 * tau) / params.a1
    b2 = -np.expm1(-params.a2 * tau) / params.a2
    a0 = (
        -_curve.shift_integral(params, mats)[None, :]
        + _curve.shift_integral(params, times)[:, None]
        + 0.5 * _curve.integrated_variance(params, 0.0, tau)
    )
    return b1, b2, a0


def _log_discount(params: G2ppParams, sim: FactorPathSet, sl: slice) -> np.ndarray:
    return -(sim.y1[sl] + sim.y2[sl]) - _curve.shift_integral(params, sim.times)[None, :]


def _loading_columns(params, ln_d, chi1, chi2, b1_col, b2_col, a0_col):
    """Loading components over (paths, times) for one maturity."""
    pd = np.exp(ln_d + a0_col[None, :] - chi1 * b1_col[None, :] - chi2 * b2_col[None, :])
    return (-params.s1 * b1_col[None, :]) * pd, (-params.s2 * b2_col[None, :]) * pd


def _exposure_loading(params, portfolio: BondPortfolio, ln_d, chi1, chi2, tables):
    b1, b2, a0 = tables
    g1 = np.zeros_like(ln_d)
    g2 = np.zeros_like(ln_d)
    for k, (alpha_k, _) in enumerate(portfolio.entries):
        v1, v2 = _loading_columns(params, ln_d, chi1, chi2, b1[:, k], b2[:, k], a0[:, k])
        g1 += alpha_k * v1
        g2 += alpha_k * v2
    return g1, g2


def _run_blocks(tasks, workers: int):
    if workers <= 1:
        for task in tasks:
            task()
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for f in [pool.submit(t) for t in tasks]:
                f.result()


def _estimates(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = values.shape[0]
    means = values.mean(axis=0)
    if n > 1:
        ses = values.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        ses = np.zeros_like(means)
    return means, ses


# ---------------------------------------------------------------------------
# bond maturity scan


def bond_alpha(curve_params: G2ppParams, portfolio: BondPortfolio, T: float) -> float:
    """Candidate nominal that matches the exposure's value at time zero.

    Computed as a sum of price ratios so that a single-bond exposure scanned
    at its own maturity recovers the nominal exactly.
    """
    if T <= 1.0:
        raise ValueError("candidate maturity must exceed the unit interval")
    state0 = _curve.initial_state(curve_params)
    p0_T = _curve.zero_bond(curve_params, state0, T)
    total = 0.0
    for alpha_k, T_k in portfolio.entries:
        total += alpha_k * (_curve.zero_bond(curve_params, state0, T_k) / p0_T)
    return total


def bond_risk_scan(
    curve_params: G2ppParams,
    portfolio: BondPortfolio,
    t_grid: Sequence[float],
    sim: FactorPathSet,
    workers: int = 1,
) -> RiskScan:
    """Scan the replication risk of a single bond over candidate maturities."""
    _check_sim(curve_params, sim)
    labels = np.asarray(t_grid, dtype=float)
    if labels.size == 0 or np.any(labels <= 1.0):
        raise ValueError("candidate maturities must be a non-empty grid above 1")

    times = sim.times
    wq = _time_weights(times)
    port_tables = _coef_tables(curve_params, times, portfolio.maturities)
    cand_tables = _coef_tables(curve_params, times, labels)
    alphas = np.array([bond_alpha(curve_params, portfolio, T) for T in labels])

    values = np.zeros((sim.n_paths, labels.size))

    def block_task(sl: slice):
        def run():
            ln_d = _log_discount(curve_params, sim, sl)
            chi1, chi2 = sim.chi1[sl], sim.chi2[sl]
            g1, g2 = _exposure_loading(curve_params, portfolio, ln_d, chi1, chi2, port_tables)
            b1, b2, a0 = cand_tables
            for m in range(labels.size):
                v1, v2 = _loading_columns(curve_params, ln_d, chi1, chi2, b1[:, m], b2[:, m], a0[:, m])
                d1 = g1 - alphas[m] * v1
                d2 = g2 - alphas[m] * v2
                hq = d1 * d1 + d2 * d2 + (2.0 * curve_params.rho) * (d1 * d2)
                values[sl, m] = hq @ wq
        return run

    _run_blocks([block_task(slice(s, e)) for s, e in _blocks(sim.n_paths)], workers)

    means, ses = _estimates(values)
    label, value = _refine_minimum(labels, means)
    return RiskScan(labels, means, ses, sim.n_paths, label, value)


# ---------------------------------------------------------------------------
# model-points age scan


def life_alpha(
    curve_params: G2ppParams,
    mortality_params: GompertzParams,
    portfolio: PolicyPortfolio,
    x: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Model-point count matching the exposure's discounted value at time zero."""
    z_x = policy_value_t0(mortality_params, curve_params, x, quad)
    if z_x == 0.0:
        raise ValueError("policy value at the candidate age is zero")
    total = 0.0
    for alpha_k, x_k in portfolio.entries:
        total += alpha_k * (policy_value_t0(mortality_params, curve_params, x_k, quad) / z_x)
    return total


def life_risk_scan(
    curve_params: G2ppParams,
    mortality_params: GompertzParams,
    portfolio: PolicyPortfolio,
    x_grid: Sequence[float],
    sim: FactorPathSet,
    quad: QuadratureSpec = QuadratureSpec(),
    workers: int = 1,
) -> RiskScan:
    """Scan the model-points risk of a single age over candidate ages.

    The kappa-mismatch weights do not depend on paths or time, so they are
    folded into the maturity-quadrature weights once per candidate; each
    (path, time) then costs one weighted sum of discounted-bond loadings.
    """
    _check_sim(curve_params, sim)
    labels = np.asarray(x_grid, dtype=float)
    if labels.size == 0 or np.any(labels < 0.0):
        raise ValueError("candidate ages must be a non-empty nonnegative grid")

    youngest = min(labels.min(), portfolio.ages.min())
    nodes = maturity_nodes(mortality_params, youngest, quad)
    port_kappa = sum(
        alpha_k * kappa(mortality_params, x_k, nodes) for alpha_k, x_k in portfolio.entries
    )
    alphas = np.array(
        [life_alpha(curve_params, mortality_params, portfolio, x, quad) for x in labels]
    )
    mismatch = np.empty((nodes.size, labels.size))
    for c, x in enumerate(labels):
        mismatch[:, c] = port_kappa - alphas[c] * kappa(mortality_params, x, nodes)

    w_nodes = _time_weights(nodes, weighted=False)  # plain trapezoid over maturity
    W = mismatch * w_nodes[:, None]

    times = sim.times
    wq = _time_weights(times)
    b1, b2, a0 = _coef_tables(curve_params, times, nodes)

    # Long maturities are numerically dead: the discounted price carries
    # exp(a0 + lnD - B1 chi1 - B2 chi2), and the quadratic shift makes a0
    # collapse with T.  Drop nodes whose best-case weighted contribution sits
    # 14 decades below the largest one; the remaining sum cannot feel them.
    ln_d_max = -(sim.y1 + sim.y2).min(axis=0) - _curve.shift_integral(curve_params, times)
    exp_bound = (
        a0
        + ln_d_max[:, None]
        + b1 * np.abs(sim.chi1).max(axis=0)[:, None]
        + b2 * np.abs(sim.chi2).max(axis=0)[:, None]
    ).max(axis=0)
    ln_contrib = exp_bound + np.log(np.abs(W).max(axis=1) + 1e-300)
    keep = ln_contrib > ln_contrib.max() + np.log(1e-14)
    nodes, W, b1, b2, a0 = nodes[keep], W[keep], b1[:, keep], b2[:, keep], a0[:, keep]

    s1, s2, rho = curve_params.s1, curve_params.s2, curve_params.rho

    values = np.zeros((sim.n_paths, labels.size))

    def block_task(sl: slice):
        def run():
            ln_d = _log_discount(curve_params, sim, sl)
            chi1, chi2 = sim.chi1[sl], sim.chi2[sl]
            for j in range(times.size):
                if wq[j] == 0.0:
                    continue
                pd = np.exp(
                    ln_d[:, j][:, None]
                    + a0[j][None, :]
                    - np.outer(chi1[:, j], b1[j])
                    - np.outer(chi2[:, j], b2[j])
                )
                g1 = (-s1) * ((pd * b1[j][None, :]) @ W)
                g2 = (-s2) * ((pd * b2[j][None, :]) @ W)
                values[sl] += wq[j] * (g1 * g1 + g2 * g2 + (2.0 * rho) * (g1 * g2))
        return run

    _run_blocks([block_task(slice(s, e)) for s, e in _blocks(sim.n_paths)], workers)

    means, ses = _estimates(values)
    label, value = _refine_minimum(labels, means)
    return RiskScan(labels, means, ses, sim.n_paths, label, value)


# ---------------------------------------------------------------------------
# variance identity and direct evaluation


def variance_identity_check(
    curve_params: G2ppParams,
    portfolio: BondPortfolio,
    candidate: float,
    t: float,
    sim: FactorPathSet,
) -> tuple[MCEstimate, MCEstimate]:
    """Both sides of the variance identity at a grid time.

    Left: sample variance across paths of the value gap between the exposure
    and the pinned candidate at time t.  Right: time integral up to t of the
    path-averaged squared loading mismatch.  The two agree because the gap
    is a driftless stochastic integral of the mismatch.
    """
    _check_sim(curve_params, sim)
    times = sim.times
    hits = np.nonzero(np.abs(times - t) < 1e-12)[0]
    if hits.size == 0:
        raise ValueError("t must lie on the simulation grid")
    idx = int(hits[0])

    alpha_c = bond_alpha(curve_params, portfolio, candidate)
    all_mats = np.append(portfolio.maturities, candidate)
    tables = _coef_tables(curve_params, times, all_mats)
    weights = np.append(portfolio.nominals, -alpha_c)

    # trapezoid over [0, t] only, without the (1 - s) weight
    w = np.zeros_like(times)
    if idx > 0:
        w[1:idx] = 0.5 * (times[2 : idx + 1] - times[: idx - 1])
        w[0] = 0.5 * (times[1] - times[0])
        w[idx] = 0.5 * (times[idx] - times[idx - 1])

    n = sim.n_paths
    gap = np.empty(n)
    integral = np.zeros(n)
    b1, b2, a0 = tables
    for s, e in _blocks(n):
        sl = slice(s, e)
        ln_d = _log_discount(curve_params, sim, sl)
        chi1, chi2 = sim.chi1[sl], sim.chi2[sl]
        d1 = np.zeros_like(ln_d)
        d2 = np.zeros_like(ln_d)
        gap_b = np.zeros(e - s)
        for k, wk in enumerate(weights):
            v1, v2 = _loading_columns(curve_params, ln_d, chi1, chi2, b1[:, k], b2[:, k], a0[:, k])
            d1 += wk * v1
            d2 += wk * v2
            # discounted price recovered from the loading-free exponential
            pd_t = np.exp(
                ln_d[:, idx] + a0[idx, k] - chi1[:, idx] * b1[idx, k] - chi2[:, idx] * b2[idx, k]
            )
            gap_b += wk * pd_t
        hq = d1 * d1 + d2 * d2 + (2.0 * curve_params.rho) * (d1 * d2)
        integral[sl] = hq @ w
        gap[sl] = gap_b

    centered = gap - gap.mean()
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    lhs_var = float(np.var(gap, ddof=1)) if n > 1 else 0.0
    lhs_se = float(np.sqrt(max(m4 - m2 * m2, 0.0) / n))
    rhs_mean = float(integral.mean())
    rhs_se = float(integral.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return (
        MCEstimate(lhs_var, lhs_se, n),
        MCEstimate(rhs_mean, rhs_se, n),
    )


def portfolio_mismatch_risk(
    curve_params: G2ppParams,
    exposure: BondPortfolio,
    hedge: BondPortfolio,
    sim: FactorPathSet,
) -> MCEstimate:
    """Risk functional of a fixed hedge portfolio against the exposure.

    Direct Monte-Carlo evaluation of the (1 - t)-weighted squared loading
    mismatch between two static bond portfolios; the grid scans and the
    quadratic solver both reduce to this quantity.
    """
    _check_sim(curve_params, sim)
    times = sim.times
    wq = _time_weights(times)
    mats = np.append(exposure.maturities, hedge.maturities)
    weights = np.append(exposure.nominals, -hedge.nominals)
    b1, b2, a0 = _coef_tables(curve_params, times, mats)

    n = sim.n_paths
    values = np.empty(n)
    for s, e in _blocks(n):
        sl = slice(s, e)
        ln_d = _log_discount(curve_params, sim, sl)
        chi1, chi2 = sim.chi1[sl], sim.chi2[sl]
        d1 = np.zeros_like(ln_d)
        d2 = np.zeros_like(ln_d)
        for k, wk in enumerate(weights):
            v1, v2 = _loading_columns(curve_params, ln_d, chi1, chi2, b1[:, k], b2[:, k], a0[:, k])
            d1 += wk * v1
            d2 += wk * v2
        hq = d1 * d1 + d2 * d2 + (2.0 * curve_params.rho) * (d1 * d2)
        values[sl] = hq @ wq

    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(float(values.mean()), se, n)


# ---------------------------------------------------------------------------
# minimizer refinement


def _refine_minimum(labels: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    i = int(np.argmin(values))  # first hit resolves ties toward smaller labels
    if i == 0 or i == labels.size - 1 or values[i] == 0.0:
        return float(labels[i]), float(max(values[i], 0.0))
    x0, x1, x2 = labels[i - 1], labels[i], labels[i + 1]
    f0, f1, f2 = values[i - 1], values[i], values[i + 1]
    denom = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0)
    if denom == 0.0:
        return float(x1), float(f1)
    xs = x1 - 0.5 * ((x1 - x0) ** 2 * (f1 - f2) - (x1 - x2) ** 2 * (f1 - f0)) / denom
    xs = float(np.clip(xs, x0, x2))
    # value of the interpolating parabola at the vertex
    fs = (
        f0 * (xs - x1) * (xs - x2) / ((x0 - x1) * (x0 - x2))
        + f1 * (xs - x0) * (xs - x2) / ((x1 - x0) * (x1 - x2))
        + f2 * (xs - x0) * (xs - x1) / ((x2 - x0) * (x2 - x1))
    )
    return xs, float(max(fs, 0.0))


def find_minimum(scan: RiskScan) -> tuple[float, float]:
    """Refined argmin of a scan: parabola through the bracketing grid points."""
    if scan.labels.size == 0:
        raise ValueError("scan is empty")
    return _refine_minimum(scan.labels, scan.means)
