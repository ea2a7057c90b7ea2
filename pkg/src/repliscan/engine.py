"""Exact joint simulation of the two short-rate factors and their time integrals.

The factors are correlated Ornstein-Uhlenbeck processes; together with their
running integrals they form a 4-dimensional Gaussian state whose one-step
transition is known in closed form.  Stepping with the exact transition keeps
the discount factor free of time-discretization bias at any step size.

Randomness is organised as one counter-based stream per path, keyed by
(seed, path index), so any partition of the paths across workers reproduces
the same draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import G2ppParams

# Fixed partition used for blockwise evaluation; results never depend on it
# because every path owns its stream.
BLOCK_SIZE = 16384

_STATE_DIM = 4  # (chi1, chi2, y1, y2)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = j / n_steps on the unit interval."""

    n_steps: int
    times: np.ndarray

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps


def make_time_grid(n_steps: int) -> TimeGrid:
    """Build the uniform grid on [0, 1] with the given number of steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    return TimeGrid(n_steps=int(n_steps), times=np.linspace(0.0, 1.0, int(n_steps) + 1))


@dataclass(frozen=True)
class RandomPlan:
    """Seed and substream layout for a reproducible path set.

    Each path draws from a Philox stream keyed by (seed, path index), so the
    draws of path i depend only on (seed, i) and never on evaluation order
    or on how paths are grouped into blocks.
    """

    seed: int
    n_paths: int
    scheme: str = "philox-per-path"

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.scheme != "philox-per-path":
            raise ValueError(f"unknown substream scheme: {self.scheme!r}")

    def path_generator(self, path_index: int) -> np.random.Generator:
        key = np.array([self.seed, path_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def blocks_of(n_paths: int) -> list[tuple[int, int]]:
    """The fixed path partition used for blockwise accumulation."""
    return [(s, min(s + BLOCK_SIZE, n_paths)) for s in range(0, n_paths, BLOCK_SIZE)]


def block_normals(plan: RandomPlan, start: int, stop: int, n_steps: int, width: int) -> np.ndarray:
    """Standard-normal draws for paths [start, stop), shape (stop-start, n_steps, width)."""
    out = np.empty((stop - start, n_steps, width))
    for i in range(start, stop):
        out[i - start] = plan.path_generator(i).standard_normal((n_steps, width))
    return out


def ou_step(chi, a: float, sigma: float, dt: float, z):
    """One exact Ornstein-Uhlenbeck transition chi -> chi(t + dt).

    Args:
        chi: current factor value (scalar or array).
        a: mean-reversion speed, > 0.
        sigma: diffusion coefficient, >= 0.
        dt: step size in years, > 0.
        z: standard normal draw(s), broadcastable against chi.
    """
    if a <= 0.0:
        raise ValueError("mean reversion a must be > 0")
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    decay = np.exp(-a * dt)
    std = sigma * np.sqrt(-np.expm1(-2.0 * a * dt) / (2.0 * a))
    return chi * decay + std * np.asarray(z)


def _b(c: float, tau):
    """(1 - e^{-c tau}) / c, evaluated stably for small c*tau."""
    return -np.expm1(-c * np.asarray(tau, dtype=float)) / c


def joint_increment_covariance(params: G2ppParams, dt: float) -> np.ndarray:
    """Exact one-step covariance of (d chi1, d chi2, d Y1, d Y2).

    Y_i is the running integral of chi_i.  Entries follow from the moving-
    average representation of the OU process: conditional on the current
    state, the increment of chi_i loads the Brownian increment at lag tau
    with kernel e^{-a_i tau} and the increment of Y_i with kernel
    (1 - e^{-a_i tau}) / a_i.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    if abs(params.rho) >= 1.0:
        raise ValueError("|rho| must be < 1")
    a1, a2 = params.a1, params.a2
    s1, s2, rho = params.s1, params.s2, params.rho

    b1, b2 = _b(a1, dt), _b(a2, dt)
    b11, b22, b12 = _b(2.0 * a1, dt), _b(2.0 * a2, dt), _b(a1 + a2, dt)

    cov = np.zeros((_STATE_DIM, _STATE_DIM))
    cov[0, 0] = s1 * s1 * b11
    cov[1, 1] = s2 * s2 * b22
    cov[0, 1] = rho * s1 * s2 * b12
    cov[0, 2] = s1 * s1 * (b1 - b11) / a1
    cov[1, 3] = s2 * s2 * (b2 - b22) / a2
    cov[0, 3] = rho * s1 * s2 * (b1 - b12) / a2
    cov[1, 2] = rho * s1 * s2 * (b2 - b12) / a1
    cov[2, 2] = s1 * s1 * (dt - 2.0 * b1 + b11) / (a1 * a1)
    cov[3, 3] = s2 * s2 * (dt - 2.0 * b2 + b22) / (a2 * a2)
    cov[2, 3] = rho * s1 * s2 * (dt - b1 - b2 + b12) / (a1 * a2)
    return cov + np.triu(cov, 1).T


def _gaussian_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix L with L L^T = cov; tolerates the semidefinite (zero-vol) case."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class FactorPathSet:
    """Per-path, per-time factor values and integrals on a time grid.

    Arrays have shape (n_paths, n_times).  chi_i start at the configured
    initial values and y_i at zero on every path.
    """

    params: G2ppParams
    grid: TimeGrid
    plan: RandomPlan
    chi1: np.ndarray
    chi2: np.ndarray
    y1: np.ndarray
    y2: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.chi1.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def _simulate_raw(params: G2ppParams, times: np.ndarray, plan: RandomPlan):
    """Exact stepping of (chi1, chi2, y1, y2) along an arbitrary increasing grid."""
    n_steps = len(times) - 1
    n = plan.n_paths
    chi1 = np.empty((n, n_steps + 1))
    chi2 = np.empty((n, n_steps + 1))
    y1 = np.empty((n, n_steps + 1))
    y2 = np.empty((n, n_steps + 1))
    chi1[:, 0] = params.chi10
    chi2[:, 0] = params.chi20
    y1[:, 0] = 0.0
    y2[:, 0] = 0.0

    dts = np.diff(times)
    factors: dict[float, tuple] = {}
    for dt in dts:
        if dt <= 0.0:
            raise ValueError("times must be strictly increasing")
        key = float(dt)
        if key not in factors:
            L = _gaussian_factor(joint_increment_covariance(params, key))
            factors[key] = (
                np.exp(-params.a1 * key),
                np.exp(-params.a2 * key),
                _b(params.a1, key),
                _b(params.a2, key),
                L.T.copy(),
            )

    for start, stop in blocks_of(n):
        z = block_normals(plan, start, stop, n_steps, _STATE_DIM)
        sl = slice(start, stop)
        for j, dt in enumerate(dts):
            e1, e2, b1, b2, Lt = factors[float(dt)]
            inc = z[:, j, :] @ Lt
            c1, c2 = chi1[sl, j], chi2[sl, j]
            chi1[sl, j + 1] = c1 * e1 + inc[:, 0]
            chi2[sl, j + 1] = c2 * e2 + inc[:, 1]
            y1[sl, j + 1] = y1[sl, j] + c1 * b1 + inc[:, 2]
            y2[sl, j + 1] = y2[sl, j] + c2 * b2 + inc[:, 3]
    return chi1, chi2, y1, y2


def simulate(params: G2ppParams, grid: TimeGrid, plan: RandomPlan) -> FactorPathSet:
    """Simulate the factor set on the unit-interval grid.

    Output is bit-identical for identical (params, grid, plan), independent
    of how many workers or blocks evaluate the paths.
    """
    chi1, chi2, y1, y2 = _simulate_raw(params, grid.times, plan)
    return FactorPathSet(params=params, grid=grid, plan=plan, chi1=chi1, chi2=chi2, y1=y1, y2=y2)


def simulate_horizon(params: G2ppParams, horizon: float, n_steps: int, plan: RandomPlan):
    """Exact factor stepping out to an arbitrary horizon.

    Returns (times, chi1, chi2, y1, y2).  Used by discount-factor oracles
    that need the integrated factors beyond the unit interval.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be > 0")
    times = np.linspace(0.0, horizon, n_steps + 1)
    chi1, chi2, y1, y2 = _simulate_raw(params, times, plan)
    return times, chi1, chi2, y1, y2
