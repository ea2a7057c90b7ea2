"""Quadratic program for the optimal weights of a fixed bond basis.

Restricting candidate portfolios to a span of n evaluation instruments turns
the risk functional into beta' A beta - 2 B' beta + C, where A collects the
time-weighted cross-moments of the basis loadings, B their moments against
the exposure loading, and C the exposure's own moment.  The optimum solves
A beta = B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .curve import G2ppParams
from .engine import FactorPathSet
from .scans import BondPortfolio, _blocks, _check_sim, _coef_tables, _log_discount, _time_weights

_EIG_SLACK = 1e-10  # allowed negative eigenvalue, relative to trace(A)/n
_RIDGE_FALLBACK = 1e-10  # fallback ridge, relative to trace(A)/n


@dataclass(frozen=True)
class QuadraticForm:
    """Assembled quadratic risk F(beta) = beta'A beta - 2 B'beta + C."""

    A: np.ndarray
    B: np.ndarray
    C: float
    basis_labels: np.ndarray


@dataclass(frozen=True)
class QuadSolution:
    beta: np.ndarray
    value: float
    condition_estimate: float
    regularized: bool


def assemble(
    curve_params: G2ppParams,
    exposure: BondPortfolio,
    basis: Sequence[float],
    sim: FactorPathSet,
) -> QuadraticForm:
    """Accumulate A, B and C from one pass over a shared path set.

    Using the same paths for all three pieces makes evaluate() agree with a
    direct Monte-Carlo evaluation of the corresponding static portfolio up
    to floating-point roundoff, not just in distribution.
    """
    _check_sim(curve_params, sim)
    labels = np.asarray(basis, dtype=float)
    if labels.size == 0 or np.any(labels <= 1.0):
        raise ValueError("basis maturities must be a non-empty set above 1")
    if np.unique(labels).size != labels.size:
        raise ValueError("basis maturities must be distinct")

    times = sim.times
    wq = _time_weights(times)
    nb = labels.size
    b1, b2, a0 = _coef_tables(curve_params, times, labels)
    eb1, eb2, ea0 = _coef_tables(curve_params, times, exposure.maturities)
    s1, s2, rho = curve_params.s1, curve_params.s2, curve_params.rho

    A = np.zeros((nb, nb))
    B = np.zeros(nb)
    C = 0.0
    for s, e in _blocks(sim.n_paths):
        sl = slice(s, e)
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
            v1 = (-s1 * b1[j])[None, :] * pd
            v2 = (-s2 * b2[j])[None, :] * pd
            u1 = np.zeros(e - s)
            u2 = np.zeros(e - s)
            for k, (alpha_k, _) in enumerate(exposure.entries):
                pk = np.exp(ln_d[:, j] + ea0[j, k] - chi1[:, j] * eb1[j, k] - chi2[:, j] * eb2[j, k])
                u1 += alpha_k * (-s1 * eb1[j, k]) * pk
                u2 += alpha_k * (-s2 * eb2[j, k]) * pk
            A += wq[j] * (v1.T @ v1 + v2.T @ v2 + rho * (v1.T @ v2 + v2.T @ v1))
            B += wq[j] * (v1.T @ u1 + v2.T @ u2 + rho * (v1.T @ u2 + v2.T @ u1))
            C += wq[j] * float(np.sum(u1 * u1 + u2 * u2 + 2.0 * rho * (u1 * u2)))

    A /= sim.n_paths
    B /= sim.n_paths
    C /= sim.n_paths
    A = 0.5 * (A + A.T)

    floor = -_EIG_SLACK * np.trace(A) / nb
    if np.linalg.eigvalsh(A).min() < floor:
        raise ValueError("assembled moment matrix is not positive semidefinite")
    return QuadraticForm(A=A, B=B, C=float(C), basis_labels=labels)


def solve(form: QuadraticForm, ridge: float = 0.0) -> QuadSolution:
    """Solve (A + ridge I) beta = B by Cholesky, with an automatic fallback.

    If the factorization fails, the solve retries once with a ridge of
    1e-10 trace(A)/n and flags the result as regularized.
    """
    if ridge < 0.0:
        raise ValueError("ridge must be >= 0")
    n = form.basis_labels.size
    eye = np.eye(n)
    regularized = ridge > 0.0
    try:
        factor = cho_factor(form.A + ridge * eye, lower=True)
    except LinAlgError:
        ridge += _RIDGE_FALLBACK * np.trace(form.A) / n
        regularized = True
        try:
            factor = cho_factor(form.A + ridge * eye, lower=True)
        except LinAlgError as exc:
            raise ValueError("moment matrix is numerically singular even with ridge") from exc
    beta = cho_solve(factor, form.B)
    pivots = np.diag(factor[0]) ** 2
    cond = float(pivots.max() / pivots.min())
    return QuadSolution(
        beta=beta,
        value=evaluate(form, beta),
        condition_estimate=cond,
        regularized=regularized,
    )


def evaluate(form: QuadraticForm, beta) -> float:
    """Quadratic risk of a given weight vector on the assembled form."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != form.B.shape:
        raise ValueError("weight vector does not match the basis size")
    return float(beta @ form.A @ beta - 2.0 * form.B @ beta + form.C)


def basis_portfolio(form: QuadraticForm, beta) -> BondPortfolio:
    """Static portfolio holding beta_i units of the i-th basis bond."""
    beta = np.asarray(beta, dtype=float)
    return BondPortfolio(list(zip(beta, form.basis_labels)))
