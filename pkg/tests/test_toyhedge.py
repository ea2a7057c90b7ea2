import numpy as np
import pytest

from repliscan import (
    LognormalAsset,
    TwoAssetParams,
    ZeroRateClaim,
    bs_zero_rate,
    delta_hedge_risk,
    optimal_ratio,
    residual_risk_closed,
    residual_risk_mc,
)
from repliscan.validation import pde_residual_suite

from .conftest import combined_se

CONST = TwoAssetParams(s1=0.2, s2=0.3, rho=0.5, mode="constant-vol")
LOGN = TwoAssetParams(s1=0.2, s2=0.3, rho=0.5, x10=1.0, x20=1.0, mode="lognormal")


class TestOptimalRatio:
    def test_uncorrelated_gives_zero(self):
        params = TwoAssetParams(s1=0.2, s2=0.3, rho=0.0)
        assert optimal_ratio(params, 0.2, 0.3) == 0.0

    def test_perfect_correlation_equal_vols(self):
        params = TwoAssetParams(s1=0.2, s2=0.2, rho=1.0 - 1e-12)
        assert optimal_ratio(params, 0.2, 0.2) == pytest.approx(1.0, abs=1e-9)

    def test_grid_search_oracle(self):
        # minimize s1^2 - 2 rho phi s1 s2 + phi^2 s2^2 over a dense grid
        s1, s2, rho = 0.2, 0.3, -0.4
        params = TwoAssetParams(s1=s1, s2=s2, rho=rho)
        grid = np.linspace(-2.0, 2.0, 40_001)
        values = s1 * s1 - 2 * rho * grid * s1 * s2 + grid * grid * s2 * s2
        oracle = grid[np.argmin(values)]
        assert abs(optimal_ratio(params, s1, s2) - oracle) <= grid[1] - grid[0]

    def test_zero_denominator_guarded(self):
        with pytest.raises(ZeroDivisionError):
            optimal_ratio(CONST, 0.2, 0.0)


class TestResidualClosed:
    def test_constant_vol_value(self):
        params = TwoAssetParams(s1=0.2, s2=0.3, rho=0.0, mode="constant-vol")
        assert residual_risk_closed(params) == pytest.approx(0.02, rel=1e-14)

    def test_lognormal_value(self):
        params = TwoAssetParams(s1=0.2, s2=0.3, rho=0.0, x10=1.0, mode="lognormal")
        assert residual_risk_closed(params) == pytest.approx(0.020269354809705244, rel=1e-12)

    def test_vanishes_at_full_correlation(self):
        for mode in ("constant-vol", "lognormal"):
            tight = TwoAssetParams(s1=0.2, s2=0.3, rho=1.0 - 1e-12, mode=mode)
            unhedged = residual_risk_closed(TwoAssetParams(s1=0.2, s2=0.3, rho=0.0, mode=mode))
            assert residual_risk_closed(tight) < 1e-6 * unhedged

    def test_monotone_in_correlation_magnitude(self):
        values = [
            residual_risk_closed(TwoAssetParams(s1=0.2, s2=0.3, rho=r, mode="lognormal"))
            for r in (0.0, 0.25, 0.5, 0.9)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))
        for r in (0.25, 0.5, 0.9):
            plus = residual_risk_closed(TwoAssetParams(s1=0.2, s2=0.3, rho=r))
            minus = residual_risk_closed(TwoAssetParams(s1=0.2, s2=0.3, rho=-r))
            assert plus == pytest.approx(minus, rel=1e-14)


class TestResidualMonteCarlo:
    def test_constant_vol_matches_closed_form_exactly(self):
        est = residual_risk_mc(CONST, n_paths=200, n_steps=64, seed=1)
        # deterministic integrand: trapezoid of (1 - t) is exact
        assert est.mean == pytest.approx(residual_risk_closed(CONST), rel=1e-12)

    def test_lognormal_matches_closed_form(self):
        est = residual_risk_mc(LOGN, n_paths=400_000, n_steps=100, seed=2)
        assert abs(est.mean - residual_risk_closed(LOGN)) < 3 * est.std_error

    def test_suboptimal_constant_ratios_are_worse(self):
        opt = CONST.rho * CONST.s1 / CONST.s2
        best = residual_risk_closed(CONST)
        for shift in (-0.1, 0.1):
            est = residual_risk_mc(CONST, n_paths=100, n_steps=64, seed=3, ratio=opt + shift)
            assert est.mean > best + 3 * est.std_error
        logn_best = residual_risk_mc(LOGN, n_paths=100_000, n_steps=64, seed=4)
        for shift in (-0.1, 0.1):
            est = residual_risk_mc(LOGN, n_paths=100_000, n_steps=64, seed=4, ratio=opt + shift)
            assert est.mean - logn_best.mean > 3 * combined_se(est.std_error, logn_best.std_error)

    def test_unhedged_decoupled_assets(self):
        params = TwoAssetParams(s1=0.2, s2=0.3, rho=0.0, mode="constant-vol")
        est = residual_risk_mc(params, n_paths=100, n_steps=64, seed=5, ratio=0.0)
        assert est.mean == pytest.approx(0.02, rel=1e-12)


class TestBlackScholesZeroRate:
    def test_deep_in_the_money(self):
        claim = ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.2)
        price, delta = bs_zero_rate(claim, 0.0, 1e6)
        assert price == pytest.approx(1e6 - 1.0, rel=1e-9)
        assert delta == pytest.approx(1.0, abs=1e-12)

    def test_at_the_money_value(self):
        claim = ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.2)
        price, delta = bs_zero_rate(claim, 1.0, 1.0)
        assert price == pytest.approx(0.07965567455405798, rel=1e-12)
        assert delta == pytest.approx(0.5398278372770290, rel=1e-12)

    def test_monte_carlo_payoff_oracle(self):
        # zero-drift lognormal terminal spot, discounted payoff expectation
        claim = ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.2)
        rng = np.random.default_rng(11)
        z = rng.standard_normal(1_000_000)
        x_T = np.exp(-0.5 * claim.vol**2 * claim.expiry + claim.vol * np.sqrt(claim.expiry) * z)
        payoff = np.maximum(x_T - claim.strike, 0.0)
        se = payoff.std(ddof=1) / np.sqrt(payoff.size)
        price, _ = bs_zero_rate(claim, 0.0, 1.0)
        assert abs(payoff.mean() - price) < 3 * se

    def test_pde_residual_lattice(self):
        result = pde_residual_suite(ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.2))
        assert result["passed"]
        assert result["measured"] <= 1e-6

    def test_rejects_expired_claim(self):
        claim = ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.2)
        with pytest.raises(ValueError):
            bs_zero_rate(claim, 2.0, 1.0)


class TestDeltaHedgeRisk:
    CLAIM = ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.2)
    ASSET = LognormalAsset(x0=1.0, vol=0.2)

    def test_rebalancing_ladder_decreases_to_zero(self):
        estimates = [
            delta_hedge_risk(self.CLAIM, self.ASSET, steps, 10_000, n_steps=256, seed=7).mean
            for steps in (1, 2, 4, 8, 16, 32, 64)
        ]
        assert all(a > b for a, b in zip(estimates, estimates[1:]))
        assert estimates[0] / estimates[-1] >= 4.0

    def test_continuous_limit_small_vol(self):
        claim = ZeroRateClaim(strike=1.0, expiry=2.0, vol=0.05)
        asset = LognormalAsset(x0=1.0, vol=0.05)
        est = delta_hedge_risk(claim, asset, 128, 100_000, n_steps=128, seed=8)
        # hedging at every simulation node leaves no sampled mismatch
        assert est.mean == 0.0

    def test_unhedged_dominates(self):
        hedged = delta_hedge_risk(self.CLAIM, self.ASSET, 8, 20_000, n_steps=256, seed=9)
        naked = delta_hedge_risk(
            self.CLAIM, self.ASSET, 8, 20_000, n_steps=256, seed=9, delta_override=0.0
        )
        assert naked.mean > hedged.mean + 3 * combined_se(naked.std_error, hedged.std_error)

    def test_rejects_bad_rebalance_counts(self):
        with pytest.raises(ValueError):
            delta_hedge_risk(self.CLAIM, self.ASSET, 0, 10)
        with pytest.raises(ValueError):
            delta_hedge_risk(self.CLAIM, self.ASSET, 3, 10, n_steps=256)


class TestParamValidation:
    def test_modes_and_positivity(self):
        with pytest.raises(ValueError):
            TwoAssetParams(s1=0.2, s2=0.3, rho=0.5, mode="exotic")
        with pytest.raises(ValueError):
            TwoAssetParams(s1=0.0, s2=0.3, rho=0.5)
        with pytest.raises(ValueError):
            TwoAssetParams(s1=0.2, s2=0.3, rho=0.5, x10=0.0, mode="lognormal")
        with pytest.raises(ValueError):
            ZeroRateClaim(strike=1.0, expiry=0.9, vol=0.2)
