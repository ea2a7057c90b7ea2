"""Monte-Carlo replication scans under a two-factor Gaussian short-rate model.

The package evaluates and minimizes time-weighted replication risk for two
problems: substituting a fixed-income portfolio by a single bond of optimal
maturity, and substituting a whole-life insurance portfolio by an optimal
model-points contract.
"""

from .curve import (
    CurveState,
    G2ppParams,
    VolLoading,
    b_factor,
    discount_factor,
    discounted_bond,
    h_inner,
    h_norm_sq,
    initial_state,
    integrated_variance,
    shift_integral,
    vol_loading,
    zero_bond,
)
from .engine import (
    FactorPathSet,
    RandomPlan,
    TimeGrid,
    joint_increment_covariance,
    make_time_grid,
    ou_step,
    simulate,
    simulate_horizon,
)
from .mortality import (
    AgeDomain,
    GompertzParams,
    QuadratureSpec,
    choose_t_max,
    force,
    kappa,
    kappa_mass,
    policy_value_t0,
    survivor_index,
)
from .quadform import QuadraticForm, QuadSolution, assemble, evaluate, solve
from .scans import (
    BondPortfolio,
    MCEstimate,
    PolicyPortfolio,
    RiskScan,
    bond_alpha,
    bond_risk_scan,
    find_minimum,
    life_alpha,
    life_risk_scan,
    portfolio_mismatch_risk,
    variance_identity_check,
)
from .toyhedge import (
    LognormalAsset,
    TwoAssetParams,
    ZeroRateClaim,
    bs_zero_rate,
    delta_hedge_risk,
    optimal_ratio,
    residual_risk_closed,
    residual_risk_mc,
)

__version__ = "0.1.0"
