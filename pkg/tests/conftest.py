import numpy as np
import pytest

from repliscan import (
    G2ppParams,
    GompertzParams,
    RandomPlan,
    make_time_grid,
    simulate,
)

# Model parameters of the published two-factor example (affine shift
# phi(t) = 0.01 + 0.15 t, correlation -0.01).
FIG1 = G2ppParams(a1=0.12, a2=0.10, s1=0.16, s2=0.15, rho=-0.01, phi1=0.01, phi2=0.15)
GOMPERTZ = GompertzParams(a=3e-4, b=0.06)


@pytest.fixture(scope="session")
def fig1_params() -> G2ppParams:
    return FIG1


@pytest.fixture(scope="session")
def gompertz() -> GompertzParams:
    return GOMPERTZ


@pytest.fixture(scope="session")
def sim10k(fig1_params):
    return simulate(fig1_params, make_time_grid(100), RandomPlan(seed=101, n_paths=10_000))


@pytest.fixture(scope="session")
def sim100k(fig1_params):
    return simulate(fig1_params, make_time_grid(100), RandomPlan(seed=707, n_paths=100_000))


def combined_se(*ses: float) -> float:
    return float(np.sqrt(sum(se * se for se in ses)))
