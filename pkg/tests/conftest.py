import math

import pytest

from basketfd import MarketParams


@pytest.fixture(scope="session")
def params():
    """Standard two-asset setup used throughout the experiments."""
    return MarketParams(
        sigma1=0.25,
        sigma2=0.35,
        r=math.log(1.05),
        rho12=0.8,
        omega1=0.35,
        omega2=0.65,
        K=10.0,
        T=1.0,
        gamma=0.25,
    )


def make_params(**kw):
    base = dict(
        sigma1=0.25, sigma2=0.35, r=math.log(1.05), rho12=0.8,
        omega1=0.35, omega2=0.65, K=10.0, T=1.0, gamma=0.25,
    )
    base.update(kw)
    return MarketParams(**base)
