import pytest
from hypothesis import HealthCheck, settings

import trapbasis as tb

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def slope_profile():
    return tb.ProfileFunction.from_expression("1+y/2", lower=0.9, upper=1.6)


@pytest.fixture(scope="session")
def unit_profile():
    return tb.ProfileFunction.constant(1.0)


@pytest.fixture(scope="session")
def slope_trapezoid(slope_profile):
    return tb.Trapezoid(slope_profile)
