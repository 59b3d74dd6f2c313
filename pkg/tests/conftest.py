import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def usnich():
    from toricstab import MonomialSupport, RationalMapData, tropicalize

    return tropicalize(
        RationalMapData(
            MonomialSupport([(1, 1)]),
            MonomialSupport([(0, 0), (0, 1)]),
            MonomialSupport([(1, 0)]),
        )
    )
