import pytest
from hypothesis import HealthCheck, settings

from amalgamlab.amalgam import default_amalgam
from amalgamlab.metric import DistanceOracle

settings.register_profile(
    "repo", deadline=None, max_examples=200,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def M():
    return default_amalgam()


@pytest.fixture(scope="session")
def oracle(M):
    return DistanceOracle(M, forward_radius=4)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
