import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from hypercantor.system import make_builtin  # noqa: E402

settings.register_profile("repo", max_examples=40, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def middle_third():
    return make_builtin("middle-third")


@pytest.fixture(scope="session")
def perturbed():
    return make_builtin("perturbed", (0.1, 0.1))


@pytest.fixture(scope="session")
def linear_quarter_half():
    return make_builtin("linear", (0.25, 0.5))


@pytest.fixture(scope="session")
def conjugated():
    return make_builtin("conjugated", (0.3,), base={"family": "middle-third"})


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
