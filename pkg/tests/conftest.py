import os
import random
import sys

import pytest
from hypothesis import HealthCheck, settings

from revpomdp import fixtures

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def noisy_pair():
    return fixtures.noisy_pair()


@pytest.fixture
def chain():
    return fixtures.revealing_chain()


@pytest.fixture
def wc():
    return fixtures.wait_commit_revealing()


@pytest.fixture
def guess():
    return fixtures.guess_model()


def small_models(seed: int, count: int, **kw):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        out.append(fixtures.random_revealing(rng, rng.randint(2, 4), rng.randint(1, 3), **kw))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
