"""
Shared pytest configuration

Slow acceptance studies only run with OOBF_RUN_SLOW=1. Hypothesis profiles:
"fast" (default) and "thorough" (HYPOTHESIS_PROFILE=thorough).
"""

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "fast",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance study (set OOBF_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("OOBF_RUN_SLOW", "").lower() in ("1", "true", "yes"):
        return
    skip_slow = pytest.mark.skip(reason="set OOBF_RUN_SLOW=1 to run acceptance studies")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
