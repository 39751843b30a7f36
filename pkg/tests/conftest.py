import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from lvsemme import GenerationError, GeneratorConfig, generate_model

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_config(seed: int, max_c: int = 4, max_ml: int = 2, max_h: int = 2, **kw) -> GeneratorConfig:
    """Sizes drawn from the seed; at least one cogent variable."""
    r = np.random.default_rng(seed + 10_000)
    p_c = int(r.integers(1, max_c + 1))
    p_zc = int(r.integers(0, p_c + 1))
    p_y = p_c - p_zc
    p_ml = int(r.integers(0, max_ml + 1))
    p_h = int(r.integers(0, max_h + 1))
    if p_zc and not (p_y or p_ml):
        # the last measured variable in the order would have no possible child
        p_zc, p_y = p_zc - 1, p_y + 1
    if p_c + p_ml < 2:
        p_h = 0
    return GeneratorConfig(p_Y=p_y, p_ZC=p_zc, p_ml=p_ml, p_H=p_h, seed=seed,
                           edge_density=float(r.uniform(0.3, 0.8)), **kw)


def draw_model(seed: int, **kw):
    try:
        return generate_model(random_config(seed, **kw))
    except GenerationError:
        return None


seeds = st.integers(min_value=0, max_value=2**31 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
