import math

import numpy as np
import pytest
from hypothesis import settings

from lctjitter.lct import LctParams
from lctjitter.stochastic import NOISE, RandomProcessSpec

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def ref_params():
    return LctParams.reference()


@pytest.fixture
def tone():
    return RandomProcessSpec.reference_tone(seed=11)


@pytest.fixture
def noise(ref_params):
    return RandomProcessSpec(NOISE, 0.0, -ref_params.chirp_rate, 10 * math.pi, seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
