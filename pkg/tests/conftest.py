import cmath

import numpy as np
import pytest
from hypothesis import settings

from swipt.channel import ChannelState, Geometry, RicianParams, fixed_awgn, sample_rician
from swipt.model import SystemParams

settings.register_profile("swipt", max_examples=40, deadline=None)
settings.load_profile("swipt")

# static two-user channel, about 30 dB attenuation per link
AWGN_H = np.array([
    [0.0307 * cmath.exp(1j * 1.7683), 0.0241 * cmath.exp(-1j * 2.6973)],
    [0.0349 * cmath.exp(-1j * 1.4011), 0.0258 * cmath.exp(1j * 2.8246)],
])
NOISE = 1e-8
P_MAX = 0.1

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def awgn_state():
    return ChannelState(AWGN_H, np.full(2, NOISE))


@pytest.fixture
def params():
    return SystemParams(p_max=P_MAX, zeta=0.7)


@pytest.fixture
def unit_params():
    return SystemParams(p_max=P_MAX, zeta=1.0)


@pytest.fixture(scope="session")
def case1_small():
    g = Geometry(np.array([[0.0, 0.0], [5.0, 5.0]]), np.array([[2.5, 2.5], [2.5, 2.5]]))
    return sample_rician(g, RicianParams(), np.full(2, NOISE), seed=3, n_states=300)


@pytest.fixture(scope="session")
def clusters_small():
    tx = np.array([[0.0, 0.0], [0.0, 5.0], [15.0, 0.0], [15.0, 5.0]])
    rx = np.array([[2.4, 2.5], [2.6, 2.5], [12.4, 2.5], [12.6, 2.5]])
    return sample_rician(Geometry(tx, rx), RicianParams(), np.full(4, NOISE), seed=11, n_states=200)


def random_channel(rng, K, scale=1.0):
    return scale * (rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))) / np.sqrt(2)


@pytest.fixture
def awgn_ensemble():
    return fixed_awgn(AWGN_H, np.full(2, NOISE))
