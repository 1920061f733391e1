"""The brute-force references themselves, checked against hand-solvable cases."""

import numpy as np
import pytest

from conftest import NOISE, P_MAX
from swipt.channel import ChannelState
from swipt.model import SystemParams
from swipt.oracles import fc_cross_check, nc_knapsack, p1_theta_grid, phase_grid_ebf, rank_one_grid, y_grid


def test_phase_grid_finds_coherent_sum():
    # real positive channels add in phase at t = 0
    H = np.array([[1.0, 2.0], [0.5, 0.5]])
    value, theta, energies = phase_grid_ebf(H, [1.0, 0.0], 1.0, n_phase=360)
    assert theta == 0.0
    assert value == pytest.approx(9.0)
    np.testing.assert_allclose(energies, [9.0, 1.0])


def test_phase_grid_chunking_is_invisible():
    rng = np.random.default_rng(4)
    H = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = phase_grid_ebf(H, [0.3, 0.8], 1.0, n_phase=10_000, chunk=10_000)
    b = phase_grid_ebf(H, [0.3, 0.8], 1.0, n_phase=10_000, chunk=777)
    assert a[:2] == b[:2]


def test_y_grid_without_energy_price_uses_full_power():
    H = np.array([[0.03, 0.02], [0.01, 0.02]])
    p, value = y_grid(H, [NOISE, NOISE], 0.0, P_MAX, n=1001)
    assert p == P_MAX
    assert value == pytest.approx(np.log2(1 + 0.03**2 * P_MAX / NOISE))


def test_p1_theta_grid_large_price_sends_energy():
    H = np.array([[0.03, 0.02], [0.01, 0.02]])
    value, p, theta = p1_theta_grid(H, [NOISE, NOISE], 1e9, SystemParams(P_MAX, 1.0), 101, 64)
    assert p == 0.0 and theta == 0.0
    assert value == pytest.approx(1e9 * P_MAX * (0.01 + 0.02) ** 2)


def test_fc_cross_check_zero_price_is_best_rate_pair():
    H = np.array([[0.03, 0.001], [0.001, 0.03]])
    state = ChannelState(H, np.full(2, NOISE))
    value = fc_cross_check(state, [0.0, 0.0], SystemParams(P_MAX, 0.7), grid_n=50)
    expected = 2 * np.log2(1 + 0.03**2 * P_MAX / (0.001**2 * P_MAX + NOISE))
    assert value == pytest.approx(expected, rel=1e-12)


def test_fc_cross_check_rejects_larger_channels():
    with pytest.raises(ValueError):
        fc_cross_check(ChannelState(np.eye(3), np.ones(3)), [0, 0, 0], SystemParams())


def test_rank_one_grid_exact_on_coherent_channel():
    h = np.ones(3)
    A = np.outer(h, h)
    assert rank_one_grid(A, 1.0, n_phase=4, n_mag=2) == pytest.approx(9.0)


def test_knapsack_cheapest_states_first():
    rates = np.array([1.0, 5.0, 2.0])
    harvest = np.array([1.0, 1.0, 4.0])
    # rate lost per watt: 1, 5, 0.5 -> state 2 first, then state 0
    assert nc_knapsack(rates, harvest, 4.0 / 3) == pytest.approx((1 + 5) / 3)
    assert nc_knapsack(rates, harvest, 5.0 / 3) == pytest.approx(5 / 3)
    assert nc_knapsack(rates, harvest, 4.5 / 3) == pytest.approx(5.5 / 3)
    assert nc_knapsack(rates, harvest, 0.0) == pytest.approx(8 / 3)
    assert np.isnan(nc_knapsack(rates, harvest, 7.0 / 3))
