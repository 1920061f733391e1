import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swipt.channel import ChannelEnsemble, ChannelState, Geometry, RicianParams, fixed_awgn, pathloss, sample_rician

SQUARE = Geometry(np.array([[0.0, 0.0], [5.0, 5.0]]), np.array([[2.5, 2.5], [2.5, 2.5]]))


def test_pathloss_reference_distance():
    assert pathloss(1.0, RicianParams()) == pytest.approx(0.01)


def test_pathloss_cubic_decay():
    p = RicianParams()
    assert pathloss(10.0, p) == pytest.approx(1e-5)
    assert pathloss(2.0, p) / pathloss(4.0, p) == pytest.approx(8.0)


def test_pathloss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        pathloss(0.0, RicianParams())


def test_same_seed_same_ensemble():
    a = sample_rician(SQUARE, RicianParams(), [1e-8, 1e-8], seed=42, n_states=50)
    b = sample_rician(SQUARE, RicianParams(), [1e-8, 1e-8], seed=42, n_states=50)
    np.testing.assert_array_equal(a.H, b.H)
    c = sample_rician(SQUARE, RicianParams(), [1e-8, 1e-8], seed=43, n_states=50)
    assert not np.array_equal(a.H, c.H)


def test_no_scatter_gives_deterministic_los():
    ens = sample_rician(SQUARE, RicianParams(rician_factor=1e12), [1e-8, 1e-8], seed=0, n_states=4)
    expected = np.sqrt(pathloss(SQUARE.distances(), RicianParams()))
    np.testing.assert_allclose(np.abs(ens.H), np.broadcast_to(expected, ens.H.shape), rtol=1e-5)


def test_mean_power_matches_pathloss():
    # E|h|^2 = pathloss since the LoS and scatter terms have unit total power
    ens = sample_rician(SQUARE, RicianParams(), [1e-8, 1e-8], seed=1, n_states=40_000)
    expected = pathloss(SQUARE.distances(), RicianParams())
    np.testing.assert_allclose(ens.mean_power(), expected, rtol=0.03)


def test_scatter_is_circular():
    ens = sample_rician(SQUARE, RicianParams(rician_factor=0.0), [1e-8, 1e-8], seed=5, n_states=40_000)
    h = ens.H[:, 0, 0] / np.sqrt(pathloss(SQUARE.distances()[0, 0], RicianParams()))
    assert abs(np.mean(h)) < 0.02
    assert np.var(h.real) == pytest.approx(0.5, rel=0.05)
    assert np.var(h.imag) == pytest.approx(0.5, rel=0.05)


def test_fixed_awgn_single_state():
    H = np.array([[1.0, 0.5j], [0.2, 1.0]])
    ens = fixed_awgn(H, [1.0, 2.0])
    assert len(ens) == 1
    np.testing.assert_array_equal(ens[0].H, H)


def test_fixed_awgn_rejects_nonsquare():
    with pytest.raises(ValueError):
        fixed_awgn(np.ones((2, 3)), [1.0, 1.0])


def test_state_validation():
    with pytest.raises(ValueError):
        ChannelState(np.eye(2), [1.0, 0.0])
    with pytest.raises(ValueError):
        ChannelState(np.array([[np.nan, 0], [0, 1]]), [1.0, 1.0])


def test_geometry_rejects_colocated_tx_rx():
    with pytest.raises(ValueError):
        Geometry(np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([[0.0, 0.0], [2.0, 2.0]]))


def test_ensemble_is_read_only():
    ens = fixed_awgn(np.eye(2), [1.0, 1.0])
    with pytest.raises(ValueError):
        ens.H[0, 0, 0] = 2.0


def test_subset_keeps_selected_links():
    rng = np.random.default_rng(0)
    H = rng.standard_normal((3, 4, 4)) + 0j
    ens = ChannelEnsemble(H, np.arange(1.0, 5.0))
    sub = ens.subset([3, 1])
    np.testing.assert_array_equal(sub.H[:, 0, 1], H[:, 3, 1])
    np.testing.assert_array_equal(sub.noise_powers, [4.0, 2.0])


@given(st.integers(0, 2**31 - 1))
def test_distance_matrix_entries(seed):
    rng = np.random.default_rng(seed)
    tx, rx = rng.uniform(0, 10, (3, 2)), rng.uniform(0, 10, (3, 2))
    g = Geometry(tx, rx)
    D = g.distances()
    for k in range(3):
        for l in range(3):
            assert D[k, l] == pytest.approx(np.hypot(*(rx[k] - tx[l])))
