"""Brute-force reference solutions used to cross-check the optimized solvers.

Everything here is written directly from the model formulas with plain grids; nothing
is shared with the solver code paths beyond array conventions.  Objective values use
the same pricing as the solvers: ``sum-rate + sum_k mu_k Q_k`` with ``Q_k`` including
the harvesting efficiency.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelState
from .model import SystemParams


def _chunks(n, size):
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


def phase_grid_ebf(H, mu, p_max, n_phase=1_000_000, chunk=200_000):
    """Best two-user full-power rank-one covariance over a phase grid.

    Scans ``S = p_max [[1, e^{j t}], [e^{-j t}, 1]]`` for ``t`` on ``n_phase`` uniform
    points of ``[0, 2 pi)`` and maximizes ``sum_k mu_k h_k S h_k^H``.

    Returns
    -------
    value : float
    theta : float
    energies : ndarray, shape (2,)
        ``h_k S h_k^H`` (no efficiency factor) at the best phase.
    """
    H = np.asarray(H, dtype=complex)
    mu = np.asarray(mu, dtype=float)
    best, best_t = -np.inf, 0.0
    for sl in _chunks(n_phase, chunk):
        t = 2 * np.pi * np.arange(sl.start, sl.stop) / n_phase
        e = np.exp(1j * t)
        # h S h^H = p (|a|^2 + |b|^2 + 2 Re(a conj(b) e^{jt})) for the row h = [a, b]
        q = p_max * (np.abs(H[:, 0:1]) ** 2 + np.abs(H[:, 1:2]) ** 2 + 2 * np.real(H[:, 0:1] * H[:, 1:2].conj() * e[None, :]))
        val = mu @ q
        j = int(np.argmax(val))
        if val[j] > best:
            best, best_t = float(val[j]), float(t[j])
    S = p_max * np.array([[1.0, np.exp(1j * best_t)], [np.exp(-1j * best_t), 1.0]])
    energies = np.real(np.einsum("ki,ij,kj->k", H, S, H.conj()))
    return best, best_t, energies


def y_grid(H, noise, w2, p_max, n=1_000_000):
    """Grid maximizer of the (ID,EH) objective in the Tx-1 information power."""
    H = np.asarray(H, dtype=complex)
    p = np.linspace(0.0, p_max, n)
    a = abs(H[0, 0]) ** 2 / noise[0]
    g1, g2 = abs(H[1, 0]), abs(H[1, 1])
    energy = g1**2 * p + g1**2 * (p_max - p) + g2**2 * p_max + 2 * g1 * g2 * np.sqrt((p_max - p) * p_max)
    y = np.log2(1 + a * p) + w2 * energy
    j = int(np.argmax(y))
    return float(p[j]), float(y[j])


def p1_theta_grid(H, noise, mu2, params: SystemParams, n_power=10_000, n_phase=10_000, chunk=500):
    """Joint grid over Tx-1 information power and beam phase for mode (ID,EH).

    Tx 1 splits ``p`` information / ``p_max - p`` energy, Tx 2 sends energy at full
    power with relative phase ``t``; Rx 1 decodes without interference, Rx 2 harvests.

    Returns ``(value, p, theta)`` of the best grid point.
    """
    H = np.asarray(H, dtype=complex)
    P, zeta = params.p_max, params.zeta
    p = np.linspace(0.0, P, n_power)
    t = 2 * np.pi * np.arange(n_phase) / n_phase
    rate = np.log2(1 + abs(H[0, 0]) ** 2 * p / noise[0])
    cross = np.real(H[1, 0] * H[1, 1].conj() * np.exp(-1j * t))  # Re(h21 conj(h22 e^{jt}))
    best = (-np.inf, 0.0, 0.0)
    for sl in _chunks(n_power, chunk):
        pp = p[sl, None]
        amp = np.sqrt(P - pp)
        q2 = abs(H[1, 0]) ** 2 * pp + abs(H[1, 0]) ** 2 * amp**2 + abs(H[1, 1]) ** 2 * P + 2 * amp * np.sqrt(P) * cross[None, :]
        val = rate[sl, None] + mu2 * zeta * q2
        i, j = np.unravel_index(int(np.argmax(val)), val.shape)
        if val[i, j] > best[0]:
            best = (float(val[i, j]), float(p[sl][i]), float(t[j]))
    return best


def fc_cross_check(state: ChannelState, mu, params: SystemParams, grid_n=200) -> float:
    """Best full-cooperation objective on a (mode, p_1^I, p_2^I, phase) grid.

    Every transmitter puts its leftover budget ``p_max - p_k^I`` into a common energy
    beam with relative phase ``t``.  For a fixed power pair the priced energy is affine
    in ``Re(c e^{jt})`` with a non-negative coefficient, so the phase axis reduces to
    the grid maximum of that real part; the value returned is still the exact maximum
    over the full grid.
    """
    H = np.asarray(state.H, dtype=complex)
    if H.shape != (2, 2):
        raise ValueError("fc_cross_check needs a 2x2 channel")
    noise = state.noise_powers
    mu = np.asarray(mu, dtype=float)
    P, zeta = params.p_max, params.zeta
    g = np.abs(H) ** 2
    p = np.linspace(0.0, P, grid_n)
    p1, p2 = np.meshgrid(p, p, indexing="ij")
    t = 2 * np.pi * np.arange(grid_n) / grid_n
    e = np.exp(1j * t)
    amp = np.sqrt((P - p1) * (P - p2))

    r1 = np.log2(1 + g[0, 0] * p1 / (g[0, 1] * p2 + noise[0]))
    r2 = np.log2(1 + g[1, 1] * p2 / (g[1, 0] * p1 + noise[1]))

    def priced_energy(k_weights):
        # sum_k w_k Q_k with all information and energy signals counted
        info = sum(w * (g[k, 0] * p1 + g[k, 1] * p2) for k, w in k_weights)
        beam_diag = sum(w * (g[k, 0] * (P - p1) + g[k, 1] * (P - p2)) for k, w in k_weights)
        phase = sum(w * 2 * np.real(H[k, 0] * H[k, 1].conj() * e) for k, w in k_weights)
        best_phase = float(np.max(phase)) if np.ndim(phase) else 0.0
        return zeta * (info + beam_diag + amp * best_phase)

    candidates = [
        r1 + r2,  # (ID,ID): energy signals would only be wasted
        r1 + mu[1] * priced_energy([(1, 1.0)]),
        r2 + mu[0] * priced_energy([(0, 1.0)]),
        priced_energy([(0, mu[0]), (1, mu[1])]),
    ]
    return float(max(np.max(c) for c in candidates))


def rank_one_grid(A, p_max, n_phase=300, n_mag=5) -> float:
    """Lower bound on ``max Tr(A v v^H)`` over single beams with ``|v_k|^2 <= p_max``.

    Grid over magnitudes ``sqrt(p_max) * linspace(0, 1, n_mag)`` per entry and phases of
    entries ``2..K`` (entry 1 fixed real); intended for K = 3.
    """
    A = np.asarray(A, dtype=complex)
    K = A.shape[0]
    mags = np.sqrt(p_max) * np.linspace(0.0, 1.0, n_mag)
    phases = np.exp(2j * np.pi * np.arange(n_phase) / n_phase)
    phase_grid = np.stack(np.meshgrid(*([phases] * (K - 1)), indexing="ij"), axis=-1).reshape(-1, K - 1)
    phase_grid = np.concatenate([np.ones((phase_grid.shape[0], 1)), phase_grid], axis=1)
    best = -np.inf
    for m in np.stack(np.meshgrid(*([mags] * K), indexing="ij"), axis=-1).reshape(-1, K):
        V = phase_grid * m[None, :]
        val = np.real(np.einsum("ni,ij,nj->n", V.conj(), A, V))
        best = max(best, float(val.max()))
    return best


def nc_knapsack(rates, harvest, target) -> float:
    """Largest average rate of one no-cooperation user meeting an average energy target.

    ``rates`` and ``harvest`` are the per-state ID rate and EH power of the user.  States
    are switched to EH in increasing order of rate lost per watt gained; the last one
    fractionally (time sharing).  Returns ``nan`` if the target is unreachable.
    """
    rates = np.asarray(rates, dtype=float)
    harvest = np.asarray(harvest, dtype=float)
    n = rates.size
    need = target * n
    if need <= 0:
        return float(rates.mean())
    if harvest.sum() < need * (1 - 1e-12):
        return float("nan")
    order = np.argsort(rates / np.maximum(harvest, 1e-300), kind="stable")
    total = rates.sum()
    for i in order:
        if harvest[i] >= need:
            total -= rates[i] * need / harvest[i]
            break
        total -= rates[i]
        need -= harvest[i]
    return float(total / n)
