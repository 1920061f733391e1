"""Channel ensembles: fixed AWGN channels and Rician block fading.

An ensemble stores all fading states as one ``(N, K, K)`` complex array, entry
``[n, k, l]`` being the gain from Tx ``l`` to Rx ``k`` in state ``n``.  Expectations
over fading are plain sample averages over the first axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# LoS phasor; only |g_los|^2 = 1 matters.
LOS_COMPONENT = 1.0 + 0.0j


@dataclass(frozen=True)
class Geometry:
    """Transmitter and receiver positions in meters, one row per user."""

    tx_positions: np.ndarray
    rx_positions: np.ndarray

    def __post_init__(self):
        tx = np.asarray(self.tx_positions, dtype=float)
        rx = np.asarray(self.rx_positions, dtype=float)
        if tx.ndim != 2 or tx.shape[1] != 2 or tx.shape != rx.shape:
            raise ValueError("tx/rx positions must be matching (K, 2) arrays")
        if tx.shape[0] < 2:
            raise ValueError("need at least two Tx-Rx pairs")
        object.__setattr__(self, "tx_positions", tx)
        object.__setattr__(self, "rx_positions", rx)
        if np.any(self.distances() <= 0):
            raise ValueError("every Tx-Rx distance must be positive")

    @property
    def n_users(self) -> int:
        return self.tx_positions.shape[0]

    def distances(self) -> np.ndarray:
        """Matrix of distances, ``[k, l]`` = |rx_k - tx_l|."""
        diff = self.rx_positions[:, None, :] - self.tx_positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)


@dataclass(frozen=True)
class RicianParams:
    rician_factor: float = 3.0
    c0: float = 0.01
    r0: float = 1.0
    xi: float = 3.0

    def __post_init__(self):
        if self.rician_factor < 0 or self.c0 <= 0 or self.r0 <= 0 or self.xi < 0:
            raise ValueError(f"invalid Rician parameters: {self}")


@dataclass(frozen=True)
class ChannelState:
    """One fading realization: ``H[k, l]`` is the gain Tx l -> Rx k."""

    H: np.ndarray
    noise_powers: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        noise = np.asarray(self.noise_powers, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("channel matrix must be square")
        if noise.shape != (H.shape[0],):
            raise ValueError("need one noise power per receiver")
        if np.any(noise <= 0):
            raise ValueError("noise powers must be positive")
        if not np.all(np.isfinite(H)):
            raise ValueError("channel matrix must be finite")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "noise_powers", noise)

    @property
    def n_users(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class ChannelEnsemble:
    """Equally weighted fading states sharing the same noise powers."""

    H: np.ndarray
    noise_powers: np.ndarray
    seed: int | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim == 2:
            H = H[None]
        if H.ndim != 3 or H.shape[1] != H.shape[2]:
            raise ValueError("ensemble channels must have shape (N, K, K)")
        if H.shape[0] < 1:
            raise ValueError("ensemble must contain at least one state")
        noise = np.broadcast_to(np.asarray(self.noise_powers, dtype=float), (H.shape[1],)).copy()
        if np.any(noise <= 0):
            raise ValueError("noise powers must be positive")
        if not np.all(np.isfinite(H)):
            raise ValueError("channel gains must be finite")
        H.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "noise_powers", noise)

    def __len__(self):
        return self.H.shape[0]

    def __getitem__(self, n) -> ChannelState:
        return ChannelState(self.H[n], self.noise_powers)

    def __iter__(self):
        return (self[n] for n in range(len(self)))

    @property
    def n_users(self) -> int:
        return self.H.shape[1]

    @property
    def states(self) -> list[ChannelState]:
        return list(self)

    def mean_power(self) -> np.ndarray:
        """Sample average of ``|h_kl|^2`` over fading states, shape (K, K)."""
        return np.mean(np.abs(self.H) ** 2, axis=0)

    def subset(self, users) -> "ChannelEnsemble":
        """Restrict to the Tx-Rx pairs in ``users`` (in that order)."""
        idx = np.asarray(users)
        return ChannelEnsemble(self.H[:, idx][:, :, idx], self.noise_powers[idx], self.seed, dict(self.metadata))


def pathloss(distance, params: RicianParams):
    """Linear path-loss gain ``c0 * (d / r0) ** -xi``."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    out = params.c0 * (d / params.r0) ** (-params.xi)
    return float(out) if out.ndim == 0 else out


def sample_rician(geometry: Geometry, params: RicianParams, noise_powers, seed: int, n_states: int = 10_000) -> ChannelEnsemble:
    """Draw ``n_states`` i.i.d. Rician block-fading states for ``geometry``.

    Each gain is ``(sqrt(M/(M+1)) g_los + sqrt(1/(M+1)) g) * sqrt(pathloss(r_kl))``
    with ``g ~ CN(0, 1)`` (independent real/imaginary parts of variance 1/2).
    The same arguments always produce the same ensemble.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    K = geometry.n_users
    M = params.rician_factor
    rng = np.random.default_rng(seed)
    scatter = (rng.standard_normal((n_states, K, K)) + 1j * rng.standard_normal((n_states, K, K))) / np.sqrt(2.0)
    amplitude = np.sqrt(pathloss(geometry.distances(), params))
    H = (np.sqrt(M / (M + 1.0)) * LOS_COMPONENT + np.sqrt(1.0 / (M + 1.0)) * scatter) * amplitude
    meta = {"kind": "rician", "n_states": n_states}
    return ChannelEnsemble(H, noise_powers, seed, meta)


def fixed_awgn(channels, noise_powers) -> ChannelEnsemble:
    """Wrap a fixed ``K x K`` channel matrix as a one-state ensemble."""
    H = np.asarray(channels, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"channel matrix must be square, got shape {H.shape}")
    return ChannelEnsemble(H[None], noise_powers, None, {"kind": "awgn"})
