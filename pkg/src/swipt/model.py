"""Harvested power, achievable rates and energy-covariance bookkeeping.

Mode indicators follow the time-switching convention: ``rho_k = 1`` means Rx k
decodes information (ID), ``rho_k = 0`` means it harvests energy (EH).

The single-state functions (``harvested_power``, ``achievable_rate``, ...) mirror the
per-user formulas; the ``*_batch`` functions evaluate every user over a stack of
fading states at once and are what the solvers use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelState

ID, EH = 1, 0

PSD_TOL = 1e-9  # relative to trace
RANK_TOL = 1e-8  # relative to the largest eigenvalue
FEAS_TOL = 1e-9  # relative to p_max


@dataclass(frozen=True)
class SystemParams:
    p_max: float = 0.1
    zeta: float = 1.0

    def __post_init__(self):
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if not 0 < self.zeta <= 1:
            raise ValueError("zeta must lie in (0, 1]")


class FeasibilityError(ValueError):
    """Raised when a power allocation or covariance violates the feasible set."""


class EnergyCovariance:
    """Hermitian PSD covariance of the energy signals across transmitters."""

    def __init__(self, matrix, *, check=True):
        S = np.array(matrix, dtype=complex)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("energy covariance must be square")
        if check:
            scale = max(np.trace(S).real, 1e-300)
            if np.max(np.abs(S - S.conj().T), initial=0.0) > PSD_TOL * scale:
                raise FeasibilityError("energy covariance is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0] < -PSD_TOL * scale:
                raise FeasibilityError("energy covariance is not positive semidefinite")
        self.matrix = S

    @classmethod
    def zeros(cls, K: int) -> "EnergyCovariance":
        return cls(np.zeros((K, K), dtype=complex), check=False)

    @classmethod
    def from_beam(cls, v) -> "EnergyCovariance":
        v = np.asarray(v, dtype=complex)
        return cls(np.outer(v, v.conj()), check=False)

    def __repr__(self):
        return f"EnergyCovariance(powers={self.powers}, rank={self.rank()})"

    @property
    def powers(self) -> np.ndarray:
        """Per-transmitter energy-signal powers (the diagonal)."""
        return np.diag(self.matrix).real.copy()

    def eig(self):
        """Positive eigenvalues ``q`` (descending) and matching beam vectors as columns of ``V``."""
        w, U = np.linalg.eigh(0.5 * (self.matrix + self.matrix.conj().T))
        w, U = w[::-1], U[:, ::-1]
        keep = w > RANK_TOL * max(w[0], 0.0) if w[0] > 0 else np.zeros_like(w, dtype=bool)
        return w[keep], U[:, keep]

    def rank(self, rank_tol: float = RANK_TOL) -> int:
        w = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        if w[-1] <= 0:
            return 0
        return int(np.sum(w > rank_tol * w[-1]))

    def quadratic(self, h) -> float:
        """``h S h^H`` for a row vector ``h``."""
        h = np.asarray(h, dtype=complex)
        return float(np.real(h @ self.matrix @ h.conj()))


def matrix_rank(S, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Rank of each matrix in a ``(..., K, K)`` Hermitian stack, zero matrices giving 0."""
    w = np.linalg.eigvalsh(S)
    top = w[..., -1]
    return np.where(top > 0, np.sum(w > rank_tol * np.maximum(top, 0)[..., None], axis=-1), 0)


def check_feasible(p_info, s_e, p_max: float, tol: float = FEAS_TOL):
    """Raise ``FeasibilityError`` unless ``p^I >= 0, diag(S_E) >= 0, p^I + diag(S_E) <= p_max``."""
    p = np.asarray(p_info, dtype=float)
    S = s_e.matrix if isinstance(s_e, EnergyCovariance) else np.asarray(s_e)
    pe = np.diagonal(S, axis1=-2, axis2=-1).real
    slack = tol * p_max
    if np.any(p < -slack) or np.any(pe < -slack):
        raise FeasibilityError("negative transmit power")
    if np.any(p + pe > p_max + slack):
        raise FeasibilityError("per-transmitter peak power exceeded")


def _log_rate(signal, interference, noise):
    return np.log2(1.0 + signal / (interference + noise))


def _as_matrix(s_e):
    return s_e.matrix if isinstance(s_e, EnergyCovariance) else np.asarray(s_e, dtype=complex)


# --- single-state, single-user --------------------------------------------------------


def harvested_power(state: ChannelState, k: int, mode, p_info, s_e, params: SystemParams) -> float:
    """Power harvested at Rx ``k`` (watts); zero when Rx ``k`` is in ID mode."""
    p = np.asarray(p_info, dtype=float)
    S = _as_matrix(s_e)
    check_feasible(p, S, params.p_max)
    if mode[k] == ID:
        return 0.0
    h = state.H[k]
    info = np.sum(np.abs(h) ** 2 * p)
    energy = np.real(h @ S @ h.conj())
    return float(params.zeta * (info + energy))


def achievable_rate(state: ChannelState, k: int, mode, p_info) -> float:
    """Rate at Rx ``k`` (bits/s/Hz) treating other information signals as noise.

    Energy signals are assumed cancelled before decoding, so they never appear here.
    """
    if mode[k] == EH:
        return 0.0
    p = np.asarray(p_info, dtype=float)
    gains = np.abs(state.H[k]) ** 2
    others = np.delete(gains * p, k)
    return float(_log_rate(gains[k] * p[k], np.sum(others), state.noise_powers[k]))


def eia_rate(state: ChannelState, k: int, rho_ia: int, params: SystemParams) -> float:
    """Ergodic interference-alignment rate ``rho/2 * log2(1 + 2 |h_kk|^2 Pmax / sigma_k^2)``."""
    if rho_ia not in (0, 1):
        raise ValueError("rho_ia must be 0 or 1")
    if rho_ia == 0:
        return 0.0
    snr = 2.0 * np.abs(state.H[k, k]) ** 2 * params.p_max / state.noise_powers[k]
    return float(0.5 * np.log2(1.0 + snr))


def eia_energy(state: ChannelState, k: int, rho_ia: int, s_e, params: SystemParams) -> float:
    """Harvested power at Rx ``k`` under joint cooperation: ``zeta (1 - rho) h_k S_E h_k^H``."""
    S = _as_matrix(s_e)
    check_feasible(np.zeros(S.shape[0]), S, params.p_max)
    EnergyCovariance(S)
    if rho_ia == 1:
        return 0.0
    h = state.H[k]
    return float(params.zeta * np.real(h @ S @ h.conj()))


# --- batched over fading states ---------------------------------------------------------


def rates_batch(H, noise_powers, mode, p_info) -> np.ndarray:
    """Rates of every user in every state, shape (N, K)."""
    G = np.abs(H) ** 2
    K = G.shape[-1]
    direct = np.diagonal(G, axis1=-2, axis2=-1) * p_info
    cross = G * (1 - np.eye(K))
    interference = np.einsum("nkl,nl->nk", cross, p_info)
    return mode * _log_rate(direct, interference, noise_powers)


def energies_batch(H, mode, p_info, S_e, zeta: float) -> np.ndarray:
    """Harvested powers of every user in every state, shape (N, K)."""
    G = np.abs(H) ** 2
    info = np.einsum("nkl,nl->nk", G, p_info)
    energy = np.einsum("nki,nij,nkj->nk", H, S_e, H.conj()).real
    return zeta * (1 - mode) * (info + energy)


def quadratic_forms(H, S_e) -> np.ndarray:
    """``h_k S_E h_k^H`` for every user and state, shape (N, K)."""
    return np.einsum("nki,nij,nkj->nk", H, S_e, H.conj()).real


@dataclass(frozen=True)
class StateDecision:
    mode: np.ndarray
    p_info: np.ndarray
    s_e: EnergyCovariance
    rates: np.ndarray
    energies: np.ndarray

    @property
    def p_energy(self) -> np.ndarray:
        return self.s_e.powers


@dataclass(frozen=True)
class DecisionBatch:
    """Per-state decisions for a whole ensemble, arrays indexed by state first.

    ``rates`` and ``energies`` are the scheme's formulas evaluated on
    ``(mode, p_info, S_e)``; for the interference-channel schemes build instances
    with :func:`evaluate_decisions`.
    """

    mode: np.ndarray  # (N, K) int, 1 = ID
    p_info: np.ndarray  # (N, K)
    S_e: np.ndarray  # (N, K, K)
    rates: np.ndarray  # (N, K)
    energies: np.ndarray  # (N, K)

    def __len__(self):
        return self.mode.shape[0]

    def __getitem__(self, n) -> StateDecision:
        return StateDecision(self.mode[n], self.p_info[n], EnergyCovariance(self.S_e[n], check=False), self.rates[n], self.energies[n])

    @property
    def sum_rates(self) -> np.ndarray:
        return self.rates.sum(axis=1)

    def mean_sum_rate(self) -> float:
        return float(np.mean(self.sum_rates))

    def mean_energies(self) -> np.ndarray:
        return self.energies.mean(axis=0)

    def mode_fractions(self) -> dict[str, float]:
        """Fraction of states spent in each observed mode pattern, e.g. ``'ID_EH'``."""
        patterns, counts = np.unique(self.mode, axis=0, return_counts=True)
        return {mode_label(m): c / len(self) for m, c in zip(patterns, counts)}


def mode_label(mode) -> str:
    return "_".join("ID" if m == ID else "EH" for m in mode)


def all_mode_labels(K: int) -> list[str]:
    """Every ID/EH pattern for K users, ID-first lexicographic order."""
    labels = []
    for code in range(2**K):
        bits = [(code >> (K - 1 - i)) & 1 for i in range(K)]
        labels.append(mode_label([1 - b for b in bits]))
    return labels


def evaluate_decisions(H, noise_powers, mode, p_info, S_e, zeta: float) -> DecisionBatch:
    mode = np.asarray(mode, dtype=np.int8)
    rates = rates_batch(H, noise_powers, mode, p_info)
    energies = energies_batch(H, mode, p_info, S_e, zeta)
    return DecisionBatch(mode, p_info, S_e, rates, energies)
