"""Two-user SWIPT over fading: full, partial and no transmitter cooperation.

Every scheme is a per-state solver for fixed energy prices ``mu`` (vectorized over all
fading states) plus the shared dual outer loop of :mod:`swipt.optim.dual`.

Mode candidates are compared in the fixed order (ID,ID), (ID,EH), (EH,ID), (EH,EH);
on exact ties the earlier one wins.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelEnsemble, ChannelState
from .model import DecisionBatch, StateDecision, SystemParams, evaluate_decisions, rates_batch
from .optim.dual import SchemeResult, infeasible_result, solve_average_constrained
from .optim.newton import newton_maximize_scalar
from .optim.sdp import two_user_ebf_batch

SCHEMES = ("FC", "PC", "NC")
MODE_ORDER = ((1, 1), (1, 0), (0, 1), (0, 0))
LN2 = np.log(2.0)


def lagrangian(batch: DecisionBatch, mu) -> np.ndarray:
    """Per-state ``R_1 + R_2 + mu_1 Q_1 + mu_2 Q_2``."""
    return batch.sum_rates + batch.energies @ np.asarray(mu, dtype=float)


def _select(candidates: list[DecisionBatch], mu) -> DecisionBatch:
    scores = np.stack([lagrangian(c, mu) for c in candidates])
    pick = np.argmax(scores, axis=0)
    idx = np.arange(scores.shape[1])

    def gather(name):
        stacked = np.stack([getattr(c, name) for c in candidates])
        return stacked[pick, idx]

    return DecisionBatch(gather("mode"), gather("p_info"), gather("S_e"), gather("rates"), gather("energies"))


def _swap(H, noise, w):
    return H[:, ::-1, ::-1], noise[::-1], w[::-1]


def _mode_array(n, mode):
    return np.broadcast_to(np.asarray(mode, dtype=np.int8), (n, 2)).copy()


def on_off_powers(H, noise, p_max) -> np.ndarray:
    """Best of the on-off allocations {(0,P), (P,0), (P,P)} for the sum-rate, per state."""
    n = H.shape[0]
    options = [(0.0, p_max), (p_max, 0.0), (p_max, p_max)]
    ones = _mode_array(n, (1, 1))
    sums = np.stack([rates_batch(H, noise, ones, np.broadcast_to(o, (n, 2))).sum(axis=1) for o in options])
    best = np.argmax(sums, axis=0)
    return np.asarray(options)[best]


# --- full cooperation ---------------------------------------------------------------------------


def info_power_id_eh(H, noise, w2, p_max) -> np.ndarray:
    """Optimal Tx-1 information power in mode (ID,EH): maximizer of the concave y(p)."""
    a = np.abs(H[:, 0, 0]) ** 2 / noise[0]
    b = w2 * np.abs(H[:, 1, 0] * H[:, 1, 1]) * np.sqrt(p_max)

    def dy(p):
        return a / (LN2 * (1 + a * p)) - b / np.sqrt(p_max - p)

    def d2y(p):
        return -(a**2) / (LN2 * (1 + a * p) ** 2) - 0.5 * b / (p_max - p) ** 1.5

    return newton_maximize_scalar(dy, d2y, np.zeros_like(a), np.full_like(a, p_max))


def y_objective(p, H, noise, w2, p_max):
    """y(p) of mode (ID,EH) for a single 2x2 channel: rate of Rx 1 plus priced energy at Rx 2."""
    a = np.abs(H[0, 0]) ** 2 / noise[0]
    energy = (np.abs(H[1, 0]) ** 2 + np.abs(H[1, 1]) ** 2) * p_max + 2 * np.abs(H[1, 0] * H[1, 1]) * np.sqrt((p_max - p) * p_max)
    return np.log2(1 + a * p) + w2 * energy


def _fc_id_eh(H, noise, w, p_max):
    """(p_info, S_E) for mode (ID,EH): signal splitting at Tx 1, single beam towards Rx 2."""
    n = H.shape[0]
    p1 = info_power_id_eh(H, noise, w[1], p_max)
    c = H[:, 1, 0].conj() * H[:, 1, 1]
    mag = np.abs(c)
    alpha = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
    u = np.stack([np.sqrt(p_max - p1) + 0j, np.sqrt(p_max) * alpha.conj()], axis=1)
    S = u[:, :, None] * u.conj()[:, None, :]
    p = np.zeros((n, 2))
    p[:, 0] = p1
    return p, S


def fc_candidates(H, noise, mu, params: SystemParams) -> list[DecisionBatch]:
    """Optimal decision for each of the four modes, in ``MODE_ORDER``."""
    n = H.shape[0]
    P, zeta = params.p_max, params.zeta
    w = zeta * np.asarray(mu, dtype=float)
    zeros_S = np.zeros((n, 2, 2), dtype=complex)

    p_idid = on_off_powers(H, noise, P)

    p_ideh, S_ideh = _fc_id_eh(H, noise, w, P)
    Hs, ns, ws = _swap(H, noise, w)
    p_sw, S_sw = _fc_id_eh(Hs, ns, ws, P)
    p_ehid, S_ehid = p_sw[:, ::-1].copy(), S_sw[:, ::-1, ::-1].copy()

    S_eheh, _, _ = two_user_ebf_batch(H, w, P)

    return [
        evaluate_decisions(H, noise, _mode_array(n, (1, 1)), p_idid, zeros_S, zeta),
        evaluate_decisions(H, noise, _mode_array(n, (1, 0)), p_ideh, S_ideh, zeta),
        evaluate_decisions(H, noise, _mode_array(n, (0, 1)), p_ehid, S_ehid, zeta),
        evaluate_decisions(H, noise, _mode_array(n, (0, 0)), np.zeros((n, 2)), S_eheh, zeta),
    ]


def fc_decisions(H, noise, mu, params: SystemParams) -> DecisionBatch:
    return _select(fc_candidates(H, noise, mu, params), mu)


# --- partial cooperation ------------------------------------------------------------------------


def pc_candidates(H, noise, mu, params: SystemParams) -> list[DecisionBatch]:
    n = H.shape[0]
    P, zeta = params.p_max, params.zeta
    zeros_S = np.zeros((n, 2, 2), dtype=complex)
    full = np.full((n, 2), P)

    def id_eh(mode, on_first):
        # the decoding user's Tx is always on; the other Tx is either off or on
        off = np.zeros((n, 2))
        off[:, 0 if on_first else 1] = P
        cands = [evaluate_decisions(H, noise, _mode_array(n, mode), p, zeros_S, zeta) for p in (off, full)]
        return _select(cands, mu)

    return [
        evaluate_decisions(H, noise, _mode_array(n, (1, 1)), on_off_powers(H, noise, P), zeros_S, zeta),
        id_eh((1, 0), True),
        id_eh((0, 1), False),
        evaluate_decisions(H, noise, _mode_array(n, (0, 0)), full, zeros_S, zeta),
    ]


def pc_decisions(H, noise, mu, params: SystemParams) -> DecisionBatch:
    return _select(pc_candidates(H, noise, mu, params), mu)


# --- no cooperation -----------------------------------------------------------------------------


def nc_decisions(H, noise, mu, params: SystemParams) -> DecisionBatch:
    """Each Rx decodes iff its rate strictly beats its priced harvestable power."""
    n, K = H.shape[0], H.shape[1]
    P, zeta = params.p_max, params.zeta
    full = np.full((n, K), P)
    zeros_S = np.zeros((n, K, K), dtype=complex)
    as_id = evaluate_decisions(H, noise, np.ones((n, K), np.int8), full, zeros_S, zeta)
    as_eh = evaluate_decisions(H, noise, np.zeros((n, K), np.int8), full, zeros_S, zeta)
    mode = (as_id.rates > np.asarray(mu, dtype=float) * as_eh.energies).astype(np.int8)
    return evaluate_decisions(H, noise, mode, full, zeros_S, zeta)


_DECIDERS = {"FC": fc_decisions, "PC": pc_decisions, "NC": nc_decisions}


def decide(H, noise, mu, params: SystemParams, scheme: str) -> DecisionBatch:
    try:
        fn = _DECIDERS[scheme.upper()]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}") from None
    return fn(np.asarray(H), np.asarray(noise), np.asarray(mu, dtype=float), params)


def _single(fn, state: ChannelState, mu, params) -> StateDecision:
    if state.n_users != 2:
        raise ValueError("two-user solvers need a 2x2 channel")
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("dual variables must be non-negative")
    return fn(state.H[None], state.noise_powers, mu, params)[0]


def fc_subproblem(state: ChannelState, mu, params: SystemParams) -> StateDecision:
    return _single(fc_decisions, state, mu, params)


def pc_subproblem(state: ChannelState, mu, params: SystemParams) -> StateDecision:
    return _single(pc_decisions, state, mu, params)


def nc_decide(state: ChannelState, mu, params: SystemParams) -> StateDecision:
    return _single(nc_decisions, state, mu, params)


def subproblem_value(decision: StateDecision, mu) -> float:
    return float(np.sum(decision.rates) + np.dot(decision.energies, mu))


# --- ergodic problem ------------------------------------------------------------------------------


def energy_bound(ensemble: ChannelEnsemble, scheme: str, params: SystemParams) -> np.ndarray:
    """Largest average harvested power each user can get on its own under ``scheme``.

    FC co-phases both transmitters towards the user in every state; PC and NC can do no
    better than both transmitters on at full power.
    """
    mag = np.abs(ensemble.H)
    if scheme.upper() == "FC":
        per_state = mag.sum(axis=2) ** 2
    else:
        per_state = (mag**2).sum(axis=2)
    return params.zeta * params.p_max * per_state.mean(axis=0)


def default_mu_upper(ensemble: ChannelEnsemble, params: SystemParams, rate_scale: float) -> float:
    """Dual box edge ``10 * rate_scale / (zeta * p_max * weakest average direct gain)``."""
    direct = np.diagonal(ensemble.mean_power())
    return 10.0 * max(rate_scale, 1.0) / (params.zeta * params.p_max * max(direct.min(), 1e-300))


def solve_scheme(ensemble: ChannelEnsemble, scheme: str, targets, params: SystemParams, tol=1e-8, max_iter=None) -> SchemeResult:
    """Maximize the average sum-rate subject to average harvested-power targets.

    Returns a :class:`SchemeResult`; ``feasible`` is False (and no policies are
    returned) when a target exceeds what the scheme can deliver even with every state
    devoted to energy transfer.
    """
    if ensemble.n_users != 2:
        raise ValueError("two-user schemes need K = 2")
    targets = np.broadcast_to(np.asarray(targets, dtype=float), (2,)).copy()
    if np.any(targets < 0):
        raise ValueError("harvested-power targets must be non-negative")
    scheme = scheme.upper()
    bound = energy_bound(ensemble, scheme, params)
    if np.any(targets > bound):
        return infeasible_result(targets, bound, f"target exceeds {scheme} energy bound {bound}")
    H, noise = ensemble.H, ensemble.noise_powers

    def evaluate(mu):
        return decide(H, noise, mu, params, scheme)

    rate_scale = float(np.max(evaluate(np.zeros(2)).sum_rates))
    mu_upper = default_mu_upper(ensemble, params, rate_scale)
    result = solve_average_constrained(evaluate, targets, mu_upper, tol=tol, max_iter=max_iter)
    result.energy_bound = bound
    result.info["scheme"] = scheme
    return result
