"""K-user schemes: pairwise cooperation after greedy grouping, and joint cooperation
based on ergodic interference alignment (E-IA).

The E-IA rate ``1/2 log2(1 + 2 |h_kk|^2 Pmax / sigma_k^2)`` is used as given; with a
LoS channel component the phase-symmetry it relies on does not hold, so E-IA results
are labelled as an upper bound.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelEnsemble, ChannelState
from .model import DecisionBatch, EnergyCovariance, SystemParams, evaluate_decisions, quadratic_forms
from .optim.dual import SchemeResult, infeasible_result, solve_average_constrained
from .optim.sdp import _factor, batch_energy_beamforming, randomize_rank_one_batch, two_user_ebf_batch, weight_matrix
from .two_user import default_mu_upper, nc_decisions, solve_scheme

log = logging.getLogger(__name__)

EIA_CAVEAT = "E-IA rate assumes symmetric channel phases; with a LoS component it is a performance upper bound"


@dataclass(frozen=True)
class Grouping:
    pairs: tuple[tuple[int, int], ...]
    leftover: int | None = None

    def validate(self, K: int):
        seen = [u for p in self.pairs for u in p] + ([] if self.leftover is None else [self.leftover])
        if sorted(seen) != list(range(K)):
            raise ValueError(f"grouping {self} does not partition {K} users")
        return self

    def canonical(self) -> "Grouping":
        """Same partition with pairs sorted, for comparisons independent of selection order."""
        return Grouping(tuple(sorted(tuple(sorted(p)) for p in self.pairs)), self.leftover)


def pair_scores(ensemble: ChannelEnsemble) -> np.ndarray:
    """Symmetrized cross-link statistic ``max(E|h_kl|^2, E|h_lk|^2)``, zero on the diagonal."""
    G = ensemble.mean_power()
    S = np.maximum(G, G.T)
    np.fill_diagonal(S, 0.0)
    return S


def greedy_grouping(ensemble: ChannelEnsemble) -> Grouping:
    """Repeatedly pair the two remaining users with the strongest average cross link."""
    K = ensemble.n_users
    if K < 2:
        raise ValueError("grouping needs at least two users")
    scores = pair_scores(ensemble)
    remaining = list(range(K))
    pairs = []
    while len(remaining) >= 2:
        best = None
        for k, l in itertools.combinations(remaining, 2):
            if best is None or scores[k, l] > scores[best]:
                best = (k, l)
        pairs.append(best)
        remaining = [u for u in remaining if u not in best]
    return Grouping(tuple(pairs), remaining[0] if remaining else None)


def all_groupings(K: int) -> list[Grouping]:
    """Every pairing of ``K <= 8`` users (with one leftover when K is odd)."""
    if K > 8:
        raise ValueError("exhaustive grouping is limited to K <= 8")

    def matchings(users):
        if len(users) < 2:
            yield (), (users[0] if users else None)
            return
        if len(users) % 2 == 1:
            for i, u in enumerate(users):
                rest = users[:i] + users[i + 1:]
                for pairs, _ in matchings(rest):
                    yield pairs, u
            return
        first = users[0]
        for i in range(1, len(users)):
            rest = users[1:i] + users[i + 1:]
            for pairs, left in matchings(rest):
                yield ((first, users[i]),) + pairs, left

    seen, out = set(), []
    for pairs, left in matchings(list(range(K))):
        key = (tuple(sorted(pairs)), left)
        if key not in seen:
            seen.add(key)
            out.append(Grouping(*key))
    return out


# --- pairwise cooperation ---------------------------------------------------------------------------


@dataclass
class PairwiseResult:
    grouping: Grouping
    group_results: list[SchemeResult]
    leftover_result: SchemeResult | None
    avg_sum_rate: float  # realized, with inter-group interference
    avg_rates: np.ndarray
    avg_energies: np.ndarray
    optimized_rates: np.ndarray  # per user, as seen by the intra-group optimization
    optimized_energies: np.ndarray
    targets: np.ndarray
    feasible: bool
    mode_fractions: dict = field(default_factory=dict)

    @property
    def energy_gap(self) -> np.ndarray:
        """Extra power harvested from other groups' signals (realized - optimized)."""
        return self.avg_energies - self.optimized_energies

    @property
    def gap(self) -> float:
        duals = [r.dual_value for r in self._parts()]
        rates = [r.avg_sum_rate for r in self._parts()]
        return max(0.0, sum(duals) - sum(rates)) / max(abs(sum(duals)), 1e-12)

    def _parts(self):
        return list(self.group_results) + ([self.leftover_result] if self.leftover_result is not None else [])


def _solve_single_user(sub: ChannelEnsemble, target: float, params: SystemParams, tol) -> SchemeResult:
    bound = params.zeta * params.p_max * np.mean(np.abs(sub.H[:, 0, 0]) ** 2)
    if target > bound:
        return infeasible_result([target], [bound], "leftover target exceeds energy bound")
    H, noise = sub.H, sub.noise_powers

    def evaluate(mu):
        return nc_decisions(H, noise, mu, params)

    rate_scale = float(np.max(evaluate(np.zeros(1)).sum_rates))
    res = solve_average_constrained(evaluate, [target], default_mu_upper(sub, params, rate_scale), tol=tol)
    res.energy_bound = np.array([bound])
    return res


def _combine(ensemble, grouping, parts, params):
    """Weighted realized averages over the product of every group's time-sharing policies."""
    N, K = len(ensemble), ensemble.n_users
    users = [list(p) for p in grouping.pairs] + ([[grouping.leftover]] if grouping.leftover is not None else [])
    rates = np.zeros(K)
    energies = np.zeros(K)
    fractions: dict[str, float] = {}
    choices = [list(zip(r.weights, r.policies)) for r in parts]
    for combo in itertools.product(*choices):
        weight = float(np.prod([w for w, _ in combo]))
        mode = np.zeros((N, K), np.int8)
        p = np.zeros((N, K))
        S = np.zeros((N, K, K), dtype=complex)
        for idx, (_, pol) in zip(users, combo):
            mode[:, idx] = pol.mode
            p[:, idx] = pol.p_info
            S[np.ix_(np.arange(N), idx, idx)] = pol.S_e
        batch = evaluate_decisions(ensemble.H, ensemble.noise_powers, mode, p, S, params.zeta)
        rates += weight * batch.rates.mean(axis=0)
        energies += weight * batch.energies.mean(axis=0)
        for lab, frac in batch.mode_fractions().items():
            fractions[lab] = fractions.get(lab, 0.0) + weight * frac
    return rates, energies, fractions


def pairwise_cooperation(ensemble: ChannelEnsemble, grouping: Grouping, targets, params: SystemParams, tol=1e-8) -> PairwiseResult:
    """Full cooperation inside each pair, evaluated with all inter-group signals present.

    Each pair is optimized on its own 2x2 sub-channel (other groups ignored); an unpaired
    user switches modes on its own.  Realized rates then count every active interferer
    and realized harvested power counts every user's information and energy signals.
    """
    K = ensemble.n_users
    grouping.validate(K)
    targets = np.broadcast_to(np.asarray(targets, dtype=float), (K,)).copy()
    parts = []
    for pair in grouping.pairs:
        parts.append(solve_scheme(ensemble.subset(pair), "FC", targets[list(pair)], params, tol=tol))
    leftover = None
    if grouping.leftover is not None:
        leftover = _solve_single_user(ensemble.subset([grouping.leftover]), targets[grouping.leftover], params, tol)
        parts.append(leftover)
    group_results = parts[: len(grouping.pairs)]

    opt_rates = np.full(K, np.nan)
    opt_energies = np.full(K, np.nan)
    users = [list(p) for p in grouping.pairs] + ([[grouping.leftover]] if leftover is not None else [])
    for idx, res in zip(users, parts):
        if res.policies:
            opt_rates[idx] = sum(w * pol.rates.mean(axis=0) for w, pol in zip(res.weights, res.policies))
            opt_energies[idx] = res.avg_energies

    if all(r.feasible for r in parts):
        rates, energies, fractions = _combine(ensemble, grouping, parts, params)
        feasible = bool(np.all(energies >= targets * (1 - 1e-9)))
    else:
        rates, energies, fractions = np.full(K, np.nan), np.full(K, np.nan), {}
        feasible = False
    return PairwiseResult(grouping, group_results, leftover, float(np.sum(rates)), rates, energies,
                          opt_rates, opt_energies, targets, feasible, fractions)


# --- joint cooperation (E-IA) -------------------------------------------------------------------------


def eia_rates(H, noise, p_max) -> np.ndarray:
    """Per-state, per-user E-IA rates with every receiver decoding, shape (N, K)."""
    direct = np.abs(np.diagonal(H, axis1=-2, axis2=-1)) ** 2
    return 0.5 * np.log2(1.0 + 2.0 * direct * p_max / noise)


@dataclass(frozen=True)
class JointDecision:
    rho_ia: int
    s_e: EnergyCovariance
    rates: np.ndarray
    energies: np.ndarray


class EiaSolver:
    """Per-state E-IA decisions for a fixed ensemble, warm-starting the SDP factors."""

    def __init__(self, ensemble: ChannelEnsemble, params: SystemParams, single_beam=False, n_draws=100,
                 gap_tol=1e-6, max_sweeps=300, seed=0):
        self.H = ensemble.H
        self.noise = ensemble.noise_powers
        self.params = params
        self.single_beam = single_beam
        self.n_draws = n_draws
        self.gap_tol = gap_tol
        self.max_sweeps = max_sweeps
        self.seed = seed
        self.id_rates = eia_rates(self.H, self.noise, params.p_max)
        self._V = None
        self.max_gap = 0.0

    def energy_covariances(self, mu):
        """EH-branch covariances and their priced values ``sum_k zeta mu_k h_k S h_k^H``."""
        P, zeta = self.params.p_max, self.params.zeta
        w = zeta * np.asarray(mu, dtype=float)
        A = weight_matrix(self.H, w)
        K = A.shape[-1]
        if K == 2:
            S, value, _ = two_user_ebf_batch(self.H, w, P)
            return S, value
        if not np.any(w > 0):
            return np.zeros_like(A), np.zeros(A.shape[0])
        S, V, primal, dual = batch_energy_beamforming(A, P, V0=self._V, gap_tol=self.gap_tol, max_sweeps=self.max_sweeps)
        self._V = V
        self.max_gap = max(self.max_gap, float(np.max((dual - primal) / np.maximum(dual, 1e-300))))
        if not self.single_beam:
            return S, primal
        v, _ = randomize_rank_one_batch(S, A, P, self.n_draws, self.seed)
        S1, _, primal1, _ = batch_energy_beamforming(A, P, V0=v[:, :, None], gap_tol=self.gap_tol, max_sweeps=50, rank=1)
        return S1, primal1

    def __call__(self, mu) -> DecisionBatch:
        P, zeta = self.params.p_max, self.params.zeta
        S, eh_value = self.energy_covariances(mu)
        id_value = self.id_rates.sum(axis=1)
        rho = (id_value > eh_value).astype(np.int8)
        N, K = self.id_rates.shape
        mode = np.repeat(rho[:, None], K, axis=1)
        S = np.where(rho[:, None, None] == 1, 0.0, S)
        p_info = P * mode.astype(float)
        rates = mode * self.id_rates
        energies = zeta * (1 - mode) * quadratic_forms(self.H, S)
        return DecisionBatch(mode, p_info, S, rates, energies)


def eia_subproblem(state: ChannelState, mu, params: SystemParams, single_beam=False, n_draws=1000) -> JointDecision:
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("dual variables must be non-negative")
    ens = ChannelEnsemble(state.H[None], state.noise_powers)
    solver = EiaSolver(ens, params, single_beam=single_beam, n_draws=n_draws, gap_tol=1e-7, max_sweeps=5000)
    d = solver(mu)[0]
    return JointDecision(int(d.mode[0]), d.s_e, d.rates, d.energies)


def eia_energy_bound(ensemble: ChannelEnsemble, params: SystemParams) -> np.ndarray:
    return params.zeta * params.p_max * (np.abs(ensemble.H).sum(axis=2) ** 2).mean(axis=0)


def solve_eia(ensemble: ChannelEnsemble, targets, params: SystemParams, single_beam=False, tol=1e-7,
              n_draws=100, max_iter=None) -> SchemeResult:
    """Joint cooperation: all receivers decode (E-IA) or all harvest (energy beamforming) per state."""
    K = ensemble.n_users
    targets = np.broadcast_to(np.asarray(targets, dtype=float), (K,)).copy()
    if np.any(targets < 0):
        raise ValueError("harvested-power targets must be non-negative")
    bound = eia_energy_bound(ensemble, params)
    if np.any(targets > bound):
        return infeasible_result(targets, bound, f"target exceeds E-IA energy bound {bound}")
    solver = EiaSolver(ensemble, params, single_beam=single_beam, n_draws=n_draws)
    rate_scale = float(np.max(solver.id_rates.sum(axis=1)))
    mu_upper = default_mu_upper(ensemble, params, rate_scale)
    result = solve_average_constrained(solver, targets, mu_upper, tol=tol, max_iter=max_iter, cache_size=64)
    result.energy_bound = bound
    result.info.update(scheme="EIA", single_beam=single_beam, upper_bound_note=EIA_CAVEAT, sdp_max_gap=solver.max_gap)
    return result
