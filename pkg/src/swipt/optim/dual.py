"""Dual decomposition for ergodic problems with average harvested-power targets.

The generic problem is ``max E[sum-rate]  s.t.  E[Q_k] >= target_k`` where, for fixed
prices ``mu``, every fading state can be solved on its own.  The dual function

    g(mu) = E[max over per-state decisions of (sum-rate + mu . Q)] - mu . targets

is convex; it is minimized over a box with the ellipsoid method, using the subgradient
``E[Q] - targets``.  A primal point is then recovered by time-sharing between the
per-state policies seen at a few dual iterates (a tiny LP), which is what the
time-sharing argument for zero duality gap licenses.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .ellipsoid import ellipsoid_minimize

log = logging.getLogger(__name__)


@dataclass
class SchemeResult:
    """Solution of one average-constrained problem.

    ``policies`` are per-state decision batches and ``weights`` their time-sharing
    fractions (summing to one); averages are weighted sample averages over both.
    """

    avg_sum_rate: float
    avg_energies: np.ndarray
    policies: list
    weights: np.ndarray
    dual: np.ndarray
    dual_value: float
    targets: np.ndarray
    feasible: bool
    converged: bool = True
    iterations: int = 0
    message: str = ""
    energy_bound: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        """Relative gap between the dual bound and the achieved average sum-rate."""
        if not np.isfinite(self.avg_sum_rate):
            return float("nan")
        return max(0.0, self.dual_value - self.avg_sum_rate) / max(abs(self.dual_value), 1e-12)

    @property
    def per_state(self):
        """Decisions of the policy carrying the largest time-sharing weight."""
        if not self.policies:
            return None
        return self.policies[int(np.argmax(self.weights))]

    def mode_fractions(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for w, pol in zip(self.weights, self.policies):
            for lab, frac in pol.mode_fractions().items():
                out[lab] = out.get(lab, 0.0) + w * frac
        return out


def infeasible_result(targets, bound, message) -> SchemeResult:
    K = len(targets)
    return SchemeResult(float("nan"), np.full(K, np.nan), [], np.zeros(0), np.full(K, np.nan), float("nan"),
                        np.asarray(targets, float), False, True, 0, message, np.asarray(bound, float))


def _mixture(rates, energies, targets):
    """LP over time-sharing weights; returns weights or None if infeasible."""
    J = len(rates)
    Q = np.asarray(energies)
    scale = np.maximum(np.maximum(np.abs(targets), np.abs(Q).max(axis=0)), 1e-300)
    Q = Q / scale
    res = linprog(-np.asarray(rates), A_ub=-Q.T, b_ub=-np.asarray(targets) / scale,
                  A_eq=np.ones((1, J)), b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    w = np.clip(res.x, 0, None)
    return w / w.sum()


def solve_average_constrained(evaluate, targets, mu_upper, tol=1e-8, max_iter=None, enlarge=2, cache_size=0):
    """Minimize the dual over ``0 <= mu <= mu_upper`` and recover a time-shared primal.

    Parameters
    ----------
    evaluate : callable
        ``evaluate(mu)`` returns a decision batch (with ``sum_rates`` and ``energies``
        arrays) maximizing ``sum-rate + mu . Q`` in every state.
    targets : array_like
        Average harvested-power targets, one per constrained user.
    mu_upper : float or array_like
        Box for the dual variables.  If the recovered primal is infeasible the box is
        enlarged tenfold, at most ``enlarge`` times, with a warning.
    tol : float
        Relative tolerance on the certified dual gap.
    cache_size : int
        Number of most recent decision batches kept in memory.  Needed when
        ``evaluate`` is not exactly repeatable (warm-started inner solvers): selected
        iterates found in the cache are reused as-is, the rest are re-evaluated and the
        time-sharing weights are re-fitted on what was actually returned.
    """
    targets = np.asarray(targets, dtype=float)
    m = targets.size
    zero = evaluate(np.zeros(m))
    e0 = zero.energies.mean(axis=0)
    r0 = float(np.mean(zero.sum_rates))
    if np.all(e0 >= targets):
        return SchemeResult(r0, e0, [zero], np.ones(1), np.zeros(m), r0, targets, True, True, 1, "targets slack at mu=0")

    mu_upper = np.broadcast_to(np.asarray(mu_upper, dtype=float), (m,)).copy()
    mus, rates, energies, values = [np.zeros(m)], [r0], [e0], [r0]
    cache = OrderedDict({0: zero})

    def oracle(mu):
        batch = evaluate(mu)
        if cache_size:
            cache[len(mus)] = batch
            while len(cache) > cache_size:
                cache.popitem(last=False)
        R = float(np.mean(batch.sum_rates))
        E = batch.energies.mean(axis=0)
        g = R + float(mu @ (E - targets))
        mus.append(mu.copy())
        rates.append(R)
        energies.append(E)
        values.append(g)
        return g, E - targets

    total_iter, status = 0, None
    for attempt in range(enlarge + 1):
        _, status = ellipsoid_minimize(oracle, np.zeros(m), mu_upper, rel_tol=tol, max_iter=max_iter)
        total_iter += status.iterations
        weights = _mixture(rates, energies, targets)
        if weights is not None:
            break
        if attempt < enlarge:
            log.warning("targets %s not met inside dual box %s; enlarging", targets, mu_upper)
            mu_upper = mu_upper * 10.0
    dual_value = float(min(values))
    if weights is None:
        # report the iterate closest to feasibility
        scale = np.maximum(np.abs(targets), 1e-300)
        short = [np.max((targets - E) / scale) for E in energies]
        j = int(np.argmin(short))
        batch = evaluate(mus[j])
        return SchemeResult(float(np.mean(batch.sum_rates)), batch.energies.mean(axis=0), [batch], np.ones(1), mus[j],
                            dual_value, targets, False, status.converged, total_iter, "targets not attainable within dual box")

    keep = np.flatnonzero(weights > 1e-12)
    w = weights[keep] / weights[keep].sum()
    policies = [cache[j] if j in cache else evaluate(mus[j]) for j in keep]
    if cache_size and any(j not in cache for j in keep):
        refit = _mixture([float(np.mean(p.sum_rates)) for p in policies], [p.energies.mean(axis=0) for p in policies], targets)
        if refit is not None:
            w = refit
    avg_rate = float(sum(wi * np.mean(p.sum_rates) for wi, p in zip(w, policies)))
    avg_e = sum(wi * p.energies.mean(axis=0) for wi, p in zip(w, policies))
    mu_star = mus[int(np.argmin(values))] if len(values) > 1 else np.zeros(m)
    return SchemeResult(avg_rate, np.asarray(avg_e), policies, w, mu_star, max(dual_value, avg_rate), targets,
                        True, status.converged, total_iter, "")
