from types import SimpleNamespace

import numpy as np
import pytest

from swipt.optim.dual import solve_average_constrained


def _discrete_evaluator(rates, energies):
    """Per-state choice among a few actions maximizing rate + mu . energy."""
    rates, energies = np.asarray(rates, float), np.asarray(energies, float)  # (N, A), (N, A, m)

    def evaluate(mu):
        score = rates + energies @ mu
        pick = np.argmax(score, axis=1)
        idx = np.arange(rates.shape[0])
        return SimpleNamespace(sum_rates=rates[idx, pick], energies=energies[idx, pick])

    return evaluate


def test_slack_targets_return_mu_zero():
    ev = _discrete_evaluator([[1.0, 0.0]], [[[0.0], [1.0]]])
    res = solve_average_constrained(ev, [0.0], 10.0)
    assert res.feasible and res.avg_sum_rate == 1.0
    np.testing.assert_array_equal(res.dual, [0.0])


def test_time_sharing_hits_lp_optimum():
    # one state, two actions: (rate 1, energy 0) or (rate 0, energy 1); target 0.3 -> rate 0.7
    ev = _discrete_evaluator([[1.0, 0.0]], [[[0.0], [1.0]]])
    res = solve_average_constrained(ev, [0.3], 10.0, tol=1e-10)
    assert res.feasible
    assert res.avg_sum_rate == pytest.approx(0.7, abs=1e-9)
    assert res.avg_energies[0] == pytest.approx(0.3, abs=1e-9)
    assert res.dual[0] == pytest.approx(1.0, rel=1e-6)
    assert np.sum(res.weights) == pytest.approx(1.0)


def test_two_constraints_match_linprog():
    from scipy.optimize import linprog

    rng = np.random.default_rng(0)
    N, A = 30, 4
    rates = rng.uniform(0, 5, (N, A))
    energies = rng.uniform(0, 1, (N, A, 2))
    targets = np.array([0.6, 0.55])
    res = solve_average_constrained(_discrete_evaluator(rates, energies), targets, 1e3, tol=1e-10)
    # relaxed per-state randomized policy LP = ergodic optimum with time sharing
    c = -rates.ravel() / N
    A_ub = -np.stack([energies[:, :, k].ravel() / N for k in range(2)])
    A_eq = np.kron(np.eye(N), np.ones(A))
    lp = linprog(c, A_ub=A_ub, b_ub=-targets, A_eq=A_eq, b_eq=np.ones(N), bounds=(0, 1), method="highs")
    assert res.feasible
    assert res.avg_sum_rate <= -lp.fun + 1e-9
    assert res.avg_sum_rate == pytest.approx(-lp.fun, rel=1e-6)
    assert np.all(res.avg_energies >= targets - 1e-9)


def test_unreachable_targets_flagged():
    ev = _discrete_evaluator([[1.0, 0.0]], [[[0.0], [1.0]]])
    res = solve_average_constrained(ev, [2.0], 10.0)
    assert not res.feasible
    assert res.message


def test_dual_bound_dominates_primal():
    rng = np.random.default_rng(3)
    rates = rng.uniform(0, 3, (50, 3))
    energies = rng.uniform(0, 1, (50, 3, 1))
    res = solve_average_constrained(_discrete_evaluator(rates, energies), [0.7], 100.0, tol=1e-9)
    assert res.dual_value >= res.avg_sum_rate - 1e-12
    assert res.gap <= 1e-6


def test_cache_reuses_nonrepeatable_batches():
    calls = {"n": 0}
    base = _discrete_evaluator([[1.0, 0.0]], [[[0.0], [1.0]]])

    def flaky(mu):
        calls["n"] += 1
        return base(mu)

    res = solve_average_constrained(flaky, [0.3], 10.0, tol=1e-10, cache_size=64)
    n_iter = res.iterations
    # every selected policy came from the cache: no evaluations after the search
    assert calls["n"] == n_iter + 1
