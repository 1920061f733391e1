"""Experiment drivers: single solves, rate-energy region sweeps, validation suites."""

from __future__ import annotations

import csv
import json
import logging
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oracles
from .channel import ChannelEnsemble, ChannelState
from .model import all_mode_labels
from .multiuser import (EIA_CAVEAT, Grouping, all_groupings, eia_energy_bound, greedy_grouping,
                        pairwise_cooperation, solve_eia)
from .optim.sdp import (closed_form_dual, closed_form_two_user_ebf, solve_sdp_dual, weight_matrix,
                        weighted_energy_beamforming)
from .scenario import Scenario, build_ensemble
from .two_user import fc_candidates, fc_subproblem, solve_scheme, subproblem_value

log = logging.getLogger(__name__)


@dataclass
class Record:
    """One solved point: what goes into a CSV row plus diagnostics for the sidecar."""

    sweep_value: float
    sum_rate: float
    energies: np.ndarray
    feasible: bool
    gap: float
    mode_fractions: dict
    dual: list = field(default_factory=list)
    message: str = ""
    extra: dict = field(default_factory=dict)


@dataclass
class RERegion:
    scenario: Scenario
    records: list[Record]

    @property
    def columns(self) -> list[str]:
        K = self.scenario.n_users
        return (["sweep_value", "sum_rate_bps_hz"] + [f"q{k + 1}_w" for k in range(K)] + ["feasible", "gap"]
                + [f"frac_mode_{lab}" for lab in all_mode_labels(K)])

    def rows(self) -> list[list[str]]:
        K = self.scenario.n_users
        out = []
        for r in self.records:
            row = [repr(float(r.sweep_value)), repr(float(r.sum_rate))] + [repr(float(e)) for e in r.energies]
            row += [str(int(r.feasible)), repr(float(r.gap))]
            row += [repr(float(r.mode_fractions.get(lab, 0.0))) for lab in all_mode_labels(K)]
            out.append(row)
        return out

    def sum_rates(self) -> np.ndarray:
        return np.array([r.sum_rate for r in self.records])

    def values(self) -> np.ndarray:
        return np.array([r.sweep_value for r in self.records])


def _grouping(scenario: Scenario, ensemble: ChannelEnsemble) -> Grouping:
    if scenario.grouping == "greedy":
        return greedy_grouping(ensemble)
    pairs = tuple(tuple(int(u) for u in p) for p in scenario.grouping if len(p) == 2)
    single = [int(p[0]) for p in scenario.grouping if len(p) == 1]
    return Grouping(pairs, single[0] if single else None).validate(ensemble.n_users)


def solve_point(scenario: Scenario, ensemble: ChannelEnsemble, targets, sweep_value=0.0) -> Record:
    """Solve the scenario's scheme at one target vector; errors become an infeasible record."""
    K = ensemble.n_users
    targets = np.broadcast_to(np.asarray(targets, dtype=float), (K,)).copy()
    try:
        if scenario.scheme in ("FC", "PC", "NC"):
            res = solve_scheme(ensemble, scenario.scheme, targets, scenario.params, tol=scenario.tol)
            extra = {"iterations": res.iterations, "converged": res.converged}
        elif scenario.scheme == "EIA":
            res = solve_eia(ensemble, targets, scenario.params, single_beam=scenario.single_beam, tol=scenario.tol,
                            n_draws=scenario.n_draws)
            extra = {"iterations": res.iterations, "converged": res.converged, "note": EIA_CAVEAT}
        else:
            grouping = _grouping(scenario, ensemble)
            res = pairwise_cooperation(ensemble, grouping, targets, scenario.params, tol=scenario.tol)
            extra = {"grouping": [list(p) for p in grouping.pairs], "leftover": grouping.leftover,
                     "optimized_energies": res.optimized_energies.tolist(), "energy_gap": res.energy_gap.tolist()}
            return Record(sweep_value, res.avg_sum_rate, res.avg_energies, res.feasible, res.gap, res.mode_fractions,
                          [], "", extra)
        fractions = res.mode_fractions() if res.feasible else {}
        return Record(sweep_value, res.avg_sum_rate, np.asarray(res.avg_energies), res.feasible, res.gap, fractions,
                      np.asarray(res.dual).tolist(), res.message, extra)
    except Exception as exc:  # keep sweeping; the failure is recorded in the row
        log.exception("solve failed at %s", sweep_value)
        return Record(sweep_value, float("nan"), np.full(K, np.nan), False, float("nan"), {}, [], f"error: {exc}")


def sweep_bound(scenario: Scenario, ensemble: ChannelEnsemble) -> float:
    """Grid edge shared by all schemes on a channel: the co-phased per-user energy bound."""
    return float(eia_energy_bound(ensemble, scenario.params).min())


def run_region_sweep(scenario: Scenario, ensemble: ChannelEnsemble | None = None) -> RERegion:
    if ensemble is None:
        ensemble = build_ensemble(scenario)
    if scenario.sweep.mode == "weights":
        return run_weight_sweep(scenario, ensemble)
    grid = scenario.sweep.grid(sweep_bound(scenario, ensemble))
    records = []
    for q in grid:
        if scenario.sweep.equal_targets or scenario.targets is None:
            targets = np.full(ensemble.n_users, q)
        else:
            targets = scenario.targets * (q / max(scenario.targets.max(), 1e-300))
        records.append(solve_point(scenario, ensemble, targets, q))
    return RERegion(scenario, records)


def run_weight_sweep(scenario: Scenario, ensemble: ChannelEnsemble, n_phase=100_000, n_grid=2_000) -> RERegion:
    """Boundary points of a static two-user channel by sweeping energy prices.

    ``boundary: ee`` traces the (EH,EH) energy-energy boundary along rays
    ``mu = (cos t, sin t)``; ``boundary: re`` traces the (ID,EH) rate-energy boundary
    over ``mu_2`` on a log grid.  Each point's ``gap`` column is the relative shortfall
    against a brute-force grid oracle (negative when the solver beats the grid).
    """
    if ensemble.n_users != 2 or len(ensemble) != 1:
        raise ValueError("weight sweeps need a single static two-user channel")
    state = ensemble[0]
    H, noise = state.H, state.noise_powers
    P, zeta = scenario.params.p_max, scenario.params.zeta
    spec = scenario.sweep
    n = int(spec.points) if not isinstance(spec.points, (list, tuple)) else len(spec.points)
    records = []
    if spec.boundary == "ee":
        for t in np.linspace(0.0, np.pi / 2, n):
            mu = np.array([np.cos(t), np.sin(t)])
            S = closed_form_two_user_ebf(H, mu, P).matrix
            q = zeta * np.real(np.einsum("ki,ij,kj->k", H, S, H.conj()))
            oracle_value, _, _ = oracles.phase_grid_ebf(H, mu, P, n_phase)
            gap = (zeta * oracle_value - mu @ q) / max(abs(zeta * oracle_value), 1e-300)
            records.append(Record(float(t), 0.0, q, True, float(gap), {"EH_EH": 1.0}))
    else:
        lo, hi = spec.weight_range
        for mu2 in np.logspace(lo, hi, n):
            d = fc_candidates(H[None], noise, np.array([0.0, mu2]), scenario.params)[1][0]  # mode (ID,EH)
            oracle_value, _, _ = oracles.p1_theta_grid(H, noise, mu2, scenario.params, n_grid, n_grid)
            value = d.rates[0] + mu2 * d.energies[1]
            gap = (oracle_value - value) / max(abs(oracle_value), 1e-300)
            records.append(Record(float(mu2), float(d.rates[0]), d.energies, True, float(gap), {"ID_EH": 1.0},
                                  extra={"p1_info": float(d.p_info[0])}))
    return RERegion(scenario, records)


def git_version() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_region(region: RERegion, out_dir, stem: str | None = None) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json`` (config echo, version, per-row diagnostics)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or f"{region.scenario.name}_{region.scenario.scheme.lower()}"
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(region.columns)
        writer.writerows(region.rows())
    sidecar = {
        "version": git_version(),
        "scenario": region.scenario.echo(),
        "columns": region.columns,
        "rows": [{"sweep_value": r.sweep_value, "dual": r.dual, "message": r.message, "extra": r.extra}
                 for r in region.records],
    }
    if region.scenario.scheme == "EIA":
        sidecar["label"] = "upper bound"
        sidecar["note"] = EIA_CAVEAT
    json_path.write_text(json.dumps(sidecar, indent=2, default=_jsonable) + "\n")
    return csv_path, json_path


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return str(x)


def read_region_csv(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows]) for key in rows[0]} if rows else {}


def emit_summary(record: Record, n_users: int | None = None) -> str:
    """Plain-text table of one solved point."""
    K = len(record.energies) if n_users is None else n_users
    lines = [
        f"{'sum-rate (bps/Hz)':<22}{record.sum_rate:.6g}",
        *[f"{f'E[Q_{k + 1}] (W)':<22}{record.energies[k]:.6g}" for k in range(K)],
        f"{'feasible':<22}{record.feasible}",
        f"{'dual variables':<22}{', '.join(f'{m:.6g}' for m in record.dual) or '-'}",
        f"{'duality gap':<22}{record.gap:.3g}",
        "mode occupancy:",
    ]
    for lab in all_mode_labels(K):
        frac = record.mode_fractions.get(lab, 0.0)
        if frac > 0:
            lines.append(f"  {lab:<20}{100 * frac:7.3f} %")
    if record.message:
        lines.append(f"note: {record.message}")
    return "\n".join(lines)


# --- validation suites ------------------------------------------------------------------------------


def _check(name, errors, tol, seed, **info) -> dict:
    errors = np.asarray(errors, dtype=float)
    worst = float(np.max(errors)) if errors.size else 0.0
    return {"check": name, "tolerance": tol, "max_error": worst, "n": int(errors.size), "seed": seed,
            "passed": bool(np.all(np.isfinite(errors)) and worst <= tol), **info}


def _random_pair(rng):
    return (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)


def validate_energy_beam(n=100, seed=0, n_phase=1_000_000) -> list[dict]:
    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(n):
        H, mu = _random_pair(rng), rng.exponential(size=2)
        S = closed_form_two_user_ebf(H, mu, 1.0).matrix
        value = float(np.real(np.trace(weight_matrix(H, mu) @ S)))
        grid, _, _ = oracles.phase_grid_ebf(H, mu, 1.0, n_phase)
        errors.append(abs(value - grid) / abs(grid))
    return [_check("energy_beam_vs_phase_grid", errors, 1e-6, seed, n_phase=n_phase)]


def validate_closed_form_dual(n=100, seed=0) -> list[dict]:
    rng = np.random.default_rng(seed)
    lam_err, slack = [], []
    for _ in range(n):
        H, mu = _random_pair(rng), rng.exponential(size=2)
        A = weight_matrix(H, mu)
        lam, _ = solve_sdp_dual(A, 1.0)
        ref = closed_form_dual(H, mu)
        lam_err.append(np.max(np.abs(lam - ref) / np.abs(ref)))
        S = closed_form_two_user_ebf(H, mu, 1.0).matrix
        slack.append(np.linalg.norm((np.diag(ref) - A) @ S) / np.linalg.norm(A))
    return [_check("closed_form_dual", lam_err, 1e-5, seed),
            _check("complementary_slackness", slack, 1e-8, seed)]


def _fc_states(ensemble: ChannelEnsemble | None, n, rng) -> list[ChannelState]:
    if ensemble is not None and ensemble.n_users == 2 and len(ensemble) >= n:
        return [ensemble[i] for i in range(n)]
    return [ChannelState(0.03 * _random_pair(rng), np.full(2, 1e-8)) for _ in range(n)]


def validate_fc_oracle(scenario: Scenario, ensemble: ChannelEnsemble | None = None, n=100, seed=0, grid_n=200) -> list[dict]:
    """Two-sided agreement of the per-state FC solver with the brute-force grid."""
    rng = np.random.default_rng(seed)
    params = scenario.params
    errors = []
    for state in _fc_states(ensemble, n, rng):
        scale = 20.0 / (params.zeta * params.p_max * np.mean(np.abs(state.H) ** 2))
        mu = scale * 10 ** rng.uniform(-3, 1, size=2)
        value = subproblem_value(fc_subproblem(state, mu, params), mu)
        grid = oracles.fc_cross_check(state, mu, params, grid_n)
        errors.append(max(grid - value, value - grid) / abs(value))
    return [_check("fc_vs_grid", errors, 1e-3, seed, grid_n=grid_n)]


def validate_sdp_gap(n=100, seed=0, tol=1e-6) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for K in (3, 4):
        gaps = []
        for _ in range(n):
            h = (rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))) / np.sqrt(2)
            sol = weighted_energy_beamforming(h, rng.exponential(size=K), 1.0, tol=tol)
            gaps.append(sol.gap)
        out.append(_check(f"sdp_gap_K{K}", gaps, tol, seed))
    return out


def validate_grouping(scenario: Scenario, ensemble: ChannelEnsemble, fraction=0.25) -> list[dict]:
    """Greedy grouping against every pairing at one mid-range common target."""
    q = fraction * sweep_bound(scenario, ensemble)
    greedy = greedy_grouping(ensemble)
    rates = {}
    for g in all_groupings(ensemble.n_users):
        res = pairwise_cooperation(ensemble, g, q, scenario.params, tol=scenario.tol)
        rates[g] = res.avg_sum_rate if res.feasible else -np.inf
    best = max(rates.values())
    shortfall = (best - rates[greedy.canonical()]) / abs(best) if np.isfinite(best) else np.inf
    return [_check("greedy_is_best_pairing", [shortfall], 1e-9, scenario.channel.get("seed"),
                   target_w=q, greedy=[list(p) for p in greedy.pairs],
                   sum_rates={str([list(p) for p in g.pairs]): r for g, r in rates.items()})]


SUITES = ("prop1", "appendix_dual", "fc_oracle", "sdp_gap", "grouping_exhaustive")


def run_validate(scenario: Scenario, suite: str, seed=None) -> dict:
    seed = int(scenario.channel.get("seed", 0) if seed is None else seed)
    if suite == "prop1":
        checks = validate_energy_beam(seed=seed)
    elif suite == "appendix_dual":
        checks = validate_closed_form_dual(seed=seed)
    elif suite == "fc_oracle":
        ens = build_ensemble(scenario) if scenario.n_users == 2 else None
        checks = validate_fc_oracle(scenario, ens, seed=seed)
    elif suite == "sdp_gap":
        checks = validate_sdp_gap(seed=seed)
    elif suite == "grouping_exhaustive":
        if scenario.n_users < 3:
            raise ValueError("grouping_exhaustive needs K >= 3")
        checks = validate_grouping(scenario, build_ensemble(scenario))
    else:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    return {"suite": suite, "scenario": scenario.name, "passed": all(c["passed"] for c in checks), "checks": checks}
