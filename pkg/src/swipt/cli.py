"""Command line entry point: ``swipt {solve,sweep,validate,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import oracles
from .experiments import SUITES, emit_summary, run_region_sweep, run_validate, solve_point, write_region
from .scenario import build_ensemble, load_scenario, parse_power
from .two_user import fc_subproblem, subproblem_value


def _scenario(args):
    sc = load_scenario(args.scenario)
    return sc.with_overrides(seed=args.seed, tol=args.tol, single_beam=True if args.single_beam else None,
                             n_states=args.n_states)


def cmd_solve(args) -> int:
    sc = _scenario(args)
    ens = build_ensemble(sc)
    if args.targets:
        targets = np.array([parse_power(t) for t in args.targets])
    elif sc.targets is not None:
        targets = sc.targets
    else:
        targets = np.zeros(sc.n_users)
    record = solve_point(sc, ens, targets, float(np.max(targets)))
    print(f"scenario {sc.name}  scheme {sc.scheme}  K={sc.n_users}  N={len(ens)}")
    if sc.scheme == "EIA":
        print("E-IA sum-rate is an upper bound (symmetric-phase assumption)")
    print(emit_summary(record, sc.n_users))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"targets_w": targets.tolist(), "sum_rate_bps_hz": record.sum_rate,
                   "energies_w": np.asarray(record.energies).tolist(), "feasible": record.feasible, "gap": record.gap,
                   "dual": record.dual, "mode_fractions": record.mode_fractions, "message": record.message,
                   "scenario": sc.echo()}
        (out / f"{sc.name}_{sc.scheme.lower()}_solve.json").write_text(json.dumps(payload, indent=2, default=str) + "\n")
    return 0 if record.feasible else 1


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    region = run_region_sweep(sc)
    csv_path, json_path = write_region(region, args.out or ".")
    print(f"wrote {csv_path} and {json_path} ({len(region.records)} rows)")
    failed = [r for r in region.records if r.message.startswith("error")]
    return 1 if failed else 0


def cmd_validate(args) -> int:
    sc = _scenario(args)
    suites = SUITES if args.suite == "all" else [args.suite]
    reports = [run_validate(sc, s, seed=args.seed) for s in suites]
    for rep in reports:
        for c in rep["checks"]:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"{status}  {rep['suite']}/{c['check']}: max error {c['max_error']:.3g} (tol {c['tolerance']:g}, n={c['n']})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{sc.name}_validate.json").write_text(json.dumps(reports, indent=2, default=str) + "\n")
    return 0 if all(r["passed"] for r in reports) else 1


def cmd_oracle(args) -> int:
    """Per-state FC solver against the brute-force grid on the first states of a scenario."""
    sc = _scenario(args)
    if sc.n_users != 2:
        print("oracle comparison needs a two-user scenario", file=sys.stderr)
        return 2
    ens = build_ensemble(sc)
    mu = np.array(args.mu, dtype=float)
    worst = 0.0
    print(f"{'state':>5}  {'solver':>14}  {'grid':>14}  {'rel diff':>10}  mode")
    for n in range(min(args.n, len(ens))):
        d = fc_subproblem(ens[n], mu, sc.params)
        v = subproblem_value(d, mu)
        g = oracles.fc_cross_check(ens[n], mu, sc.params, args.grid_n)
        rel = (v - g) / abs(v)
        worst = max(worst, abs(rel))
        print(f"{n:5d}  {v:14.8g}  {g:14.8g}  {rel:10.2e}  {tuple(int(m) for m in d.mode)}")
    ok = worst <= args.rel_tol
    print(f"{'PASS' if ok else 'FAIL'}: max relative difference {worst:.3g} (tol {args.rel_tol:g})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swipt", description="SWIPT interference-channel rate-energy tools")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the channel seed")
        p.add_argument("--n-states", type=int, help="override the number of fading states")
        p.add_argument("--tol", type=float, help="override the dual solver relative tolerance")
        p.add_argument("--single-beam", action="store_true", help="E-IA: restrict energy beamforming to one beam")
        return p

    p = common(sub.add_parser("solve", help="solve one target vector and print a summary"))
    p.add_argument("--targets", nargs="+", help="harvested-power targets (W or with unit, e.g. '-20 dBm')")
    p.set_defaults(func=cmd_solve)

    p = common(sub.add_parser("sweep", help="trace a rate-energy region into CSV + JSON"))
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("validate", help="run an oracle validation suite"))
    p.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    p.set_defaults(func=cmd_validate)

    p = common(sub.add_parser("oracle", help="compare the FC per-state solver with the brute-force grid"))
    p.add_argument("--mu", nargs=2, type=float, default=[0.0, 0.0])
    p.add_argument("-n", type=int, default=10, help="number of states")
    p.add_argument("--grid-n", type=int, default=200)
    p.add_argument("--rel-tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
