"""Boundary points of the static two-user channel, checked against brute-force grids.

The energy-energy boundary comes from the closed-form two-transmitter energy beam along
price rays; the rate-energy boundary from mode (ID,EH) over a range of energy prices.
"""

import numpy as np

from swipt.experiments import run_weight_sweep
from swipt.scenario import build_ensemble, load_scenario, scenario_dir

for name in ("awgn_ee", "awgn_re"):
    sc = load_scenario(scenario_dir() / f"{name}.yaml")
    sc.sweep.points = 7
    region = run_weight_sweep(sc, build_ensemble(sc), n_phase=100_000, n_grid=1000)
    print(f"\n{name}")
    print(f"{'sweep':>10} {'rate':>8} {'Q1 (uW)':>10} {'Q2 (uW)':>10} {'gap vs grid':>12}")
    for r in region.records:
        q = 1e6 * np.asarray(r.energies)
        print(f"{r.sweep_value:10.4g} {r.sum_rate:8.3f} {q[0]:10.4f} {q[1]:10.4f} {r.gap:12.2e}")
