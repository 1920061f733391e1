"""Average sum-rate against a common harvested-power target for the two-user geometries.

Runs full, partial and no cooperation on the same fading ensemble and prints one table
per geometry.  Pass ``--n-states 2000`` for the full-size ensemble (about a minute).
"""

import argparse

import numpy as np

from swipt.experiments import sweep_bound
from swipt.scenario import build_ensemble, load_scenario, scenario_dir
from swipt.two_user import solve_scheme

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--n-states", type=int, default=500)
parser.add_argument("--points", type=int, default=8)
args = parser.parse_args()

for case in ("case1", "case2"):
    sc = load_scenario(scenario_dir() / f"{case}_fc.yaml").with_overrides(n_states=args.n_states)
    ens = build_ensemble(sc)
    grid = np.linspace(0.0, sc.sweep.max_fraction * sweep_bound(sc, ens), args.points)
    print(f"\n{case}: N={len(ens)}, P={sc.params.p_max:g} W, zeta={sc.params.zeta}")
    print(f"{'target (uW)':>12} {'FC':>8} {'PC':>8} {'NC':>8}")
    for q in grid:
        row = []
        for scheme in ("FC", "PC", "NC"):
            res = solve_scheme(ens, scheme, [q, q], sc.params)
            row.append(f"{res.avg_sum_rate:8.3f}" if res.feasible else f"{'-':>8}")
        print(f"{1e6 * q:12.3f} " + " ".join(row))
