"""Four users in two clusters: greedy pairing, every alternative pairing and joint cooperation.

Joint cooperation uses the ergodic interference alignment rate, which with line-of-sight
channels is an upper bound rather than an achievable rate.
"""

import argparse

from swipt.experiments import sweep_bound
from swipt.multiuser import all_groupings, greedy_grouping, pairwise_cooperation, solve_eia
from swipt.scenario import build_ensemble, load_scenario, scenario_dir

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--n-states", type=int, default=200)
args = parser.parse_args()

sc = load_scenario(scenario_dir() / "clusters_k4_pairwise.yaml").with_overrides(n_states=args.n_states)
ens = build_ensemble(sc)
bound = sweep_bound(sc, ens)
greedy = greedy_grouping(ens).canonical()
print(f"greedy grouping: {greedy.pairs}")
print(f"{'target (uW)':>12} " + " ".join(f"{str(g.pairs):>18}" for g in all_groupings(4)) + f" {'E-IA bound':>11}")
for fraction in (0.1, 0.25, 0.4):
    q = fraction * bound
    cells = []
    for g in all_groupings(4):
        res = pairwise_cooperation(ens, g, q, sc.params)
        mark = "*" if g == greedy else " "
        cells.append(f"{res.avg_sum_rate:17.3f}{mark}" if res.feasible else f"{'-':>17}{mark}")
    eia = solve_eia(ens, q, sc.params, single_beam=True)
    print(f"{1e6 * q:12.3f} " + " ".join(cells) + f" {eia.avg_sum_rate:11.3f}")
print("* greedy choice")
