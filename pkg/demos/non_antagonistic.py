"""
When the parties do not want opposite things
============================================

Two players with unrelated preferences over six items play cut-and-choose
with blocks of 2 and 3.  Compare the subgame-perfect outcome to the fully
opposed benchmarks built from each player's own ranking.
"""

import numpy as np

from advsel import Population, Preference
from advsel.gametheory import antagonistic_benchmark, canonical_utility, prefers, spe_cut_and_choose
from advsel.mechanisms import Player

pop = Population.strict(6)
rng = np.random.default_rng(3)
pref_I = Preference(tuple(int(v) for v in rng.permutation(6) + 1))
pref_II = Preference(tuple(int(v) for v in rng.permutation(6) + 1))
print("Player I levels ", pref_I.levels)
print("Player II levels", pref_II.levels)

for cutter in Player:
    spe = spe_cut_and_choose(pop, pref_I, pref_II, (2, 3), cutter)
    bench_I = antagonistic_benchmark(pop, pref_I, (2, 3), cutter, owner=Player.I)
    bench_II = antagonistic_benchmark(pop, pref_II, (2, 3), cutter, owner=Player.II)
    print(f"\ncutter {cutter.value}: outcome {spe.positions}")
    print(f"  I's utility {canonical_utility(pref_I, spe.sample)} vs benchmark "
          f"{canonical_utility(pref_I, bench_I.sample)}")
    print(f"  II weakly better than its benchmark: {prefers(pref_II, spe.sample, bench_II.sample)}")
