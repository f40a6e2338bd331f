"""
The quantile mechanism on a small jury pool
===========================================

Nine candidates are ranked from least to most favourable to the plaintiff.
The plaintiff (Player I) cuts the pool into blocks of sizes 2, 3, 3 and the
defendant (Player II) strikes all but one candidate in each block.
"""

from advsel import Population, quantile_outcome
from advsel.mechanisms import cut_and_choose_outcome
from advsel.stats import all_stats

pool = Population.from_values([0.4, -1.3, 2.2, 0.9, -0.2, 1.5, -2.0, 0.1, 1.1],
                              labels=list("ABCDEFGHI"))

# At equilibrium the cutter keeps the smallest block at the top of the order
# and the chooser takes the lowest item of every block.
outcome = quantile_outcome(pool, k=3, m=1, cutter="I")
for actor, message in outcome.transcript:
    print(actor, message)

chosen = [pool.labels[pool.item_at(p) - 1] for p in outcome.positions]
print("positions", outcome.positions, "->", chosen)

# Statistics are exact fractions.
for name, value in all_stats(pool, outcome.sample).items():
    print(f"{name:>3} = {value.exact():>6}  ({value.decimal()})")

# Swapping roles gives the same sample.
print("cutter II:", quantile_outcome(pool, 3, 1, cutter="II").positions)

# Equal blocks do worse: the chooser pushes every pick to a block edge.
equal = cut_and_choose_outcome(pool, [3, 3, 3], cutter="I")
print("equal blocks:", equal.positions, "KS", all_stats(pool, equal.sample)["ks"].exact())
