"""
Random cut-and-choose and the spread of the sample
==================================================

The cutter splits the items into k blocks of m and one item is drawn at
random from each.  The sample mean is unbiased whatever the blocks are.  The
expected sample variance does depend on the blocks, and here ordered blocks
give the largest expected variance but the steadiest sample mean.
"""

from advsel.oracle import best_partition_bruteforce, partition_moments

values = [1, 2, 3, 4]
for part in [((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3))]:
    mom = partition_moments(values, part)
    print(f"{part}: mean {mom.mean}, E[var] {mom.expected_variance}, "
          f"var of mean {mom.mean_variance}, identity agrees with enumeration: {mom.routes_agree}")

low = best_partition_bruteforce(values, 2, 2, "expected_variance")
steady = best_partition_bruteforce(values, 2, 2, "mean_variance")
print("lowest E[var]:", low.optimal_partitions, low.optimum)
print("steadiest mean:", steady.optimal_partitions, steady.optimum, "(ordered:", steady.ordered_is_optimal, ")")
