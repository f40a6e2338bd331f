"""
Checking optimality by brute force
==================================

Enumerate every 3-item sample from 9 ranked items and score each one.  The
quantile sample should be the only minimiser of all three statistics.
"""

from advsel import Population
from advsel.oracle import optimality_reports

pop = Population.strict(9)
reports = optimality_reports(pop, k=3)

for name, report in reports.items():
    best = [list(s.positions) for s in report.minimizers]
    print(f"{name:>3}: min {report.minimum.exact():>6}, runner-up {report.runner_up.exact():>6}, "
          f"minimisers {best} out of {report.evaluated}")

# With ties the optimum is a whole class of samples that look alike by rank.
tied = Population.from_levels([1, 1, 2, 2, 2, 3, 3, 4, 4])
for name, report in optimality_reports(tied, k=3).items():
    print(f"tied {name}: {len(report.minimizers)} minimisers, "
          f"all equivalent to the quantile sample: "
          f"{report.quantile_sample_is_unique_minimizer_up_to_equivalence}")
