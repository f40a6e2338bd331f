"""
Comparing mechanisms by Monte Carlo
===================================

972 standard-normal draws; each mechanism picks 12 of them, 1000 times over.
The quantile mechanism is deterministic so its KS is one number; the others
are summarised by mean and range.  The last line searches for the random
sample size whose mean KS comes close to the quantile mechanism's.
"""

import sys

from advsel.simulation import calibrate_equivalent_n, comparison_config, make_population, run_comparison, summarize

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42
config = comparison_config(seed=seed, reps=1000)
pop = make_population(config)
records = run_comparison(config, pop, threads=4)

print(f"{'mechanism':<20}{'mean':>10}{'min':>10}{'max':>10}")
for row in summarize(records):
    print(f"{row['mechanism']:<20}{float(row['mean']):>10.4f}{float(row['min']):>10.4f}{float(row['max']):>10.4f}")

size = calibrate_equivalent_n(pop, config.k, config.m, reps=1000, seed=seed)
print(f"a random sample needs about {size} items to match 12 quantile picks")
