"""Adversarial selection of representative samples.

Two parties with opposed interests pick k of n ranked items through a
cut-and-choose style mechanism; the package plays those mechanisms at
equilibrium, scores samples by exact KS / L1 / CvM distance to the population
CDF and checks the optimality results by brute force.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Cdf,
    Population,
    Preference,
    Sample,
    build_population,
    dominates,
    population_cdf,
    sample_cdf,
    samples_equivalent,
)
from .mechanisms import MechanismConfig, MechanismKind, Outcome, Player, quantile_outcome  # noqa: E402
from .stats import ExactStat, cvm_stat, ks_stat, l1_stat, quantile_closed_forms  # noqa: E402

__all__ = [
    "Cdf", "Population", "Preference", "Sample", "build_population", "dominates",
    "population_cdf", "sample_cdf", "samples_equivalent",
    "MechanismConfig", "MechanismKind", "Outcome", "Player", "quantile_outcome",
    "ExactStat", "cvm_stat", "ks_stat", "l1_stat", "quantile_closed_forms",
]
