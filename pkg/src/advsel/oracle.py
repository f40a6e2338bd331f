"""Brute-force ground truth.

Exhaustive enumeration of samples and partitions, kept independent of the
closed forms in :mod:`advsel.stats` and :mod:`advsel.mechanisms`.  All
comparisons are on integers or ``Fraction`` values; every enumeration is
bounded by an explicit limit and refuses (``EnumerationLimitError``) rather
than sampling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import Population, Preference, Sample, dominates
from .gametheory import (
    EnumerationLimitError,
    antagonistic_benchmark,
    canonical_utility,
    count_partitions,
    iter_partitions,
    preference_cdf,
    spe_cut_and_choose,
)
from .mechanisms import Player, implement_quantiles, quantile_positions
from .stats import STAT_KINDS, ExactStat, quantile_closed_forms, alternative_closed_forms

__all__ = [
    "OptimalityReport",
    "PartitionMoments",
    "PartitionSearch",
    "optimal_samples_bruteforce",
    "optimality_reports",
    "partition_moments",
    "best_partition_bruteforce",
    "to_fraction",
    "verify_theorem1",
    "verify_theorem2",
    "verify_theorem3",
    "verify_theorem4",
]

SAMPLE_LIMIT = 10**7
PARTITION_LIMIT = 10**6
MOMENT_ENUM_LIMIT = 10**6
_CHUNK = 100_000


@dataclass
class OptimalityReport:
    stat_kind: str
    minimum: ExactStat
    minimizers: list[Sample]
    quantile_sample_is_unique_minimizer_up_to_equivalence: bool | None
    runner_up: ExactStat | None = None
    evaluated: int = 0

    def to_json(self) -> dict:
        return {
            "stat_kind": self.stat_kind,
            "minimum": self.minimum.to_json(),
            "minimizers": [list(s.positions) for s in self.minimizers],
            "quantile_sample_is_unique_minimizer_up_to_equivalence":
                self.quantile_sample_is_unique_minimizer_up_to_equivalence,
            "runner_up": None if self.runner_up is None else self.runner_up.to_json(),
            "evaluated": self.evaluated,
        }


def _combination_chunks(n: int, k: int) -> Iterable[np.ndarray]:
    it = itertools.combinations(range(1, n + 1), k)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64).reshape(len(block), k)


def _scores(pop: Population, combos: np.ndarray) -> dict[str, np.ndarray]:
    """Integer numerators of KS, L1, CvM for each row (fixed denominators)."""
    n = pop.n
    rows, k = combos.shape
    levels = pop.sorted_levels
    sl = levels[combos - 1]
    hist = np.zeros((rows, pop.num_levels + 1), dtype=np.int64)
    ridx = np.arange(rows)
    for j in range(k):
        hist[ridx, sl[:, j]] += 1
    cy = np.cumsum(hist, axis=1)[:, levels]
    cx = np.array([np.sum(levels <= v) for v in levels], dtype=np.int64)
    dtype = np.int64 if n * (n * k) ** 2 < 2**62 else object
    g = cx.astype(dtype)[None, :] * k - cy.astype(dtype) * n
    a = np.abs(g)
    return {"ks": a.max(axis=1), "l1": a.sum(axis=1), "cvm": (g * g).sum(axis=1), "levels": sl}


def optimality_reports(pop: Population, k: int, m: int | None = None,
                       limit: int = SAMPLE_LIMIT) -> dict[str, OptimalityReport]:
    """Minimizers of all three statistics over every k-subset, in one pass."""
    n = pop.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    total = math.comb(n, k)
    if total > limit:
        raise EnumerationLimitError(f"C({n},{k}) = {total} samples exceed the limit {limit}")
    if m is None and (n // k) % 2 == 1 and n % k == 0:
        m = (n // k - 1) // 2
    target = None
    if m is not None and n == (2 * m + 1) * k:
        target = pop.sorted_levels[np.asarray(quantile_positions(n, k, m)) - 1]

    denominators = {"ks": n * k, "l1": n * n * k, "cvm": n**3 * k**2}
    best = {s: None for s in STAT_KINDS}
    second = {s: None for s in STAT_KINDS}
    winners: dict[str, list] = {s: [] for s in STAT_KINDS}
    # per stat: does a non-equivalent sample tie the optimum, and is the class optimal
    foreign_at_min = {s: False for s in STAT_KINDS}

    for combos in _combination_chunks(n, k):
        sc = _scores(pop, combos)
        equiv = None if target is None else np.all(sc["levels"] == target[None, :], axis=1)
        for s in STAT_KINDS:
            vals = sc[s]
            low = vals.min()
            if best[s] is None or low < best[s]:
                if best[s] is not None:
                    second[s] = best[s]
                best[s] = low
                winners[s] = []
                foreign_at_min[s] = False
            if low == best[s]:
                hit = vals == low
                winners[s].extend(Sample(tuple(int(p) for p in row)) for row in combos[hit])
                if equiv is not None and np.any(hit & ~equiv):
                    foreign_at_min[s] = True
            above = vals[vals > best[s]]
            if above.size:
                cand = above.min()
                if second[s] is None or cand < second[s]:
                    second[s] = cand

    reports = {}
    for s in STAT_KINDS:
        unique = None
        if target is not None:
            class_hit = any(np.array_equal(pop.sorted_levels[np.asarray(w.positions) - 1], target)
                            for w in winners[s])
            unique = class_hit and not foreign_at_min[s]
        reports[s] = OptimalityReport(
            s, ExactStat(int(best[s]), denominators[s]), winners[s], unique,
            None if second[s] is None else ExactStat(int(second[s]), denominators[s]), total)
    return reports


def optimal_samples_bruteforce(pop: Population, k: int, stat_kind: str,
                               limit: int = SAMPLE_LIMIT) -> OptimalityReport:
    if stat_kind not in STAT_KINDS:
        raise ValueError(f"stat_kind must be one of {STAT_KINDS}")
    return optimality_reports(pop, k, limit=limit)[stat_kind]


# ---------------------------------------------------------------------------
# random cut-and-choose moments
# ---------------------------------------------------------------------------

def to_fraction(v) -> Fraction:
    """Exact rational from an int, Fraction, ``"a/b"`` or decimal string, or float (via its repr)."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(str(v).strip())


def _variance(xs: Sequence[Fraction]) -> Fraction:
    mu = sum(xs, Fraction(0)) / len(xs)
    return sum(((x - mu) ** 2 for x in xs), Fraction(0)) / len(xs)


@dataclass
class PartitionMoments:
    mean: Fraction
    expected_variance: Fraction
    mean_variance: Fraction
    enumerated_mean: Fraction | None = None
    enumerated_variance: Fraction | None = None
    enumeration_skipped: bool = False

    @property
    def routes_agree(self) -> bool | None:
        if self.enumeration_skipped:
            return None
        return self.enumerated_variance == self.expected_variance and self.enumerated_mean == self.mean

    def to_json(self) -> dict:
        f = lambda x: None if x is None else str(x)  # noqa: E731
        return {
            "mean": f(self.mean),
            "expected_variance": f(self.expected_variance),
            "mean_variance": f(self.mean_variance),
            "enumerated_mean": f(self.enumerated_mean),
            "enumerated_variance": f(self.enumerated_variance),
            "enumeration_skipped": self.enumeration_skipped,
            "routes_agree": self.routes_agree,
        }


def _check_equal_partition(partition, n: int) -> tuple[int, int]:
    k = len(partition)
    if k == 0:
        raise ValueError("empty partition")
    m = len(partition[0])
    if any(len(b) != m for b in partition):
        raise ValueError("blocks must all have size m")
    if sorted(p for b in partition for p in b) != list(range(1, n + 1)):
        raise ValueError("blocks must be disjoint and cover 1..n")
    if n != k * m:
        raise ValueError(f"need n = k*m, got n={n}")
    return k, m


def partition_moments(pop_values: Sequence, partition, limit: int = MOMENT_ENUM_LIMIT) -> PartitionMoments:
    """Mean and expected variance of the random cut-and-choose sample.

    ``partition`` holds 1-based indices into ``pop_values``.  The expected
    (1/k-normalised) sample variance is computed by the block identity
    ``Var(pop) - (1/k^2) * sum of within-block variances`` and, when ``m^k``
    is at most ``limit``, also by averaging over all m^k equally likely samples.
    """
    xs = [to_fraction(v) for v in pop_values]
    n = len(xs)
    partition = [tuple(int(p) for p in b) for b in partition]
    k, m = _check_equal_partition(partition, n)

    mean = sum(xs, Fraction(0)) / n
    within = [_variance([xs[p - 1] for p in b]) for b in partition]
    mean_variance = sum(within, Fraction(0)) / (k * k)
    expected_variance = _variance(xs) - mean_variance

    if m**k > limit:
        return PartitionMoments(mean, expected_variance, mean_variance, enumeration_skipped=True)
    tot_mean = tot_var = Fraction(0)
    for combo in itertools.product(*partition):
        ys = [xs[p - 1] for p in combo]
        tot_mean += sum(ys, Fraction(0)) / k
        tot_var += _variance(ys)
    count = m**k
    return PartitionMoments(mean, expected_variance, mean_variance, tot_mean / count, tot_var / count)


@dataclass
class PartitionSearch:
    objective: str
    maximize: bool
    optimum: Fraction
    optimal_partitions: list[tuple[tuple[int, ...], ...]]
    ordered_partition: tuple[tuple[int, ...], ...]
    ordered_value: Fraction
    evaluated: int
    values_by_partition: list[tuple[tuple[tuple[int, ...], ...], Fraction]] = field(default_factory=list)

    @property
    def ordered_is_optimal(self) -> bool:
        return self.ordered_value == self.optimum

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "maximize": self.maximize,
            "optimum": str(self.optimum),
            "optimal_partitions": [[list(b) for b in p] for p in self.optimal_partitions],
            "ordered_partition": [list(b) for b in self.ordered_partition],
            "ordered_value": str(self.ordered_value),
            "ordered_is_optimal": self.ordered_is_optimal,
            "evaluated": self.evaluated,
        }


OBJECTIVES = ("expected_variance", "mean_variance")


def best_partition_bruteforce(pop_values: Sequence, k: int, m: int, objective: str = "expected_variance",
                              maximize: bool = False, limit: int = PARTITION_LIMIT) -> PartitionSearch:
    """Optimise a moment over every split of n = k*m items into k blocks of m.

    ``objective`` is ``"expected_variance"`` (E of the sample variance) or
    ``"mean_variance"`` (variance of the sample mean).
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    xs = [to_fraction(v) for v in pop_values]
    n = len(xs)
    if n != k * m:
        raise ValueError(f"need n = k*m, got n={n}, k={k}, m={m}")
    total = count_partitions(n, [m] * k)
    if total > limit:
        raise EnumerationLimitError(f"{total} partitions exceed the limit {limit}")

    def value(part):
        mom = partition_moments(xs, part, limit=0)
        return getattr(mom, objective)

    scored = [(p, value(p)) for p in iter_partitions(n, [m] * k)]
    pick = max if maximize else min
    opt = pick(v for _, v in scored)
    order = sorted(range(1, n + 1), key=lambda i: (xs[i - 1], i))
    ordered = tuple(tuple(sorted(order[j * m:(j + 1) * m])) for j in range(k))
    return PartitionSearch(objective, maximize, opt, [p for p, v in scored if v == opt],
                           ordered, value(ordered), total, scored)


# ---------------------------------------------------------------------------
# theorem-level checks (drive the CLI ``verify`` subcommands)
# ---------------------------------------------------------------------------

def verify_theorem1(pop: Population, k: int, m: int | None = None) -> dict:
    """Quantile sample is the strict unique optimum (up to equivalence)."""
    n = pop.n
    if m is None:
        if n % k or (n // k) % 2 == 0:
            raise ValueError(f"n={n} is not (2m+1)k for k={k}")
        m = (n // k - 1) // 2
    reports = optimality_reports(pop, k, m)
    quantile = Sample(quantile_positions(n, k, m))
    out = {
        "theorem": 1, "n": n, "k": k, "m": m, "strict": pop.is_strict,
        "quantile_positions": list(quantile.positions),
        "statistics": {s: r.to_json() for s, r in reports.items()},
    }
    passed = all(r.quantile_sample_is_unique_minimizer_up_to_equivalence for r in reports.values())
    if pop.is_strict:
        ks, l1, cvm = quantile_closed_forms(n, k, m)
        closed = {"ks": ks, "l1": l1, "cvm": cvm}
        alt = alternative_closed_forms(n, k, m)
        out["closed_forms"] = {s: {"expected": v.exact(), "matches": reports[s].minimum == v}
                               for s, v in closed.items()}
        out["alternative_form_check"] = {
            "ks (1/(2k))(1-1/n)": {"value": str(alt["ks_alt"]), "consistent": alt["ks_alt"] == ks},
            "l1 (1/(4k))(1-(k/n)^2)": {"value": str(alt["l1_alt"]), "consistent": alt["l1_alt"] == l1},
            "cvm 2m(m+1)/n^2": {"value": str(alt["cvm_alt"]), "consistent": alt["cvm_alt"] == cvm},
        }
        passed = passed and all(c["matches"] for c in out["closed_forms"].values())
    out["passed"] = bool(passed)
    return out


def verify_theorem2(pop: Population, targets_list: Iterable[Sequence[int]]) -> dict:
    failures = []
    count = 0
    for targets in targets_list:
        count += 1
        _, outcome = implement_quantiles(pop, targets)
        if outcome.positions != tuple(targets):
            failures.append({"targets": list(targets), "got": list(outcome.positions)})
    return {"theorem": 2, "n": pop.n, "cases": count, "failures": failures, "passed": not failures}


def _random_preference(rng: np.random.Generator, n: int, weak: bool) -> Preference:
    if weak:
        scores = rng.integers(0, max(2, n // 2) + 1, size=n)
    else:
        scores = rng.permutation(n)
    return Preference.from_scores(scores.tolist())


def verify_theorem3(n: int, block_sizes: Sequence[int], pairs: int = 200, seed: int = 0,
                    weak: bool = False) -> dict:
    """Non-antagonistic cut-and-choose against the antagonistic benchmarks.

    For each random preference pair and each cutter: the cutter's canonical
    utility is at least its benchmark's, and the chooser's sample CDF (under
    its own preference) lies pointwise at or below its benchmark's, i.e. the
    chooser weakly gains in the dominance order.  Player I's utility claim is
    also checked literally for both cutter assignments.
    """
    pop = Population.strict(n)
    rng = np.random.Generator(np.random.PCG64(seed))
    violations = []
    checks = 0
    for t in range(pairs):
        prefs = {Player.I: _random_preference(rng, n, weak), Player.II: _random_preference(rng, n, weak)}
        for cutter in (Player.I, Player.II):
            chooser = cutter.other
            y = spe_cut_and_choose(pop, prefs[Player.I], prefs[Player.II], block_sizes, cutter).sample
            bench = {p: antagonistic_benchmark(pop, prefs[p], block_sizes, cutter, owner=p).sample
                     for p in Player}
            u_cut = canonical_utility(prefs[cutter], y)
            u_cut_bench = canonical_utility(prefs[cutter], bench[cutter])
            chooser_ok = dominates(preference_cdf(prefs[chooser], y), preference_cdf(prefs[chooser], bench[chooser]))
            u_one = canonical_utility(prefs[Player.I], y)
            u_one_bench = canonical_utility(prefs[Player.I], bench[Player.I])
            checks += 1
            if u_cut < u_cut_bench or not chooser_ok or u_one < u_one_bench:
                violations.append({
                    "pair": t, "cutter": cutter.value,
                    "pref_I": list(prefs[Player.I].levels), "pref_II": list(prefs[Player.II].levels),
                    "spe": list(y.positions),
                    "benchmarks": {p.value: list(bench[p].positions) for p in Player},
                    "cutter_utility_ok": u_cut >= u_cut_bench,
                    "chooser_dominance_ok": chooser_ok,
                    "player_I_utility_ok": u_one >= u_one_bench,
                })
    return {"theorem": 3, "n": n, "block_sizes": list(block_sizes), "pairs": pairs, "seed": seed,
            "checks": checks, "violations": violations, "passed": not violations}


def verify_theorem4(values: Sequence, k: int, m: int) -> dict:
    """Mean invariance and the moment identity gate; the ordering claim is reported."""
    xs = [to_fraction(v) for v in values]
    n = len(xs)
    pop_mean = sum(xs, Fraction(0)) / n
    moments = []
    for part in iter_partitions(n, [m] * k):
        moments.append((part, partition_moments(xs, part)))
    mean_ok = all(mo.mean == pop_mean and mo.enumerated_mean in (None, pop_mean) for _, mo in moments)
    routes_ok = all(mo.routes_agree in (True, None) for _, mo in moments)
    ev_min = best_partition_bruteforce(xs, k, m, "expected_variance")
    ev_max = best_partition_bruteforce(xs, k, m, "expected_variance", maximize=True)
    mv_min = best_partition_bruteforce(xs, k, m, "mean_variance")
    return {
        "theorem": 4, "n": n, "k": k, "m": m,
        "partitions": len(moments),
        "population_mean": str(pop_mean),
        "mean_invariant": mean_ok,
        "routes_agree": routes_ok,
        "directional_claim": {
            "claim": "ordered partition minimises expected sample variance",
            "holds": ev_min.ordered_is_optimal,
            "ordered_expected_variance": str(ev_min.ordered_value),
            "min_expected_variance": ev_min.to_json(),
            "max_expected_variance": ev_max.to_json(),
            "min_mean_variance": mv_min.to_json(),
            "note": "reported only; does not gate the result",
        },
        "passed": bool(mean_ok and routes_ok),
    }
