"""Populations, rankings, samples and exact empirical CDFs.

Every other module speaks in terms of *positions*: 1-based indices into the
population sorted ascending by rank (ties broken by input order).  Position 1
is the lowest-ranked item, position ``n`` the highest.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Population",
    "Sample",
    "Cdf",
    "Preference",
    "build_population",
    "population_cdf",
    "sample_cdf",
    "dominates",
    "samples_equivalent",
    "read_population_csv",
    "write_population_csv",
]


def _check_levels(levels: Sequence[int], what: str = "levels") -> tuple[int, ...]:
    if len(levels) == 0:
        raise ValueError(f"{what} must be non-empty")
    levels = tuple(int(v) for v in levels)
    used = set(levels)
    top = max(levels)
    if min(levels) != 1 or used != set(range(1, top + 1)):
        raise ValueError(f"{what} must form a contiguous range 1..L with every level used")
    return levels


def _dense_rank(values: Sequence[float]) -> tuple[int, ...]:
    distinct = sorted(set(values))
    rank = {v: i + 1 for i, v in enumerate(distinct)}
    return tuple(rank[v] for v in values)


@dataclass(frozen=True)
class Population:
    """n items under a weak-order ranking.

    ``rank_level[i]`` is the level of item ``i`` (input order, 0-based in the
    tuple); ``sorted_order`` lists 1-based item numbers ascending by level.
    """

    rank_level: tuple[int, ...]
    labels: tuple[str, ...] = ()
    values: tuple[float, ...] | None = None
    sorted_order: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        levels = _check_levels(self.rank_level, "rank_level")
        object.__setattr__(self, "rank_level", levels)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i + 1) for i in range(len(levels))))
        elif len(self.labels) != len(levels):
            raise ValueError("labels and rank_level differ in length")
        if self.values is not None and len(self.values) != len(levels):
            raise ValueError("values and rank_level differ in length")
        # stable sort keeps input order among equal levels
        order = sorted(range(len(levels)), key=lambda i: levels[i])
        object.__setattr__(self, "sorted_order", tuple(i + 1 for i in order))

    @classmethod
    def from_values(cls, values: Sequence[float], labels: Sequence[str] = ()) -> Population:
        values = tuple(float(v) for v in values)
        if not values:
            raise ValueError("population must be non-empty")
        if any(math.isnan(v) for v in values):
            raise ValueError("NaN values cannot be ranked")
        return cls(_dense_rank(values), tuple(labels), values)

    @classmethod
    def from_levels(cls, levels: Sequence[int], labels: Sequence[str] = ()) -> Population:
        return cls(tuple(levels), tuple(labels))

    @classmethod
    def strict(cls, n: int) -> Population:
        """Population 1..n with a strict ranking."""
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.rank_level)

    @property
    def num_levels(self) -> int:
        return max(self.rank_level)

    @property
    def is_strict(self) -> bool:
        return self.num_levels == self.n

    @cached_property
    def sorted_levels(self) -> np.ndarray:
        """Level of the item at each position (0-based array index = position - 1)."""
        lv = np.asarray(self.rank_level, dtype=np.int64)
        return lv[np.asarray(self.sorted_order) - 1]

    @cached_property
    def sorted_values(self) -> np.ndarray | None:
        if self.values is None:
            return None
        return np.asarray(self.values, dtype=float)[np.asarray(self.sorted_order) - 1]

    def level_at(self, position: int) -> int:
        return int(self.sorted_levels[position - 1])

    def item_at(self, position: int) -> int:
        """1-based input item number at a sorted position."""
        return self.sorted_order[position - 1]

    def relabel(self, transform) -> Population:
        """Apply a value transform; ranking recomputed from the new values."""
        if self.values is None:
            raise ValueError("population has no values")
        return Population.from_values([transform(v) for v in self.values], self.labels)


def build_population(values_or_levels: Sequence, mode: str = "values",
                     labels: Sequence[str] = ()) -> Population:
    if mode == "values":
        return Population.from_values(values_or_levels, labels)
    if mode == "levels":
        return Population.from_levels(values_or_levels, labels)
    raise ValueError(f"unknown mode {mode!r}; expected 'values' or 'levels'")


@dataclass(frozen=True)
class Sample:
    """Ascending, distinct 1-based positions."""

    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if not pos:
            raise ValueError("sample must contain at least one position")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"sample positions must be strictly increasing: {pos}")
        if pos[0] < 1:
            raise ValueError("positions are 1-based")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def of(cls, positions: Iterable[int]) -> Sample:
        pos = sorted(int(p) for p in positions)
        if len(set(pos)) != len(pos):
            raise ValueError(f"duplicate positions in {pos}")
        return cls(tuple(pos))

    @property
    def k(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def __len__(self):
        return len(self.positions)

    def check(self, pop: Population) -> None:
        if self.positions[-1] > pop.n:
            raise IndexError(f"position {self.positions[-1]} out of range for n={pop.n}")

    def levels(self, pop: Population) -> np.ndarray:
        self.check(pop)
        return pop.sorted_levels[np.asarray(self.positions) - 1]


@dataclass(frozen=True)
class Cdf:
    """Step function on the n support points, as integer counts over a denominator."""

    counts: tuple[int, ...]
    denominator: int

    def __getitem__(self, i: int) -> Fraction:
        return Fraction(self.counts[i], self.denominator)

    def __len__(self):
        return len(self.counts)

    def fractions(self) -> list[Fraction]:
        return [Fraction(c, self.denominator) for c in self.counts]


def _counts_at_levels(levels_of_members: np.ndarray, pop: Population) -> np.ndarray:
    per_level = np.bincount(levels_of_members, minlength=pop.num_levels + 1)
    return np.cumsum(per_level)[pop.sorted_levels]


def population_cdf(pop: Population) -> Cdf:
    counts = _counts_at_levels(pop.sorted_levels, pop)
    return Cdf(tuple(int(c) for c in counts), pop.n)


def sample_cdf(pop: Population, sample: Sample) -> Cdf:
    counts = _counts_at_levels(sample.levels(pop), pop)
    return Cdf(tuple(int(c) for c in counts), sample.k)


def dominates(cdf_a: Cdf, cdf_b: Cdf) -> bool:
    """True iff ``cdf_a`` lies pointwise at or below ``cdf_b`` (a is shifted right)."""
    if len(cdf_a) != len(cdf_b):
        raise ValueError("CDFs have different support lengths")
    da, db = cdf_a.denominator, cdf_b.denominator
    return all(a * db <= b * da for a, b in zip(cdf_a.counts, cdf_b.counts))


def samples_equivalent(pop: Population, y: Sample, y_prime: Sample) -> bool:
    if y.k != y_prime.k:
        raise ValueError(f"sample sizes differ: {y.k} vs {y_prime.k}")
    return bool(np.array_equal(y.levels(pop), y_prime.levels(pop)))


@dataclass(frozen=True)
class Preference:
    """A player's weak order over positions; higher level is more preferred."""

    levels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", _check_levels(self.levels, "pref_level"))

    @classmethod
    def from_population(cls, pop: Population) -> Preference:
        """Preference that agrees with the population ranking (Player I's view)."""
        return cls(tuple(int(v) for v in pop.sorted_levels))

    @classmethod
    def from_scores(cls, scores: Sequence[float]) -> Preference:
        return cls(_dense_rank(list(scores)))

    @property
    def n(self) -> int:
        return len(self.levels)

    def reversed(self) -> Preference:
        top = max(self.levels)
        return Preference(tuple(top + 1 - v for v in self.levels))

    def __getitem__(self, position: int) -> int:
        return self.levels[position - 1]


def read_population_csv(path: str | Path) -> Population:
    """Read ``id,value`` or ``id,level`` CSV; row order fixes tie-breaking."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        rows = list(reader)
    if header not in (["id", "value"], ["id", "level"]):
        raise ValueError(f"{path}: header must be 'id,value' or 'id,level', got {','.join(header)}")
    if not rows:
        raise ValueError(f"{path}: no rows")
    labels = [r["id"] for r in rows]
    if header == ["id", "value"]:
        return Population.from_values([float(r["value"]) for r in rows], labels)
    if header == ["id", "level"]:
        return Population.from_levels([int(r["level"]) for r in rows], labels)
    raise ValueError(f"{path}: header must be 'id,value' or 'id,level', got {','.join(header)}")


def write_population_csv(pop: Population, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if pop.values is not None:
            w.writerow(["id", "value"])
            w.writerows(zip(pop.labels, (repr(v) for v in pop.values)))
        else:
            w.writerow(["id", "level"])
            w.writerows(zip(pop.labels, pop.rank_level))
