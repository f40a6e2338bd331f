"""Mechanism games as strategic objects, checked by enumeration.

Preferences are oriented so that a higher preference level is better for its
owner, and a chooser always takes its most-preferred item in a block.  In the
antagonistic case Player I holds the population ranking and Player II its
reverse.

Utilities are the canonical ``sum of preference levels of the sampled items``,
which is monotone in first-order stochastic dominance; dominance-level checks
(:func:`prefers`) do not depend on that choice.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Sequence

from .core import Cdf, Population, Preference, Sample, dominates
from .mechanisms import Outcome, Player, cut_and_choose_outcome

__all__ = [
    "EnumerationLimitError",
    "Deviation",
    "MechanismGame",
    "ChoiceRule",
    "most_preferred_rule",
    "canonical_utility",
    "expected_utility",
    "preference_cdf",
    "prefers",
    "iter_partitions",
    "count_partitions",
    "shortlist_game",
    "cut_and_choose_game",
    "verify_equilibrium",
    "equilibrium_report",
    "spe_cut_and_choose",
    "antagonistic_benchmark",
]

ENUMERATION_LIMIT = 10**7


class EnumerationLimitError(RuntimeError):
    """Raised instead of silently truncating an enumeration."""


def canonical_utility(pref: Preference, sample: Sample | Sequence[int]) -> int:
    return sum(pref[p] for p in sample)


def expected_utility(pref: Preference, distribution: Iterable[tuple[Sample, Fraction]]) -> Fraction:
    return sum((Fraction(canonical_utility(pref, s)) * w for s, w in distribution), Fraction(0))


def preference_cdf(pref: Preference, sample: Sample | Sequence[int]) -> Cdf:
    """Sample CDF at every position, items ordered ascending by ``pref``."""
    per_level = Counter(pref[p] for p in sample)
    running, cum = 0, {}
    for level in range(1, max(pref.levels) + 1):
        running += per_level.get(level, 0)
        cum[level] = running
    order = sorted(range(1, pref.n + 1), key=lambda p: (pref[p], p))
    return Cdf(tuple(cum[pref[p]] for p in order), len(tuple(sample)))


def prefers(pref: Preference, y: Sample, y_prime: Sample) -> bool:
    """True iff ``y`` is shifted right of ``y_prime`` under ``pref``."""
    return dominates(preference_cdf(pref, y), preference_cdf(pref, y_prime))


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def count_partitions(n: int, sizes: Sequence[int]) -> int:
    """Number of distinct partial partitions of n items into blocks of ``sizes``."""
    sizes = list(sizes)
    total = math.factorial(n) // math.factorial(n - sum(sizes))
    for s in sizes:
        total //= math.factorial(s)
    for mult in Counter(sizes).values():
        total //= math.factorial(mult)
    return total


def iter_partitions(n: int, sizes: Sequence[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Partial partitions of positions 1..n into blocks with the given sizes.

    Blocks come out in nondecreasing size order; blocks of equal size are
    listed by increasing minimum, so each partition appears once.  The
    enumeration is in lexicographic order of that canonical form.
    """
    sizes = sorted(int(s) for s in sizes)
    if sum(sizes) > n or (sizes and sizes[0] < 1):
        raise ValueError(f"invalid block sizes {sizes} for n={n}")

    def rec(j: int, free: tuple[int, ...], prev: tuple[int, ...] | None):
        if j == len(sizes):
            yield ()
            return
        for block in itertools.combinations(free, sizes[j]):
            if prev is not None and sizes[j] == len(prev) and block[0] < prev[0]:
                continue
            rest = tuple(p for p in free if p not in block)
            for tail in rec(j + 1, rest, block):
                yield (block,) + tail

    yield from rec(0, tuple(range(1, n + 1)), None)


# ---------------------------------------------------------------------------
# chooser strategies
# ---------------------------------------------------------------------------

class ChoiceRule:
    """Chooser strategy: maps a cutter message (tuple of blocks) to one pick per block."""

    def __call__(self, blocks: tuple[tuple[int, ...], ...]) -> tuple[int, ...]:
        raise NotImplementedError

    def with_override(self, blocks, picks) -> ChoiceRule:
        return _Override(self, tuple(blocks), tuple(picks))


@dataclass(frozen=True)
class _PreferenceRule(ChoiceRule):
    pref: Preference
    favourite: bool = True

    def __call__(self, blocks):
        sign = 1 if self.favourite else -1
        return tuple(max(b, key=lambda p: (sign * self.pref[p], -p)) for b in blocks)

    def __str__(self):
        return "pick most preferred" if self.favourite else "pick least preferred"


@dataclass(frozen=True)
class _Override(ChoiceRule):
    base: ChoiceRule
    blocks: tuple
    picks: tuple

    def __call__(self, blocks):
        return self.picks if tuple(blocks) == self.blocks else self.base(blocks)

    def __str__(self):
        return f"{self.base} except {list(map(list, self.blocks))} -> {list(self.picks)}"


def most_preferred_rule(pref: Preference) -> ChoiceRule:
    """Pick the most-preferred item of every block; ties to the lowest position."""
    return _PreferenceRule(pref, True)


# ---------------------------------------------------------------------------
# games
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Deviation:
    player: str
    deviation: str
    gain: Fraction

    def to_json(self) -> dict:
        return {"player": self.player, "deviation": self.deviation, "gain": str(self.gain)}


@dataclass
class MechanismGame:
    """Two-player mechanism game with canonical utilities.

    ``outcome_map(a_I, a_II)`` returns a list of ``(Sample, probability)``.
    ``deviations(player, a_I, a_II)`` yields the unilateral alternatives to
    test; by default every action in ``actions_I`` / ``actions_II``.
    ``profile_count`` is the number of profiles the check will evaluate and
    is guarded by the enumeration limit.
    """

    pop: Population
    pref_I: Preference
    pref_II: Preference
    outcome_map: Callable[[Any, Any], list[tuple[Sample, Fraction]]]
    actions_I: Sequence | None = None
    actions_II: Sequence | None = None
    name: str = "game"
    deviations: Callable[[Player, Any, Any], Iterable] | None = None
    profile_count: int | None = None
    describe: Callable[[Any], str] = field(default=str)

    def alternatives(self, player: Player, a_I, a_II) -> Iterable:
        if self.deviations is not None:
            return self.deviations(player, a_I, a_II)
        return self.actions_I if player is Player.I else self.actions_II

    def count(self) -> int:
        if self.profile_count is not None:
            return self.profile_count
        return len(self.actions_I) * len(self.actions_II)

    def utility(self, player: Player, a_I, a_II) -> Fraction:
        pref = self.pref_I if player is Player.I else self.pref_II
        dist = self.outcome_map(a_I, a_II)
        if sum(w for _, w in dist) != 1:
            raise ValueError("outcome distribution does not sum to 1")
        return expected_utility(pref, dist)


def _antagonistic(pop, pref_I, pref_II):
    pref_I = pref_I or Preference.from_population(pop)
    pref_II = pref_II or pref_I.reversed()
    return pref_I, pref_II


def shortlist_game(pop: Population, size: int | None = None,
                   pref_I: Preference | None = None, pref_II: Preference | None = None) -> MechanismGame:
    """Player I shortlists ``size`` items, Player II's choice function picks one.

    Message sets are enumerated in full: every shortlist for I and every
    function from shortlists to a member for II.
    """
    size = math.ceil(pop.n / 2) if size is None else size
    pref_I, pref_II = _antagonistic(pop, pref_I, pref_II)
    shortlists = list(itertools.combinations(range(1, pop.n + 1), size))
    n_funcs = size ** len(shortlists)
    if len(shortlists) * n_funcs > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"shortlist game has {len(shortlists)} x {n_funcs} profiles, above {ENUMERATION_LIMIT}")
    functions = [dict(zip(shortlists, picks)) for picks in itertools.product(*shortlists)]

    def outcome(a_I, a_II):
        return [(Sample.of([a_II[a_I]]), Fraction(1))]

    return MechanismGame(pop, pref_I, pref_II, outcome, shortlists, functions,
                         name=f"shortlist(n={pop.n}, size={size})",
                         describe=lambda a: json.dumps(
                             {str(list(k)): v for k, v in a.items()} if isinstance(a, dict) else list(a)))


def cut_and_choose_game(pop: Population, block_sizes: Sequence[int], cutter=Player.I,
                        pref_I: Preference | None = None, pref_II: Preference | None = None) -> MechanismGame:
    """Cut-and-choose as a game: the cutter's messages are all partial partitions.

    The chooser's strategy is a :class:`ChoiceRule`.  A unilateral chooser
    deviation only changes the payoff through the picks made on the cutter's
    actual message, so the chooser's alternatives are the rule overridden on
    that message with every possible pick vector.  This is exact for Nash
    equilibrium and avoids enumerating the full function space.
    """
    cutter = Player.parse(cutter)
    pref_I, pref_II = _antagonistic(pop, pref_I, pref_II)
    sizes = tuple(sorted(block_sizes))
    n_parts = count_partitions(pop.n, sizes)
    n_picks = math.prod(sizes)

    def outcome(a_I, a_II):
        blocks, rule = (a_I, a_II) if cutter is Player.I else (a_II, a_I)
        return [(Sample.of(rule(blocks)), Fraction(1))]

    def deviations(player, a_I, a_II):
        blocks, rule = (a_I, a_II) if cutter is Player.I else (a_II, a_I)
        if player is cutter:
            return iter_partitions(pop.n, sizes)
        return (rule.with_override(blocks, picks) for picks in itertools.product(*blocks))

    def describe(a):
        return str(a) if isinstance(a, ChoiceRule) else json.dumps([list(b) for b in a])

    return MechanismGame(pop, pref_I, pref_II, outcome, name=f"cut_and_choose(sizes={list(sizes)}, cutter={cutter.value})",
                         deviations=deviations, profile_count=n_parts + n_picks, describe=describe)


def verify_equilibrium(game: MechanismGame, a_I, a_II, limit: int = ENUMERATION_LIMIT) -> list[Deviation]:
    """Profitable unilateral deviations from ``(a_I, a_II)``; empty iff pure Nash."""
    if game.count() > limit:
        raise EnumerationLimitError(f"{game.name}: {game.count()} profiles exceed the limit {limit}")
    found = []
    for player in (Player.I, Player.II):
        base = game.utility(player, a_I, a_II)
        for alt in game.alternatives(player, a_I, a_II):
            prof = (alt, a_II) if player is Player.I else (a_I, alt)
            gain = game.utility(player, *prof) - base
            if gain > 0:
                found.append(Deviation(player.value, game.describe(alt), gain))
    return found


def equilibrium_report(game: MechanismGame, a_I, a_II) -> dict:
    devs = verify_equilibrium(game, a_I, a_II)
    return {
        "game": game.name,
        "n": game.pop.n,
        "profile": {"I": game.describe(a_I), "II": game.describe(a_II)},
        "is_equilibrium": not devs,
        "deviations": [d.to_json() for d in devs],
    }


# ---------------------------------------------------------------------------
# non-antagonistic analysis
# ---------------------------------------------------------------------------

def spe_cut_and_choose(pop: Population, pref_I: Preference, pref_II: Preference,
                       block_sizes: Sequence[int], cutter=Player.I,
                       limit: int = ENUMERATION_LIMIT) -> Outcome:
    """Subgame-perfect outcome by backward induction over all partitions.

    The chooser takes its most-preferred item per block (ties: lowest
    position); the cutter picks the partition with the highest canonical
    utility, ties going to the lexicographically first partition.
    """
    cutter = Player.parse(cutter)
    sizes = tuple(sorted(block_sizes))
    total = count_partitions(pop.n, sizes)
    if total > limit:
        raise EnumerationLimitError(f"{total} partitions exceed the limit {limit}")
    cut_pref, choose_pref = (pref_I, pref_II) if cutter is Player.I else (pref_II, pref_I)
    respond = most_preferred_rule(choose_pref)
    best = None
    for blocks in iter_partitions(pop.n, sizes):
        picks = respond(blocks)
        u = canonical_utility(cut_pref, picks)
        if best is None or u > best[0]:
            best = (u, blocks, picks)
    _, blocks, picks = best
    transcript = [
        (cutter.value, {"blocks": [list(b) for b in blocks]}),
        (cutter.other.value, {"choices": list(picks)}),
    ]
    return Outcome(Sample.of(picks), transcript)


def antagonistic_benchmark(pop: Population, pref: Preference, block_sizes: Sequence[int],
                           cutter=Player.I, owner=Player.I) -> Outcome:
    """Equilibrium outcome when ``owner`` holds ``pref`` and the opponent its reverse.

    Solved in closed form by re-ranking the population by Player I's induced
    preference and reading the cut-and-choose equilibrium back to positions.
    """
    owner = Player.parse(owner)
    ranking = pref if owner is Player.I else pref.reversed()
    reranked = Population.from_levels(ranking.levels)
    out = cut_and_choose_outcome(reranked, block_sizes, cutter)
    # item numbers of ``reranked`` are the original positions
    (cut_actor, cut_msg), (choose_actor, choose_msg) = out.transcript
    blocks = [[reranked.item_at(p) for p in b] for b in cut_msg["blocks"]]
    picks = [reranked.item_at(p) for p in choose_msg["choices"]]
    transcript = [(cut_actor, {"blocks": blocks}), (choose_actor, {"choices": picks})]
    return Outcome(Sample.of(picks), transcript)
