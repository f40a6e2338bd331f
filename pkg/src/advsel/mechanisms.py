"""Selection mechanisms played at equilibrium.

Deterministic mechanisms are cut-and-choose games: the cutter lays out blocks
of positions and the chooser takes one item per block.  Both play the
equilibrium strategies in closed form and the play is written to a transcript.
Randomized mechanisms draw through a stream (see :mod:`advsel.rng`) and record
every draw as a ``("nature", {"draw": [...]})`` entry, so a transcript can be
replayed with :class:`advsel.rng.ScriptedStream`.

Chooser tie rule: Player I (who likes high ranks) takes the highest-ranked item
in a block and, among equally ranked items, the highest position; Player II
takes the lowest-ranked item and, among ties, the lowest position.  On the
contiguous blocks used at equilibrium this makes the chosen item a block
endpoint, so outcomes coincide with the closed-form positions even under ties.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .core import Population, Sample
from .rng import Stream

__all__ = [
    "Player",
    "MechanismKind",
    "MechanismConfig",
    "Outcome",
    "cut_and_choose_blocks",
    "quantile_positions",
    "quantile_outcome",
    "cut_and_choose_outcome",
    "implement_quantiles",
    "random_sample",
    "strike_and_replace",
    "median_sample",
    "choose_median_sample",
    "median_shortlist",
    "ordered_partition",
    "random_cut_and_choose",
    "random_cut_and_choose_distribution",
    "play",
]

DISTRIBUTION_LIMIT = 4096


class Player(str, enum.Enum):
    I = "I"
    II = "II"

    @property
    def other(self) -> Player:
        return Player.II if self is Player.I else Player.I

    @classmethod
    def parse(cls, value) -> Player:
        if isinstance(value, Player):
            return value
        text = str(value).strip()
        aliases = {"I": cls.I, "1": cls.I, "PlayerI": cls.I, "II": cls.II, "2": cls.II, "PlayerII": cls.II}
        if text not in aliases:
            raise ValueError(f"unknown player {value!r}")
        return aliases[text]


class MechanismKind(str, enum.Enum):
    QUANTILE = "Quantile"
    CUT_AND_CHOOSE = "CutAndChoose"
    OVERLAPPING_CUT_AND_CHOOSE = "OverlappingCutAndChoose"
    RANDOM = "Random"
    STRIKE_AND_REPLACE = "StrikeAndReplace"
    MEDIAN_SAMPLE = "MedianSample"
    MEDIAN_SHORTLIST = "MedianShortlist"
    RANDOM_CUT_AND_CHOOSE = "RandomCutAndChoose"

    @classmethod
    def parse(cls, value) -> MechanismKind:
        if isinstance(value, MechanismKind):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown mechanism kind {value!r}")


RANDOMIZED = {
    MechanismKind.RANDOM,
    MechanismKind.STRIKE_AND_REPLACE,
    MechanismKind.MEDIAN_SAMPLE,
    MechanismKind.RANDOM_CUT_AND_CHOOSE,
}


@dataclass
class MechanismConfig:
    kind: MechanismKind
    k: int | None = None
    m: int | None = None
    block_sizes: tuple[int, ...] | None = None
    c: int | None = None
    cutter: Player = Player.I
    strike_strategy: str = "unconditional"
    partition: tuple[tuple[int, ...], ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        self.kind = MechanismKind.parse(self.kind)
        self.cutter = Player.parse(self.cutter)
        if self.block_sizes is not None:
            self.block_sizes = tuple(int(s) for s in self.block_sizes)
        if self.partition is not None:
            self.partition = tuple(tuple(int(p) for p in b) for b in self.partition)
        if self.strike_strategy not in ("unconditional", "threshold"):
            raise ValueError(f"unknown strike strategy {self.strike_strategy!r}")

    @property
    def randomized(self) -> bool:
        return self.kind in RANDOMIZED

    def validate(self, n: int) -> None:
        kind = self.kind
        if kind is MechanismKind.QUANTILE:
            _require(self.k is not None and self.m is not None, "Quantile needs k and m")
            _require(n == (2 * self.m + 1) * self.k, f"Quantile needs n = (2m+1)k, got n={n}, k={self.k}, m={self.m}")
        elif kind is MechanismKind.CUT_AND_CHOOSE:
            _require(bool(self.block_sizes), "CutAndChoose needs block_sizes")
            _require(min(self.block_sizes) >= 1 and sum(self.block_sizes) <= n,
                     f"block sizes {self.block_sizes} invalid for n={n}")
        elif kind is MechanismKind.OVERLAPPING_CUT_AND_CHOOSE:
            _require(bool(self.block_sizes), "OverlappingCutAndChoose needs block_sizes")
            s = self.block_sizes
            _require(all(b > a for a, b in zip(s, s[1:])) and s[0] >= 1 and s[-1] <= n,
                     f"nested sizes {s} must be strictly increasing within 1..{n}")
        elif kind is MechanismKind.RANDOM:
            _require(self.k is not None and 1 <= self.k <= n, f"Random needs 1 <= k <= n, got k={self.k}")
        elif kind is MechanismKind.STRIKE_AND_REPLACE:
            _require(self.k is not None and self.c is not None, "StrikeAndReplace needs k and c")
            _require(self.k + 2 * self.c <= n, f"StrikeAndReplace needs k + 2c <= n, got k={self.k}, c={self.c}, n={n}")
        elif kind is MechanismKind.MEDIAN_SAMPLE:
            _require(self.k is not None and self.c is not None, "MedianSample needs k and c")
            _require(1 <= self.k <= n and self.c >= 0, "MedianSample needs 1 <= k <= n, c >= 0")
        elif kind is MechanismKind.MEDIAN_SHORTLIST:
            _require(self.k in (None, 1), "MedianShortlist selects a single item")
        elif kind is MechanismKind.RANDOM_CUT_AND_CHOOSE:
            _require(self.k is not None, "RandomCutAndChoose needs k")
            _require(n % self.k == 0, f"RandomCutAndChoose needs n = k*m, got n={n}, k={self.k}")
            if self.partition is not None:
                _check_partition(self.partition, n, self.k)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["cutter"] = self.cutter.value
        return {key: (list(map(list, v)) if key == "partition" and v is not None else
                      list(v) if isinstance(v, tuple) else v)
                for key, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> MechanismConfig:
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> MechanismConfig:
        return cls.from_dict(json.loads(text))


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


@dataclass
class Outcome:
    sample: Sample
    transcript: list[tuple[str, dict]] = field(default_factory=list)
    distribution: list[tuple[Sample, Fraction]] | None = None

    @property
    def positions(self) -> tuple[int, ...]:
        return self.sample.positions

    def transcript_jsonl(self) -> str:
        return "".join(json.dumps({"actor": a, "message": msg}, sort_keys=True) + "\n"
                       for a, msg in self.transcript)


# ---------------------------------------------------------------------------
# deterministic cut-and-choose family
# ---------------------------------------------------------------------------

def _chooser_pick(pop: Population, block: Sequence[int], chooser: Player) -> int:
    lv = pop.sorted_levels
    if chooser is Player.I:
        return max(block, key=lambda p: (lv[p - 1], p))
    return min(block, key=lambda p: (lv[p - 1], p))


def cut_and_choose_blocks(n: int, block_sizes: Sequence[int], cutter: Player) -> list[tuple[int, ...]]:
    """The cutter's equilibrium partition into contiguous position ranges.

    Smallest block at the cutter's favoured end, the next one adjacent, and so
    on; ``n - sum(sizes)`` positions at the far end stay unassigned.
    """
    cutter = Player.parse(cutter)
    sizes = sorted(int(s) for s in block_sizes)
    if not sizes or sizes[0] < 1 or sum(sizes) > n:
        raise ValueError(f"invalid block sizes {tuple(block_sizes)} for n={n}")
    blocks = []
    edge = 0
    for s in sizes:
        if cutter is Player.II:
            blocks.append(tuple(range(edge + 1, edge + s + 1)))
        else:
            blocks.append(tuple(range(n - edge - s + 1, n - edge + 1)))
        edge += s
    return blocks


def cut_and_choose_outcome(pop: Population, block_sizes: Sequence[int], cutter=Player.I) -> Outcome:
    cutter = Player.parse(cutter)
    blocks = cut_and_choose_blocks(pop.n, block_sizes, cutter)
    picks = [_chooser_pick(pop, b, cutter.other) for b in blocks]
    transcript = [
        (cutter.value, {"blocks": [list(b) for b in blocks]}),
        (cutter.other.value, {"choices": picks}),
    ]
    return Outcome(Sample.of(picks), transcript)


def quantile_positions(n: int, k: int, m: int) -> tuple[int, ...]:
    if n != (2 * m + 1) * k or k < 1 or m < 0:
        raise ValueError(f"Quantile mechanism needs n = (2m+1)k; got n={n}, k={k}, m={m}")
    return tuple(m + 1 + (2 * m + 1) * j for j in range(k))


def quantile_outcome(pop: Population, k: int, m: int, cutter=Player.I) -> Outcome:
    """Cut-and-choose with one block of m+1 and k-1 blocks of 2m+1 items."""
    quantile_positions(pop.n, k, m)
    sizes = [m + 1] + [2 * m + 1] * (k - 1)
    return cut_and_choose_outcome(pop, sizes, cutter)


def median_shortlist(pop: Population) -> Outcome:
    """Player I shortlists ceil(n/2) items, Player II picks one."""
    return cut_and_choose_outcome(pop, [math.ceil(pop.n / 2)], Player.I)


def implement_quantiles(pop: Population, target_positions: Sequence[int]) -> tuple[MechanismConfig, Outcome]:
    """Nested-subset cut-and-choose whose equilibrium selects ``target_positions``.

    Player II proposes the s_j lowest-ranked items for each target s_j and
    Player I takes the top item of every subset.
    """
    targets = tuple(int(t) for t in target_positions)
    config = MechanismConfig(MechanismKind.OVERLAPPING_CUT_AND_CHOOSE, k=len(targets),
                             block_sizes=targets, cutter=Player.II)
    if not targets:
        raise ValueError("need at least one target position")
    config.validate(pop.n)
    subsets = [tuple(range(1, s + 1)) for s in targets]
    picks = [_chooser_pick(pop, s, Player.I) for s in subsets]
    transcript = [
        ("II", {"subsets": [[1, s] for s in targets], "encoding": "position ranges [lo, hi]"}),
        ("I", {"choices": picks}),
    ]
    return config, Outcome(Sample.of(picks), transcript)


# ---------------------------------------------------------------------------
# randomized mechanisms
# ---------------------------------------------------------------------------

def _draw(stream, pool: Sequence[int], size: int, transcript: list) -> list[int]:
    drawn = stream.sample(pool, size)
    transcript.append(("nature", {"draw": list(drawn)}))
    return drawn


def _as_stream(rng):
    if isinstance(rng, Stream) or hasattr(rng, "sample"):
        return rng
    import numpy as np
    if isinstance(rng, np.random.Generator):
        return Stream(rng)
    raise TypeError("rng must be a Stream, ScriptedStream or numpy Generator")


def random_sample(pop: Population, k: int, rng) -> Outcome:
    if not 1 <= k <= pop.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={pop.n}")
    stream = _as_stream(rng)
    transcript: list = []
    drawn = _draw(stream, range(1, pop.n + 1), k, transcript)
    return Outcome(Sample.of(drawn), transcript)


def strike_and_replace(pop: Population, k: int, c: int, strategy: str = "unconditional", rng=None) -> Outcome:
    """Random sample, then Player I and Player II each strike up to c items.

    Player I strikes its c lowest-ranked items, the gaps are refilled from
    items never seen so far, then Player II strikes its c highest-ranked items
    and those gaps are refilled the same way.  Under ``strategy="threshold"`` a
    player only strikes items on its unfavourable side of the population median.
    """
    if k + 2 * c > pop.n or k < 1 or c < 0:
        raise ValueError(f"need k + 2c <= n, got k={k}, c={c}, n={pop.n}")
    if strategy not in ("unconditional", "threshold"):
        raise ValueError(f"unknown strategy {strategy!r}")
    stream = _as_stream(rng)
    lv = pop.sorted_levels
    median_level = lv[math.ceil(pop.n / 2) - 1]
    transcript: list = []
    current = _draw(stream, range(1, pop.n + 1), k, transcript)
    seen = set(current)
    if c == 0:
        return Outcome(Sample.of(current), transcript)

    for player in (Player.I, Player.II):
        if player is Player.I:
            ranked = sorted(current, key=lambda p: (lv[p - 1], p))
            worse = lambda p: lv[p - 1] < median_level  # noqa: E731
        else:
            ranked = sorted(current, key=lambda p: (-lv[p - 1], -p))
            worse = lambda p: lv[p - 1] > median_level  # noqa: E731
        struck = ranked[:c]
        if strategy == "threshold":
            struck = [p for p in struck if worse(p)]
        transcript.append((player.value, {"strike": struck}))
        if not struck:
            continue
        current = [p for p in current if p not in struck]
        pool = [p for p in range(1, pop.n + 1) if p not in seen]
        refill = _draw(stream, pool, len(struck), transcript)
        seen.update(refill)
        current.extend(refill)
    return Outcome(Sample.of(current), transcript)


def _median_key(positions: Sequence[int]) -> tuple[Fraction, Fraction]:
    p = sorted(positions)
    k = len(p)
    median = Fraction(p[(k - 1) // 2] + p[k // 2], 2)
    return median, Fraction(sum(p), k)


def choose_median_sample(candidates: Sequence[Sequence[int]], c: int) -> tuple[int, list[int], list[int]]:
    """Index of the surviving candidate plus the vetoes of I and II.

    Candidates are ordered by sample median position, then mean position, then
    draw order.  Player I vetoes the c lowest, Player II the c highest.
    """
    if len(candidates) != 2 * c + 1:
        raise ValueError(f"need 2c+1 = {2 * c + 1} candidates, got {len(candidates)}")
    order = sorted(range(len(candidates)), key=lambda i: (*_median_key(candidates[i]), i))
    return order[c], order[:c], order[len(order) - c:]


def median_sample(pop: Population, k: int, c: int, rng) -> Outcome:
    if not 1 <= k <= pop.n or c < 0:
        raise ValueError(f"need 1 <= k <= n and c >= 0, got k={k}, c={c}")
    stream = _as_stream(rng)
    transcript: list = []
    everyone = range(1, pop.n + 1)
    candidates = [sorted(_draw(stream, everyone, k, transcript)) for _ in range(2 * c + 1)]
    survivor, veto_i, veto_ii = choose_median_sample(candidates, c)
    transcript.append(("I", {"veto": veto_i}))
    transcript.append(("II", {"veto": veto_ii}))
    return Outcome(Sample.of(candidates[survivor]), transcript)


def ordered_partition(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    if k < 1 or n % k:
        raise ValueError(f"need n = k*m, got n={n}, k={k}")
    m = n // k
    return tuple(tuple(range(j * m + 1, (j + 1) * m + 1)) for j in range(k))


def _check_partition(partition, n: int, k: int) -> None:
    if len(partition) != k:
        raise ValueError(f"partition has {len(partition)} blocks, expected {k}")
    m = n // k
    if any(len(b) != m for b in partition):
        raise ValueError(f"every block must have size m={m}")
    flat = sorted(p for b in partition for p in b)
    if flat != list(range(1, n + 1)):
        raise ValueError("blocks must be disjoint and cover positions 1..n")


def random_cut_and_choose(pop: Population, k: int, partition, rng,
                          with_distribution: bool = True) -> Outcome:
    """One uniform, independent draw from each block of the cutter's partition.

    The exact outcome distribution is attached when it has at most
    ``DISTRIBUTION_LIMIT`` support points and ``with_distribution`` is set.
    """
    partition = tuple(tuple(int(p) for p in b) for b in partition)
    if k < 1 or pop.n % k:
        raise ValueError(f"need n = k*m, got n={pop.n}, k={k}")
    _check_partition(partition, pop.n, k)
    stream = _as_stream(rng)
    transcript: list = [("I", {"blocks": [list(b) for b in partition]})]
    picks = [_draw(stream, block, 1, transcript)[0] for block in partition]
    m = pop.n // k
    dist = random_cut_and_choose_distribution(partition) if with_distribution and m**k <= DISTRIBUTION_LIMIT else None
    return Outcome(Sample.of(picks), transcript, dist)


def random_cut_and_choose_distribution(partition) -> list[tuple[Sample, Fraction]]:
    sizes = [len(b) for b in partition]
    p = Fraction(1, math.prod(sizes))
    return [(Sample.of(combo), p) for combo in itertools.product(*partition)]


def play(config: MechanismConfig, pop: Population, rng=None) -> Outcome:
    """Run a configured mechanism on ``pop``."""
    config.validate(pop.n)
    kind = config.kind
    if config.randomized and rng is None:
        raise ValueError(f"{kind.value} is randomized and needs a random stream")
    if kind is MechanismKind.QUANTILE:
        return quantile_outcome(pop, config.k, config.m, config.cutter)
    if kind is MechanismKind.CUT_AND_CHOOSE:
        return cut_and_choose_outcome(pop, config.block_sizes, config.cutter)
    if kind is MechanismKind.OVERLAPPING_CUT_AND_CHOOSE:
        return implement_quantiles(pop, config.block_sizes)[1]
    if kind is MechanismKind.MEDIAN_SHORTLIST:
        return median_shortlist(pop)
    if kind is MechanismKind.RANDOM:
        return random_sample(pop, config.k, rng)
    if kind is MechanismKind.STRIKE_AND_REPLACE:
        return strike_and_replace(pop, config.k, config.c, config.strike_strategy, rng)
    if kind is MechanismKind.MEDIAN_SAMPLE:
        return median_sample(pop, config.k, config.c, rng)
    partition = config.partition or ordered_partition(pop.n, config.k)
    return random_cut_and_choose(pop, config.k, partition, rng)
