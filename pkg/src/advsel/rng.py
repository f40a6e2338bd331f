"""Random streams.

All randomness goes through a :class:`Stream`, a thin wrapper over numpy's
PCG64 ``Generator``.  Streams are derived from ``(master seed, label,
replicate)`` through ``numpy.random.SeedSequence`` so that a replicate's draws
do not depend on which worker ran it or in what order.
"""

from __future__ import annotations

import hashlib
from collections import deque
from typing import Sequence

import numpy as np

__all__ = ["Stream", "ScriptedStream", "derive_stream", "label_key"]

GENERATOR = "numpy.random.PCG64 via SeedSequence([seed, sha256(label)[:8], replicate])"


def label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")


class Stream:
    def __init__(self, generator: np.random.Generator):
        self.generator = generator

    def sample(self, pool: Sequence[int], size: int) -> list[int]:
        """``size`` distinct members of ``pool``, uniformly, in draw order."""
        if size > len(pool):
            raise ValueError(f"cannot draw {size} from a pool of {len(pool)}")
        idx = self.generator.choice(len(pool), size=size, replace=False)
        return [int(pool[i]) for i in idx]

    def standard_normal(self, size: int) -> np.ndarray:
        return self.generator.standard_normal(size)


def derive_stream(seed: int, label: str, replicate: int = 0) -> Stream:
    ss = np.random.SeedSequence([int(seed), label_key(label), int(replicate)])
    return Stream(np.random.Generator(np.random.PCG64(ss)))


class ScriptedStream:
    """Replays predetermined draws; used for hand traces and transcript replay."""

    def __init__(self, draws: Sequence[Sequence[int]]):
        self._draws = deque(list(d) for d in draws)

    @classmethod
    def from_transcript(cls, transcript) -> ScriptedStream:
        return cls([msg["draw"] for actor, msg in transcript if actor == "nature"])

    def sample(self, pool: Sequence[int], size: int) -> list[int]:
        if not self._draws:
            raise RuntimeError("scripted stream exhausted")
        draw = self._draws.popleft()
        if len(draw) != size:
            raise ValueError(f"scripted draw {draw} has size {len(draw)}, expected {size}")
        allowed = set(pool)
        bad = [d for d in draw if d not in allowed]
        if bad or len(set(draw)) != len(draw):
            raise ValueError(f"scripted draw {draw} not a valid draw from the pool")
        return list(draw)

    @property
    def remaining(self) -> int:
        return len(self._draws)
