"""Exact KS, L1 and CvM distances between population and sample CDFs.

Everything is computed on integer numerators.  With ``cx`` the population
counts and ``cy`` the sample counts, the pointwise gap
``F_x - F_y = (cx*k - cy*n) / (n*k)``, so

* KS  = max |g| / (n k)
* L1  = sum |g| / (n^2 k)
* CvM = sum g^2 / (n^3 k^2)

where ``g = cx*k - cy*n``.  The statistics are evaluated at the n support
points only.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import Population, Sample

__all__ = [
    "ExactStat",
    "ks_stat",
    "l1_stat",
    "cvm_stat",
    "all_stats",
    "gap_numerators",
    "quantile_closed_forms",
    "alternative_closed_forms",
    "STAT_KINDS",
]

STAT_KINDS = ("ks", "l1", "cvm")
_INT64_SAFE = 2**62


class ExactStat(Fraction):
    """Non-negative rational statistic value, always in lowest terms."""

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if self < 0:
            raise ValueError("statistics are non-negative")
        return self

    def decimal(self) -> str:
        return f"{float(self):.12g}"

    def exact(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    def to_json(self) -> dict:
        return {"decimal": self.decimal(), "exact": self.exact()}

    @classmethod
    def from_json(cls, obj) -> ExactStat:
        text = obj["exact"] if isinstance(obj, dict) else obj
        return cls(Fraction(text))

    def __repr__(self):
        return f"ExactStat({self.numerator}, {self.denominator})"


def _dtype_for(n: int, k: int):
    # sum of squared gaps is at most n * (n*k)^2
    return np.int64 if n * (n * k) ** 2 < _INT64_SAFE else object


def gap_numerators(pop: Population, sample: Sample) -> np.ndarray:
    """``cx*k - cy*n`` at every support point."""
    n, k = pop.n, sample.k
    dtype = _dtype_for(n, k)
    levels = pop.sorted_levels
    cx = np.cumsum(np.bincount(levels, minlength=pop.num_levels + 1))[levels]
    cy = np.cumsum(np.bincount(sample.levels(pop), minlength=pop.num_levels + 1))[levels]
    return cx.astype(dtype) * k - cy.astype(dtype) * n


def ks_stat(pop: Population, sample: Sample) -> ExactStat:
    g = gap_numerators(pop, sample)
    return ExactStat(int(np.abs(g).max()), pop.n * sample.k)


def l1_stat(pop: Population, sample: Sample) -> ExactStat:
    g = gap_numerators(pop, sample)
    return ExactStat(int(np.abs(g).sum()), pop.n * pop.n * sample.k)


def cvm_stat(pop: Population, sample: Sample) -> ExactStat:
    g = gap_numerators(pop, sample)
    return ExactStat(int((g * g).sum()), pop.n**3 * sample.k**2)


def all_stats(pop: Population, sample: Sample) -> dict[str, ExactStat]:
    """All three statistics from one pass over the gaps."""
    g = gap_numerators(pop, sample)
    n, k = pop.n, sample.k
    a = np.abs(g)
    return {
        "ks": ExactStat(int(a.max()), n * k),
        "l1": ExactStat(int(a.sum()), n * n * k),
        "cvm": ExactStat(int((g * g).sum()), n**3 * k**2),
    }


def quantile_closed_forms(n: int, k: int, m: int) -> tuple[ExactStat, ExactStat, ExactStat]:
    """(KS, L1, CvM) of the quantile sample under a strict ranking.

    CvM is ``m(m+1)/(3n^2)``, the value obtained by summing the squared gaps;
    see :func:`alternative_closed_forms` for the commonly quoted alternatives.
    """
    if n != (2 * m + 1) * k or k < 1 or m < 0:
        raise ValueError(f"need n = (2m+1)k with k >= 1, m >= 0; got n={n}, k={k}, m={m}")
    ks = ExactStat(m, n)
    l1 = ExactStat(m * (m + 1), n * (2 * m + 1))
    cvm = ExactStat(m * (m + 1), 3 * n * n)
    return ks, l1, cvm


def alternative_closed_forms(n: int, k: int, m: int) -> dict[str, Fraction]:
    """Commonly quoted closed forms, kept for discrepancy reports.

    ``ks_alt = (1 - 1/n)/(2k)`` and ``cvm_alt = 2m(m+1)/n^2``.  Neither agrees with
    direct evaluation in general; ``(1 - k/n)/(2k)`` is the form equal to ``m/n``.
    """
    return {
        "ks_alt": Fraction(1, 2 * k) * (1 - Fraction(1, n)),
        "ks_consistent": Fraction(1, 2 * k) * (1 - Fraction(k, n)),
        "l1_alt": Fraction(1, 4 * k) * (1 - Fraction(k, n) ** 2),
        "cvm_alt": Fraction(2 * m * (m + 1), n * n),
        "cvm_alt2": Fraction(1, 2 * k * k) * (1 - Fraction(k, n) ** 2),
    }
