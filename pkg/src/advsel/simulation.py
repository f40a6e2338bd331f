"""Seeded Monte Carlo comparison of selection mechanisms.

Each (mechanism, replicate) pair draws from its own stream derived from
``(seed, mechanism id, replicate)``, so records do not depend on the worker
count or scheduling.  The default configuration is the 972-item standard
normal experiment: Quantile (k=12, m=40), Random k=12, Strike-and-Replace
(c=3), Median-Sample (7 candidates, c=3) and a Random sample of 259 items,
the size whose mean KS roughly matches the Quantile mechanism.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .core import Population, population_cdf, read_population_csv, sample_cdf
from .mechanisms import MechanismConfig, MechanismKind, play, quantile_outcome
from .rng import GENERATOR, derive_stream
from .stats import ExactStat, all_stats

__all__ = [
    "MechanismSpec",
    "CalibrationSettings",
    "ExperimentConfig",
    "RepRecord",
    "comparison_config",
    "make_population",
    "run_comparison",
    "mean_ks",
    "calibrate_equivalent_n",
    "emit_figure_data",
    "write_figure1",
    "write_figure2",
    "summarize",
    "run_manifest",
    "resolve_threads",
]


@dataclass
class MechanismSpec:
    id: str
    config: MechanismConfig

    def to_dict(self) -> dict:
        return {"id": self.id, **self.config.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> MechanismSpec:
        d = dict(d)
        return cls(d.pop("id"), MechanismConfig.from_dict(d))


@dataclass
class CalibrationSettings:
    reps: int = 1000
    tolerance: float = 0.002
    lower: int = 1
    upper: int | None = None


@dataclass
class ExperimentConfig:
    n: int
    k: int
    m: int
    mechanisms: list[MechanismSpec]
    reps: int = 1000
    seed: int = 0
    population_source: str = "standard-normal-draws"
    population_path: str | None = None
    calibration: CalibrationSettings = field(default_factory=CalibrationSettings)

    def validate(self) -> None:
        if self.reps < 1:
            raise ValueError("replicate count must be at least 1")
        if self.population_source not in ("standard-normal-draws", "file"):
            raise ValueError(f"unknown population source {self.population_source!r}")
        if self.population_source == "file" and not self.population_path:
            raise ValueError("population_source 'file' needs population_path")
        ids = [s.id for s in self.mechanisms]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate mechanism ids: {ids}")
        for spec in self.mechanisms:
            if spec.config.kind is MechanismKind.QUANTILE and self.n != (2 * self.m + 1) * self.k:
                raise ValueError(f"Quantile needs n = (2m+1)k; got n={self.n}, k={self.k}, m={self.m}")
            spec.config.validate(self.n)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["mechanisms"] = [s.to_dict() for s in self.mechanisms]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExperimentConfig:
        d = dict(d)
        d["mechanisms"] = [MechanismSpec.from_dict(s) for s in d["mechanisms"]]
        d["calibration"] = CalibrationSettings(**d.get("calibration", {}))
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def comparison_config(seed: int = 0, reps: int = 1000, equivalent_size: int = 259) -> ExperimentConfig:
    k, m, c = 12, 40, 3
    n = (2 * m + 1) * k
    specs = [
        MechanismSpec("quantile", MechanismConfig(MechanismKind.QUANTILE, k=k, m=m)),
        MechanismSpec("random", MechanismConfig(MechanismKind.RANDOM, k=k)),
        MechanismSpec("strike_and_replace", MechanismConfig(MechanismKind.STRIKE_AND_REPLACE, k=k, c=c)),
        MechanismSpec("median_sample", MechanismConfig(MechanismKind.MEDIAN_SAMPLE, k=k, c=c)),
        MechanismSpec(f"random_n{equivalent_size}", MechanismConfig(MechanismKind.RANDOM, k=equivalent_size)),
    ]
    return ExperimentConfig(n=n, k=k, m=m, mechanisms=specs, reps=reps, seed=seed)


def make_population(config: ExperimentConfig) -> Population:
    if config.population_source == "file":
        pop = read_population_csv(config.population_path)
        if pop.n != config.n:
            raise ValueError(f"population file has {pop.n} items, config says n={config.n}")
        return pop
    draws = derive_stream(config.seed, "population").standard_normal(config.n)
    return Population.from_values(draws.tolist())


@dataclass(frozen=True)
class RepRecord:
    mechanism: str
    rep: int
    positions: tuple[int, ...]
    ks: ExactStat
    l1: ExactStat
    cvm: ExactStat

    def row(self) -> dict[str, str]:
        return {
            "mechanism": self.mechanism,
            "rep": str(self.rep),
            "k": str(len(self.positions)),
            "positions": " ".join(map(str, self.positions)),
            **{f"{s}": getattr(self, s).decimal() for s in ("ks", "l1", "cvm")},
            **{f"{s}_exact": getattr(self, s).exact() for s in ("ks", "l1", "cvm")},
        }


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("ADVSEL_THREADS", "1"))
    return max(1, int(threads))


def _play_one(pop: Population, seed: int, spec: MechanismSpec, rep: int) -> RepRecord:
    stream = derive_stream(seed, spec.id, rep) if spec.config.randomized else None
    outcome = play(spec.config, pop, stream)
    st = all_stats(pop, outcome.sample)
    return RepRecord(spec.id, rep, outcome.positions, st["ks"], st["l1"], st["cvm"])


def run_comparison(config: ExperimentConfig, pop: Population | None = None,
                   threads: int | None = None) -> list[RepRecord]:
    """Play every mechanism ``config.reps`` times; records ordered by (mechanism, rep)."""
    config.validate()
    pop = make_population(config) if pop is None else pop
    tasks = [(spec, rep) for spec in config.mechanisms for rep in range(config.reps)]
    workers = resolve_threads(threads)
    if workers == 1:
        return [_play_one(pop, config.seed, s, r) for s, r in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: _play_one(pop, config.seed, *t), tasks))


# ---------------------------------------------------------------------------
# equivalent-size calibration
# ---------------------------------------------------------------------------

def _random_ks_numerators(pop: Population, size: int, reps: int, seed: int) -> np.ndarray:
    """Max |cx*s - cy*n| for ``reps`` uniform samples of ``size`` positions."""
    stream = derive_stream(seed, "calibrate", size)
    n = pop.n
    levels = pop.sorted_levels
    cx = np.cumsum(np.bincount(levels, minlength=pop.num_levels + 1))[levels]
    out = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        drawn = stream.generator.choice(n, size=size, replace=False)
        cy = np.cumsum(np.bincount(levels[drawn], minlength=pop.num_levels + 1))[levels]
        out[r] = np.abs(cx * size - cy * n).max()
    return out


def mean_ks(pop: Population, size: int, reps: int, seed: int) -> Fraction:
    """Exact mean KS of ``reps`` seeded random samples of ``size`` items."""
    nums = _random_ks_numerators(pop, size, reps, seed)
    return Fraction(int(nums.sum()), pop.n * size * reps)


def calibrate_equivalent_n(pop: Population, k_quantile: int, m: int, reps: int = 1000,
                           tolerance: float = 0.002, seed: int = 0,
                           bounds: tuple[int, int] | None = None) -> int:
    """Smallest random-sample size whose mean KS is within ``tolerance`` of m/n.

    Mean KS is treated as non-increasing in the sample size: a bisection finds
    the first size with mean KS <= target + tolerance, then a downward walk
    confirms no smaller neighbour also qualifies.  Each size is evaluated on
    its own seeded stream, so the search is deterministic.
    """
    n = pop.n
    target = Fraction(m, n)
    tol = Fraction(tolerance).limit_denominator(10**9)
    lo, hi = bounds if bounds is not None else (1, n)
    if not 1 <= lo <= hi <= n:
        raise ValueError(f"invalid search bounds {(lo, hi)} for n={n}")
    cache: dict[int, Fraction] = {}

    def value(s):
        if s not in cache:
            cache[s] = mean_ks(pop, s, reps, seed)
        return cache[s]

    def ok(s):
        return value(s) <= target + tol

    if not ok(hi):
        raise RuntimeError(f"search bounds exhausted: mean KS at size {hi} is {float(value(hi)):.6f}, "
                           f"target {float(target):.6f} +/- {tolerance}")
    a, b = lo, hi
    if ok(a):
        b = a
    while b - a > 1:
        mid = (a + b) // 2
        if ok(mid):
            b = mid
        else:
            a = mid
    while b > lo and ok(b - 1):
        b -= 1
    if abs(value(b) - target) > tol:
        raise RuntimeError(f"no size within tolerance: mean KS jumps past the band at size {b}")
    return b


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{float(x):.12g}"


def write_figure1(pop: Population, k: int, m: int, path: str | Path) -> Path:
    """CSV ``sorted_value,F_x,F_y`` for the quantile sample, one row per item."""
    path = Path(path)
    sample = quantile_outcome(pop, k, m).sample
    fx, fy = population_cdf(pop), sample_cdf(pop, sample)
    xs = pop.sorted_values if pop.sorted_values is not None else pop.sorted_levels
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sorted_value", "F_x", "F_y"])
        for i in range(pop.n):
            w.writerow([repr(float(xs[i])), _fmt(fx[i]), _fmt(fy[i])])
    return path


def summarize(records: Sequence[RepRecord]) -> list[dict[str, str]]:
    groups: dict[str, list[RepRecord]] = {}
    for r in records:
        groups.setdefault(r.mechanism, []).append(r)
    rows = []
    for mech, recs in groups.items():
        exact = [r.ks for r in recs]
        vals = np.array([float(v) for v in exact])
        q = np.quantile(vals, [0.05, 0.25, 0.5, 0.75, 0.95])
        rows.append({
            "mechanism": mech,
            "reps": str(len(recs)),
            "mean": _fmt(sum(exact, Fraction(0)) / len(exact)),
            "min": _fmt(min(exact)),
            "max": _fmt(max(exact)),
            "q05": _fmt(q[0]), "q25": _fmt(q[1]), "median": _fmt(q[2]),
            "q75": _fmt(q[3]), "q95": _fmt(q[4]),
            "mean_exact": str(sum(exact, Fraction(0)) / len(exact)),
        })
    return rows


def _summary_path(path: Path) -> Path:
    return path.with_name(path.stem + "_summary" + path.suffix)


def write_figure2(records: Sequence[RepRecord], path: str | Path) -> tuple[Path, Path]:
    """``mechanism,rep,ks`` rows plus a per-mechanism summary next to it."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mechanism", "rep", "ks", "ks_exact"])
        for r in records:
            w.writerow([r.mechanism, r.rep, r.ks.decimal(), r.ks.exact()])
    summary = _summary_path(path)
    rows = summarize(records)
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return path, summary


def write_records(records: Sequence[RepRecord], path: str | Path) -> Path:
    path = Path(path)
    rows = [r.row() for r in records]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return path


def emit_figure_data(records, which_figure: str, path: str | Path, pop: Population | None = None,
                     k: int | None = None, m: int | None = None) -> list[Path]:
    if which_figure in ("fig1", "1"):
        if pop is None or k is None or m is None:
            raise ValueError("figure 1 needs the population and (k, m)")
        return [write_figure1(pop, k, m, path)]
    if which_figure in ("fig2", "2"):
        return list(write_figure2(records, path))
    raise ValueError(f"unknown figure {which_figure!r}")


def run_manifest(config: ExperimentConfig | None = None, **extra) -> dict[str, Any]:
    """Everything needed to replay a run; contains no timestamps."""
    manifest = {
        "advsel_version": __version__,
        "numpy_version": np.__version__,
        "python": platform.python_version(),
        "generator": GENERATOR,
    }
    if config is not None:
        manifest["config"] = config.to_dict()
        manifest["config_sha256"] = config.digest()
        manifest["seed"] = config.seed
    manifest.update(extra)
    return manifest
