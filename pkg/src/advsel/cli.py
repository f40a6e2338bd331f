"""Command-line interface: ``advsel {select,compare,verify,figures}``.

Exit codes: 0 success, 1 a verification found a counterexample, 2 usage or
configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .core import Population, read_population_csv
from .mechanisms import MechanismConfig, MechanismKind, play
from .oracle import verify_theorem1, verify_theorem2, verify_theorem3, verify_theorem4
from .rng import derive_stream
from .simulation import (
    ExperimentConfig,
    calibrate_equivalent_n,
    comparison_config,
    make_population,
    run_comparison,
    run_manifest,
    summarize,
    write_figure1,
    write_figure2,
    write_records,
)
from .stats import all_stats

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    opts = {
        "population": dict(type=Path, help="population CSV with header id,value or id,level"),
        "mechanism": dict(help="mechanism kind, e.g. quantile, cut-and-choose, random, "
                               "strike-and-replace, median-sample, median-shortlist, random-cut-and-choose"),
        "n": dict(type=int, help="population size (strict ranking 1..n) when no --population is given"),
        "k": dict(type=int, help="sample size"),
        "m": dict(type=int, help="quantile spacing parameter; n = (2m+1)k"),
        "c": dict(type=int, help="number of vetoes per player"),
        "cutter": dict(choices=["I", "II"], default="I", help="player who cuts (default I)"),
        "sizes": dict(type=_sizes, help="block sizes a,b,c"),
        "seed": dict(type=int, help="master seed; required for randomized paths"),
        "reps": dict(type=int, help="replicate count"),
        "out": dict(type=Path, help="output path (stdout when omitted)"),
        "threads": dict(type=int, help="worker threads (env ADVSEL_THREADS); results do not depend on it"),
        "format": dict(choices=["csv", "json"], default="json", help="output format"),
    }
    for name in names:
        p.add_argument(f"--{name}", **opts[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advsel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"advsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="play one mechanism and report its sample and statistics")
    _common(p, "mechanism", "population", "n", "k", "m", "c", "cutter", "sizes", "seed", "out")
    p.add_argument("--strike-strategy", choices=["unconditional", "threshold"], default="unconditional",
                   help="strike-and-replace veto rule")
    p.add_argument("--transcript", type=Path, help="also write the play transcript as JSON lines")

    p = sub.add_parser("compare", help="Monte Carlo comparison of mechanisms")
    _common(p, "population", "seed", "reps", "out", "threads", "format")
    p.add_argument("--config", type=Path, help="experiment config JSON (default: the 972-item comparison)")

    p = sub.add_parser("verify", help="brute-force checks, one subcommand per theorem")
    p.add_argument("theorem", choices=["theorem1", "theorem2", "theorem3", "theorem4"])
    _common(p, "population", "n", "k", "m", "sizes", "seed", "reps", "out")
    p.add_argument("--values", help="theorem4: comma-separated item values (decimals allowed)")
    p.add_argument("--weak", action="store_true", help="theorem1/theorem3: random weak orders instead of strict")

    p = sub.add_parser("figures", help="write the data behind the CDF overlay (fig1) or KS comparison (fig2)")
    p.add_argument("figure", choices=["fig1", "fig2"])
    _common(p, "population", "seed", "reps", "out", "threads")
    p.add_argument("--calibrate", action="store_true",
                   help="fig2: recalibrate the equivalent random-sample size instead of using 259")
    p.add_argument("--tolerance", type=float, default=0.002, help="calibration tolerance (default 0.002)")
    return parser


def _population(args) -> Population:
    if getattr(args, "population", None) is not None:
        return read_population_csv(args.population)
    if getattr(args, "n", None):
        return Population.strict(args.n)
    raise UsageError("--population or --n is required")


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for randomized runs")
    return args.seed


def _emit(obj: dict, out: Path | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _write_manifest(out: Path, manifest: dict) -> None:
    out.with_name(out.name + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_select(args) -> int:
    if not args.mechanism:
        raise UsageError("--mechanism is required")
    pop = _population(args)
    kind = MechanismKind.parse(args.mechanism)
    m = args.m
    if kind is MechanismKind.QUANTILE and m is None:
        if not args.k or pop.n % args.k or (pop.n // args.k) % 2 == 0:
            raise UsageError(f"--m not given and n={pop.n} is not (2m+1)k for --k {args.k}")
        m = (pop.n // args.k - 1) // 2
    config = MechanismConfig(kind, k=args.k, m=m, block_sizes=args.sizes, c=args.c,
                             cutter=args.cutter, strike_strategy=args.strike_strategy, seed=args.seed)
    stream = derive_stream(_need_seed(args), kind.value) if config.randomized else None
    outcome = play(config, pop, stream)
    stats = all_stats(pop, outcome.sample)
    result = {
        "mechanism": config.to_dict(),
        "n": pop.n,
        "positions": list(outcome.positions),
        "items": [pop.labels[pop.item_at(p) - 1] for p in outcome.positions],
        "statistics": {s: v.to_json() for s, v in stats.items()},
        "transcript": [{"actor": a, "message": msg} for a, msg in outcome.transcript],
        "manifest": run_manifest(None, command="select", mechanism=config.to_dict(),
                                 population=str(args.population) if args.population else f"strict:{pop.n}"),
    }
    _emit(result, args.out)
    if args.transcript:
        args.transcript.write_text(outcome.transcript_jsonl(), encoding="utf-8")
    return EXIT_OK


def cmd_compare(args) -> int:
    seed = _need_seed(args)
    if args.config:
        config = ExperimentConfig.load(args.config)
        config.seed = seed
    else:
        config = comparison_config(seed=seed)
    if args.reps is not None:
        config.reps = args.reps
    if args.population is not None:
        config.population_source, config.population_path = "file", str(args.population)
    records = run_comparison(config, threads=args.threads)
    manifest = run_manifest(config, command="compare")
    if args.format == "csv":
        if args.out is None:
            raise UsageError("--format csv needs --out")
        write_records(records, args.out)
        _write_manifest(args.out, manifest)
    else:
        _emit({"summary": summarize(records), "records": [r.row() for r in records], "manifest": manifest},
              args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    th = args.theorem
    if th == "theorem1":
        if args.weak:
            seed = _need_seed(args)
            if not (args.n and args.k):
                raise UsageError("theorem1 --weak needs --n and --k")
            rng = np.random.Generator(np.random.PCG64(seed))
            trials = args.reps or 20
            reports = []
            for _ in range(trials):
                levels = rng.integers(1, args.n + 1, size=args.n)
                distinct = sorted(set(levels.tolist()))
                pop = Population.from_levels([distinct.index(v) + 1 for v in levels])
                reports.append(verify_theorem1(pop, args.k, args.m))
            report = {"theorem": 1, "weak_trials": trials, "seed": seed,
                      "passed": all(r["passed"] for r in reports), "trials": reports}
        else:
            if not args.k:
                raise UsageError("theorem1 needs --k")
            report = verify_theorem1(_population(args), args.k, args.m)
    elif th == "theorem2":
        pop = _population(args)
        seed = _need_seed(args)
        rng = np.random.Generator(np.random.PCG64(seed))
        targets = []
        for _ in range(args.reps or 100):
            k = int(rng.integers(1, pop.n + 1))
            targets.append(tuple(sorted(rng.choice(np.arange(1, pop.n + 1), size=k, replace=False).tolist())))
        report = verify_theorem2(pop, targets)
        report["seed"] = seed
    elif th == "theorem3":
        report = verify_theorem3(args.n or 6, args.sizes or (2, 3), args.reps or 200,
                                 _need_seed(args), weak=args.weak)
    else:
        if args.values:
            values = [v.strip() for v in args.values.split(",")]
        else:
            if not args.n:
                raise UsageError("theorem4 needs --values or --n")
            rng = np.random.Generator(np.random.PCG64(_need_seed(args)))
            values = [f"{int(a)}/{int(b)}" for a, b in zip(rng.integers(-50, 51, args.n), rng.integers(1, 13, args.n))]
        if not args.k:
            raise UsageError("theorem4 needs --k")
        if len(values) % args.k:
            raise UsageError(f"--k {args.k} does not divide n={len(values)}")
        report = verify_theorem4(values, args.k, len(values) // args.k)
    _emit(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_figures(args) -> int:
    seed = _need_seed(args)
    if args.out is None:
        raise UsageError("--out is required")
    config = comparison_config(seed=seed, reps=args.reps or 1000)
    if args.population is not None:
        config.population_source, config.population_path = "file", str(args.population)
    pop = make_population(config)
    extra = {"command": f"figures {args.figure}"}
    if args.figure == "fig1":
        write_figure1(pop, config.k, config.m, args.out)
    else:
        if args.calibrate:
            size = calibrate_equivalent_n(pop, config.k, config.m, config.calibration.reps,
                                            args.tolerance, seed)
            config = comparison_config(seed=seed, reps=config.reps, equivalent_size=size)
            if args.population is not None:
                config.population_source, config.population_path = "file", str(args.population)
            extra.update(equivalent_size=size, tolerance=args.tolerance)
        records = run_comparison(config, pop=pop, threads=args.threads)
        write_figure2(records, args.out)
    _write_manifest(args.out, run_manifest(config, **extra))
    return EXIT_OK


COMMANDS = {"select": cmd_select, "compare": cmd_compare, "verify": cmd_verify, "figures": cmd_figures}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, KeyError) as exc:
        print(f"advsel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"advsel: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
