import csv
from fractions import Fraction

import pytest

from advsel.core import Population, Sample, write_population_csv
from advsel.mechanisms import MechanismConfig
from advsel.simulation import (
    ExperimentConfig,
    MechanismSpec,
    calibrate_equivalent_n,
    comparison_config,
    emit_figure_data,
    make_population,
    mean_ks,
    resolve_threads,
    run_comparison,
    run_manifest,
    summarize,
    write_figure1,
    write_figure2,
    write_records,
)
from advsel.stats import all_stats


@pytest.fixture(scope="module")
def fig2_run():
    config = comparison_config(seed=42, reps=1000)
    pop = make_population(config)
    return config, pop, run_comparison(config, pop)


def _by_mech(records, mech):
    return [r for r in records if r.mechanism == mech]


def test_config_round_trip(tmp_path):
    config = comparison_config(seed=3, reps=10)
    path = tmp_path / "cfg.json"
    path.write_text(config.to_json())
    back = ExperimentConfig.load(path)
    assert back == config and back.digest() == config.digest()
    assert [s.id for s in back.mechanisms] == ["quantile", "random", "strike_and_replace",
                                               "median_sample", "random_n259"]


@pytest.mark.parametrize("change", [
    dict(reps=0),
    dict(n=970),
    dict(population_source="file"),
    dict(population_source="uniform"),
])
def test_config_validation(change):
    config = comparison_config(reps=5)
    for key, value in change.items():
        setattr(config, key, value)
    with pytest.raises(ValueError):
        config.validate()


def test_duplicate_ids_rejected():
    spec = MechanismSpec("r", MechanismConfig("random", k=2))
    with pytest.raises(ValueError):
        ExperimentConfig(n=9, k=3, m=1, mechanisms=[spec, spec]).validate()


def test_population_is_seeded():
    a = make_population(comparison_config(seed=1))
    b = make_population(comparison_config(seed=1))
    c = make_population(comparison_config(seed=2))
    assert a.values == b.values != c.values
    assert a.n == 972 and a.is_strict


def test_population_from_file(tmp_path):
    pop = Population.from_values([0.3, -1.0, 2.5, 0.1, 0.0, 9.0, -3.0, 1.1, 0.7])
    write_population_csv(pop, tmp_path / "p.csv")
    spec = MechanismSpec("q", MechanismConfig("quantile", k=3, m=1))
    config = ExperimentConfig(9, 3, 1, [spec], reps=2, population_source="file",
                              population_path=str(tmp_path / "p.csv"))
    records = run_comparison(config)
    assert [r.positions for r in records] == [(2, 5, 8)] * 2
    config.n = 15
    with pytest.raises(ValueError):
        make_population(config)


def test_threads_do_not_change_records(monkeypatch):
    config = comparison_config(seed=7, reps=20)
    pop = make_population(config)
    one = run_comparison(config, pop, threads=1)
    assert run_comparison(config, pop, threads=4) == one
    monkeypatch.setenv("ADVSEL_THREADS", "3")
    assert resolve_threads(None) == 3
    assert run_comparison(config, pop) == one


def test_single_random_replicate_is_replayable():
    spec = MechanismSpec("random", MechanismConfig("random", k=12))
    config = ExperimentConfig(972, 12, 40, [spec], reps=1, seed=9)
    a, b = run_comparison(config), run_comparison(config)
    assert len(a) == 1 and a == b


def test_records_match_recomputation(fig2_run):
    _, pop, records = fig2_run
    for r in records[::97]:
        st = all_stats(pop, Sample(r.positions))
        assert (r.ks, r.l1, r.cvm) == (st["ks"], st["l1"], st["cvm"])


def test_quantile_constant_and_ordering(fig2_run):
    _, _, records = fig2_run
    q = _by_mech(records, "quantile")
    assert {r.ks for r in q} == {Fraction(10, 243)}
    random_ks = [r.ks for r in _by_mech(records, "random")]
    median_ks = [r.ks for r in _by_mech(records, "median_sample")]
    assert Fraction(10, 243) < min(random_ks)
    assert sum(median_ks) < sum(random_ks)
    assert 0.20 <= float(sum(random_ks) / len(random_ks)) <= 0.30


def test_figure_files(fig2_run, tmp_path):
    config, pop, records = fig2_run
    f1 = write_figure1(pop, config.k, config.m, tmp_path / "fig1.csv")
    rows = list(csv.DictReader(open(f1)))
    assert len(rows) == 972 and rows[-1]["F_x"] == "1" and rows[-1]["F_y"] == "1"
    assert [float(r["sorted_value"]) for r in rows] == sorted(float(r["sorted_value"]) for r in rows)
    data, summary = write_figure2(records, tmp_path / "fig2.csv")
    assert sum(1 for _ in open(data)) == 1 + 5000
    srows = {r["mechanism"]: r for r in csv.DictReader(open(summary))}
    q = srows["quantile"]
    assert q["mean"] == q["min"] == q["max"] == "0.0411522633745"
    assert q["mean_exact"] == "10/243"
    paths = emit_figure_data(records, "fig2", tmp_path / "again.csv")
    assert paths[0].read_bytes() == data.read_bytes()
    with pytest.raises(ValueError):
        emit_figure_data(records, "fig3", tmp_path / "x.csv")


def test_write_records_and_summary(tmp_path):
    config = comparison_config(seed=0, reps=3)
    records = run_comparison(config)
    path = write_records(records, tmp_path / "rec.csv")
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 15 and rows[0]["ks_exact"] == "10/243"
    assert {r["mechanism"] for r in summarize(records)} == {s.id for s in config.mechanisms}


def test_manifest_has_no_timestamp():
    config = comparison_config(seed=5)
    man = run_manifest(config, command="x")
    assert man["seed"] == 5 and man["config_sha256"] == config.digest()
    assert run_manifest(config, command="x") == man
    assert not any("time" in key or "date" in key for key in man)


def test_mean_ks_full_sample_is_zero():
    pop = Population.strict(30)
    assert mean_ks(pop, 30, 5, 0) == 0
    assert mean_ks(pop, 10, 50, 1) == mean_ks(pop, 10, 50, 1) > 0


def test_calibration_full_sample_boundary():
    pop = Population.strict(45)
    assert calibrate_equivalent_n(pop, 45, 0, reps=20, tolerance=0.0) == 45


def test_calibration_bounds_exhausted():
    pop = Population.strict(45)
    with pytest.raises(RuntimeError):
        calibrate_equivalent_n(pop, 45, 0, reps=20, tolerance=0.0, bounds=(1, 40))
    with pytest.raises(ValueError):
        calibrate_equivalent_n(pop, 45, 0, bounds=(0, 50))


def test_calibration_is_deterministic_and_stable():
    pop = make_population(comparison_config(seed=42))
    a = calibrate_equivalent_n(pop, 12, 40, reps=500, seed=42)
    assert calibrate_equivalent_n(pop, 12, 40, reps=500, seed=42) == a
    b = calibrate_equivalent_n(pop, 12, 40, reps=1000, seed=42)
    # the mean KS curve is flat near the equivalent size, so Monte Carlo noise moves it by tens of items
    assert abs(a - b) <= 40
    assert abs(mean_ks(pop, b, 1000, 42) - Fraction(10, 243)) <= Fraction(2, 1000)
