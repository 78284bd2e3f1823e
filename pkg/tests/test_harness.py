from __future__ import annotations

import csv

import numpy as np
import pytest
from pydantic import ValidationError

from qkdn_orr.errors import IncompleteData
from qkdn_orr.harness import (
    Metric,
    Scenario,
    ScenarioRunner,
    StatRow,
    aggregate,
    compare_models,
    export_csv,
    export_raw,
    read_csv,
    run_scenario,
)
from qkdn_orr.harness.export import STAT_HEADER
from qkdn_orr.protocol import Model

# KR flat, ORR steepest; TN fastest to distribute at n=3, slowest at n=11 (µs)
REFERENCE_MEDIANS = {
    "KR": {"encryption_time": (1.1, 1.2, 1.1), "distribution_time": (226.0, 350.0, 480.0)},
    "TN": {"encryption_time": (2.0, 4.5, 7.0), "distribution_time": (224.0, 430.0, 655.0)},
    "ORR": {"encryption_time": (30.0, 54.0, 77.65), "distribution_time": (246.0, 390.0, 541.0)},
}
SIZES = (3, 7, 11)


def reference_rows() -> list[StatRow]:
    rows = []
    for model, metrics in REFERENCE_MEDIANS.items():
        for metric, medians in metrics.items():
            for n, median in zip(SIZES, medians):
                rows.append(StatRow(model, n, Metric(metric), median, median, median, 0.0, 1000))
    return rows


# ------------------------------
# Scenario validation
# ------------------------------


@pytest.mark.parametrize("sizes", [[1], [65], []])
def test_scenario_rejects_bad_sizes(sizes):
    with pytest.raises(ValidationError):
        Scenario(model=Model.KR, circuit_sizes=sizes)


def test_scenario_rejects_zero_trials():
    with pytest.raises(ValidationError):
        Scenario(model=Model.KR, trials=0)


# ------------------------------
# Runner
# ------------------------------


def test_run_scenario_shape():
    rows = run_scenario(Scenario(model=Model.KR, circuit_sizes=[3], trials=10, seed=1, warmup=2))
    assert [(r.n_nodes, r.metric) for r in rows] == [
        (3, Metric.ENCRYPTION_TIME),
        (3, Metric.DISTRIBUTION_TIME),
    ]
    assert all(r.trials == 10 for r in rows)


@pytest.mark.parametrize("model", list(Model))
def test_runner_report_and_aggregation_match_raw(model):
    scenario = Scenario(model=model, circuit_sizes=[3, 4], trials=15, seed=3, warmup=1)
    report = ScenarioRunner(scenario).run()
    assert not report.invalid
    assert len(report.raw) == 30
    assert len(report.rows) == 4
    for row in report.rows:
        field = "encryption_us" if row.metric is Metric.ENCRYPTION_TIME else "distribution_us"
        samples = [getattr(r, field) for r in report.raw if r.n_nodes == row.n_nodes]
        assert row.mean_us == pytest.approx(np.mean(samples))
        assert row.median_us == pytest.approx(np.median(samples))
        assert min(samples) <= row.median_us <= max(samples)
    for record in report.raw:
        assert record.distribution_us >= record.encryption_us


def test_fixed_seed_repeats_secret_sequence():
    scenario = Scenario(model=Model.ORR, circuit_sizes=[3], trials=5, seed=42, warmup=0)
    first = [r.secret_hex for r in ScenarioRunner(scenario).run().raw]
    again = [r.secret_hex for r in ScenarioRunner(scenario).run().raw]
    assert first == again
    assert len(set(first)) == 5


def test_tag_does_not_change_secrets():
    base = Scenario(model=Model.KR, circuit_sizes=[3], trials=3, seed=8, warmup=0)
    tagged = base.model_copy(update={"tag": "run1-"})
    assert [r.secret_hex for r in ScenarioRunner(base).run().raw] == [
        r.secret_hex for r in ScenarioRunner(tagged).run().raw
    ]


def test_invalid_trials_are_reported_not_aggregated(kms, kms_service):
    scenario = Scenario(
        model=Model.KR, circuit_sizes=[3], trials=20, seed=1, warmup=0, recv_timeout=0.2
    )
    runner = ScenarioRunner(scenario, kms)
    original = kms.get_enc_keys
    calls = {"n": 0}

    def flaky(master, slave, number=1, size_bits=256):
        calls["n"] += 1
        if calls["n"] == 5:
            raise RuntimeError("boom")
        return original(master, slave, number, size_bits)

    kms.get_enc_keys = flaky
    report = runner.run()
    assert len(report.invalid) == 1
    assert report.rows[0].trials == 19
    assert 0 < report.invalid_rate < 0.1


def test_aggregate_needs_samples():
    with pytest.raises(IncompleteData):
        aggregate("KR", 3, Metric.ENCRYPTION_TIME, [])


def test_aggregate_values():
    row = aggregate("KR", 3, Metric.ENCRYPTION_TIME, [1.0, 2.0, 3.0, 10.0])
    assert row.mean_us == 4.0
    assert row.median_us == 2.5
    assert row.stddev_us == pytest.approx(np.std([1.0, 2.0, 3.0, 10.0]))
    assert row.trials == 4


# ------------------------------
# Export
# ------------------------------


def test_export_header_and_order(tmp_path):
    path = export_csv(reversed(reference_rows()), tmp_path / "results.csv")
    with path.open() as f:
        lines = list(csv.reader(f))
    assert lines[0] == STAT_HEADER
    assert lines[0] == [
        "model", "n_nodes", "metric", "mean_us", "median_us", "p95_us", "stddev_us", "trials"
    ]
    keys = [(line[0], int(line[1]), line[2]) for line in lines[1:]]
    assert keys[:3] == [
        ("KR", 3, "encryption_time"),
        ("KR", 3, "distribution_time"),
        ("KR", 7, "encryption_time"),
    ]
    assert [k[0] for k in keys][-1] == "ORR"


def test_export_two_rows_is_three_lines(tmp_path):
    rows = reference_rows()[:2]
    path = export_csv(rows, tmp_path / "two.csv")
    assert len(path.read_text().splitlines()) == 3


def test_export_is_byte_identical_and_parses_back(tmp_path):
    rows = reference_rows()
    a = export_csv(rows, tmp_path / "a.csv").read_bytes()
    b = export_csv(list(reversed(rows)), tmp_path / "b.csv").read_bytes()
    assert a == b
    assert sorted(read_csv(tmp_path / "a.csv"), key=repr) == sorted(rows, key=repr)


def test_export_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        export_csv([], tmp_path / "empty.csv")


def test_raw_export(tmp_path):
    report = ScenarioRunner(
        Scenario(model=Model.TN, circuit_sizes=[3], trials=4, seed=2, warmup=0)
    ).run()
    path = export_raw(report.raw, tmp_path / "raw.csv")
    with path.open() as f:
        records = list(csv.DictReader(f))
    assert len(records) == 4
    assert records[0]["messages_sent"] == "3"
    assert len(records[0]["secret_hex"]) == 64


# ------------------------------
# Comparison
# ------------------------------


def test_compare_reference_orderings():
    report = compare_models(reference_rows())
    for n in SIZES:
        assert report.ordering[Metric.ENCRYPTION_TIME, n] == ("ORR", "TN", "KR")
    assert report.ordering[Metric.DISTRIBUTION_TIME, 3][-1] == "TN"
    assert report.ordering[Metric.DISTRIBUTION_TIME, 11][0] == "TN"
    assert abs(report.slopes["KR", Metric.ENCRYPTION_TIME]) < 0.1
    assert report.slopes["ORR", Metric.ENCRYPTION_TIME] > 0
    assert report.orr_over_tn[11] == pytest.approx(77.65 / 7.0)
    assert report.distribution_growth["TN"] == pytest.approx(431.0)
    assert "ORR" in report.render()


def test_compare_single_model_is_incomplete():
    with pytest.raises(IncompleteData):
        compare_models([r for r in reference_rows() if r.model == "KR"])


def test_compare_without_shared_sizes_is_incomplete():
    rows = [r for r in reference_rows() if not (r.model == "TN" and r.n_nodes != 3)]
    rows = [r for r in rows if not (r.model == "KR" and r.n_nodes == 3)]
    with pytest.raises(IncompleteData):
        compare_models(rows)
