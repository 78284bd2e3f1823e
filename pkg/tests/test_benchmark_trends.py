"""Timing trends across models. Host dependent; run with `pytest -m benchmark`."""

from __future__ import annotations

import numpy as np
import pytest

from qkdn_orr.harness import Metric, Scenario, ScenarioReport, ScenarioRunner, compare_models
from qkdn_orr.protocol import Model

pytestmark = pytest.mark.benchmark

SIZES = [3, 5, 7, 9, 11]
TRIALS = 1000


@pytest.fixture(scope="module")
def report() -> ScenarioReport:
    combined = ScenarioReport()
    for model in Model:
        scenario = Scenario(model=model, circuit_sizes=SIZES, trials=TRIALS, seed=42)
        combined.extend(ScenarioRunner(scenario).run())
    assert not combined.invalid
    return combined


def medians(report: ScenarioReport, model: str, metric: Metric) -> list[float]:
    by_n = {r.n_nodes: r.median_us for r in report.rows if r.model == model and r.metric is metric}
    return [by_n[n] for n in SIZES]


def test_every_point_has_a_thousand_trials(report):
    assert len(report.rows) == 3 * len(SIZES) * 2
    assert all(row.trials == TRIALS for row in report.rows)


def test_encryption_ordering(report):
    comparison = compare_models(report.rows)
    for n in SIZES:
        assert comparison.ordering[Metric.ENCRYPTION_TIME, n] == ("ORR", "TN", "KR")


def test_orr_encryption_strictly_increases(report):
    orr = medians(report, "ORR", Metric.ENCRYPTION_TIME)
    assert all(np.diff(orr) > 0)


def test_kr_encryption_is_flat(report):
    kr = medians(report, "KR", Metric.ENCRYPTION_TIME)
    assert max(kr) / min(kr) <= 2


@pytest.mark.xfail(
    strict=False,
    reason="each ORR layer is a full pycryptodome AES call, so the region"
    " grows with the layer count",
)
def test_orr_encryption_ratio_band(report):
    orr = medians(report, "ORR", Metric.ENCRYPTION_TIME)
    assert 1.2 <= orr[-1] / orr[0] <= 2.5


def test_tn_encryption_ratio_band(report):
    tn = medians(report, "TN", Metric.ENCRYPTION_TIME)
    assert 1.5 <= tn[-1] / tn[0] <= 4.5


@pytest.mark.parametrize("model", ["KR", "TN", "ORR"])
def test_distribution_is_nondecreasing(report, model):
    distribution = medians(report, model, Metric.DISTRIBUTION_TIME)
    assert all(np.diff(distribution) >= 0)


def test_tn_distribution_grows_more_than_kr(report):
    growth = compare_models(report.rows).distribution_growth
    assert growth["TN"] > growth["KR"]


@pytest.mark.xfail(
    strict=False,
    reason="every ORR hop pays AES decrypt, peel and re-encrypt inside the window",
)
def test_tn_distribution_grows_the_most(report):
    growth = compare_models(report.rows).distribution_growth
    assert growth["TN"] == max(growth.values())
