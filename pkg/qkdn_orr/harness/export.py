"""CSV files: aggregate StatRows and the optional raw per-trial dump."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

from qkdn_orr.harness.stats import Metric, StatRow

STAT_HEADER = ["model", "n_nodes", "metric", "mean_us", "median_us", "p95_us", "stddev_us", "trials"]
RAW_HEADER = [
    "model",
    "n_nodes",
    "trial",
    "encryption_us",
    "distribution_us",
    "messages_sent",
    "secret_hex",
]

MODEL_ORDER = {"KR": 0, "TN": 1, "ORR": 2}
METRIC_ORDER = {Metric.ENCRYPTION_TIME: 0, Metric.DISTRIBUTION_TIME: 1}


def _row_key(row: StatRow) -> tuple:
    return (MODEL_ORDER.get(row.model, len(MODEL_ORDER)), row.model, row.n_nodes, METRIC_ORDER[row.metric])


def export_csv(rows: Iterable[StatRow], path: str | Path) -> Path:
    rows = sorted(rows, key=_row_key)
    if not rows:
        raise ValueError("export_csv needs at least one row")
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(STAT_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.model,
                    row.n_nodes,
                    row.metric.value,
                    repr(row.mean_us),
                    repr(row.median_us),
                    repr(row.p95_us),
                    repr(row.stddev_us),
                    row.trials,
                ]
            )
    return path


def read_csv(path: str | Path) -> list[StatRow]:
    with Path(path).open(newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != STAT_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            StatRow(
                model=rec["model"],
                n_nodes=int(rec["n_nodes"]),
                metric=Metric(rec["metric"]),
                mean_us=float(rec["mean_us"]),
                median_us=float(rec["median_us"]),
                p95_us=float(rec["p95_us"]),
                stddev_us=float(rec["stddev_us"]),
                trials=int(rec["trials"]),
            )
            for rec in reader
        ]


def export_raw(records: Iterable, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RAW_HEADER)
        for rec in records:
            writer.writerow(
                [
                    rec.model,
                    rec.n_nodes,
                    rec.trial,
                    repr(rec.encryption_us),
                    repr(rec.distribution_us),
                    rec.messages_sent,
                    rec.secret_hex,
                ]
            )
    return path
