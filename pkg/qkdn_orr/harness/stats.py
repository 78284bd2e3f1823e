"""Per-(model, n, metric) aggregation of trial timings."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from qkdn_orr.errors import IncompleteData


class Metric(str, Enum):
    ENCRYPTION_TIME = "encryption_time"
    DISTRIBUTION_TIME = "distribution_time"


@dataclass(frozen=True)
class StatRow:
    model: str
    n_nodes: int
    metric: Metric
    mean_us: float
    median_us: float
    p95_us: float
    stddev_us: float
    trials: int


def aggregate(model: str, n_nodes: int, metric: Metric, samples: Sequence[float]) -> StatRow:
    if len(samples) == 0:
        raise IncompleteData(f"no valid samples for {model} n={n_nodes} {metric.value}")
    data = np.asarray(samples, dtype=np.float64)
    return StatRow(
        model=model,
        n_nodes=n_nodes,
        metric=metric,
        mean_us=float(np.mean(data)),
        median_us=float(np.median(data)),
        p95_us=float(np.percentile(data, 95)),
        stddev_us=float(np.std(data)),
        trials=len(data),
    )
