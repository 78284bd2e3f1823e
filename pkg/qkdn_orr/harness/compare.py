"""Cross-model comparison of aggregated results."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from qkdn_orr.errors import IncompleteData
from qkdn_orr.harness.stats import Metric, StatRow

MODELS = ("KR", "TN", "ORR")


@dataclass(frozen=True)
class ComparisonReport:
    sizes: tuple[int, ...]
    medians: dict[tuple[str, Metric, int], float]
    # slowest first, per (metric, n)
    ordering: dict[tuple[Metric, int], tuple[str, ...]]
    # µs per added node, least-squares fit over the shared sizes
    slopes: dict[tuple[str, Metric], float]
    orr_over_tn: dict[int, float]
    orr_over_kr: dict[int, float]
    distribution_growth: dict[str, float]

    def render(self) -> str:
        lines = []
        for metric in Metric:
            lines.append(f"{metric.value} (median µs, slowest first)")
            for n in self.sizes:
                ranked = "  ".join(
                    f"{m}={self.medians[m, metric, n]:.2f}" for m in self.ordering[metric, n]
                )
                lines.append(f"  n={n:<3d} {ranked}")
            slopes = "  ".join(f"{m}={self.slopes[m, metric]:+.3f}" for m in MODELS)
            lines.append(f"  slope µs/node: {slopes}")
        lines.append("ORR encryption overhead")
        for n in self.sizes:
            lines.append(
                f"  n={n:<3d} x{self.orr_over_tn[n]:.2f} vs TN  x{self.orr_over_kr[n]:.2f} vs KR"
            )
        growth = "  ".join(f"{m}={self.distribution_growth[m]:+.2f}" for m in MODELS)
        lines.append(f"distribution growth µs ({self.sizes[0]}->{self.sizes[-1]}): {growth}")
        return "\n".join(lines)


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else float("inf")


def compare_models(rows: Iterable[StatRow]) -> ComparisonReport:
    medians = {(r.model, r.metric, r.n_nodes): r.median_us for r in rows}
    present = {m for m, _, _ in medians}
    missing = [m for m in MODELS if m not in present]
    if missing:
        raise IncompleteData(f"comparison needs all three models, missing {missing}")

    shared = sorted(
        n
        for n in {n for _, _, n in medians}
        if all((m, metric, n) in medians for m in MODELS for metric in Metric)
    )
    if not shared:
        raise IncompleteData("no circuit size is covered by all three models")

    ordering = {
        (metric, n): tuple(sorted(MODELS, key=lambda m: -medians[m, metric, n]))
        for metric in Metric
        for n in shared
    }
    slopes = {}
    for m in MODELS:
        for metric in Metric:
            ys = [medians[m, metric, n] for n in shared]
            slopes[m, metric] = (
                float(np.polyfit(shared, ys, 1)[0]) if len(shared) >= 2 else 0.0
            )

    enc = Metric.ENCRYPTION_TIME
    dist = Metric.DISTRIBUTION_TIME
    return ComparisonReport(
        sizes=tuple(shared),
        medians=medians,
        ordering=ordering,
        slopes=slopes,
        orr_over_tn={n: _ratio(medians["ORR", enc, n], medians["TN", enc, n]) for n in shared},
        orr_over_kr={n: _ratio(medians["ORR", enc, n], medians["KR", enc, n]) for n in shared},
        distribution_growth={
            m: medians[m, dist, shared[-1]] - medians[m, dist, shared[0]] for m in MODELS
        },
    )
