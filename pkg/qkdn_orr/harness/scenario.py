"""Scenario runner: provision, build, negotiate, run trials, aggregate."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from pydantic import BaseModel, Field, field_validator

from qkdn_orr.crypto import RandomSource
from qkdn_orr.errors import QkdnError, TrialFailed
from qkdn_orr.harness.stats import Metric, StatRow, aggregate
from qkdn_orr.kms import InProcessKmsClient, KeyManagementService, KmsClient
from qkdn_orr.netsim import Channel, ChannelConfig
from qkdn_orr.protocol import (
    CircuitNode,
    KeyDistributionEngine,
    KeyRelayEngine,
    Model,
    OnionRoutingRelayEngine,
    TrustedNodeEngine,
    build_circuit,
    line_topology,
)

logger = logging.getLogger(__name__)

MIN_NODES, MAX_NODES = 2, 64


class Scenario(BaseModel):
    model: Model
    circuit_sizes: list[int] = Field(default_factory=lambda: [3, 5, 7, 9, 11], min_length=1)
    trials: int = Field(default=1000, ge=1)
    seed: int | None = Field(default=None, ge=0)
    latency: ChannelConfig = Field(default_factory=ChannelConfig)
    orr_qkd_every_hop: bool = True
    warmup: int = Field(default=10, ge=0)
    recv_timeout: float = Field(default=2.0, gt=0.0)
    # prefixes node ids so reruns against a long-lived KMS do not collide
    tag: str = ""

    @field_validator("circuit_sizes")
    @classmethod
    def _sizes_in_range(cls, sizes: list[int]) -> list[int]:
        bad = [n for n in sizes if not MIN_NODES <= n <= MAX_NODES]
        if bad:
            raise ValueError(f"circuit sizes must lie in {MIN_NODES}..{MAX_NODES}, got {bad}")
        return sorted(set(sizes))


@dataclass(frozen=True)
class TrialRecord:
    model: str
    n_nodes: int
    trial: int
    encryption_us: float
    distribution_us: float
    messages_sent: int
    secret_hex: str


@dataclass(frozen=True)
class InvalidTrial:
    model: str
    n_nodes: int
    trial: int
    error: str


@dataclass
class ScenarioReport:
    rows: list[StatRow] = field(default_factory=list)
    raw: list[TrialRecord] = field(default_factory=list)
    invalid: list[InvalidTrial] = field(default_factory=list)

    @property
    def attempted(self) -> int:
        return len(self.raw) + len(self.invalid)

    @property
    def invalid_rate(self) -> float:
        return len(self.invalid) / self.attempted if self.attempted else 0.0

    def extend(self, other: ScenarioReport) -> None:
        self.rows.extend(other.rows)
        self.raw.extend(other.raw)
        self.invalid.extend(other.invalid)


class ScenarioRunner:
    """Runs one Scenario against a KMS, one (model, n) point at a time."""

    def __init__(self, scenario: Scenario, kms: KmsClient | None = None) -> None:
        self.scenario = scenario
        if kms is None:
            kms = InProcessKmsClient(
                KeyManagementService(RandomSource.derive(scenario.seed, "kms"))
            )
        self.kms = kms

    def node_ids(self, n: int) -> tuple[list[str], str]:
        prefix = f"{self.scenario.tag}{self.scenario.model.value.lower()}{n:02d}"
        return [f"{prefix}-n{i:02d}" for i in range(n)], f"{prefix}-tn"

    def run(self) -> ScenarioReport:
        report = ScenarioReport()
        for n in self.scenario.circuit_sizes:
            report.extend(self.run_size(n))
        return report

    def _nodes(self, n: int, ids: list[str], tn: str) -> dict[str, CircuitNode]:
        # streams are keyed by position, not id, so a tag never changes secrets
        model = self.scenario.model.value
        seed = self.scenario.seed
        nodes = {
            node_id: CircuitNode(node_id, RandomSource.derive(seed, model, n, i))
            for i, node_id in enumerate(ids)
        }
        nodes[tn] = CircuitNode(tn, RandomSource.derive(seed, model, n, "tn"))
        return nodes

    def _engine(self, n: int) -> KeyDistributionEngine:
        s = self.scenario
        ids, tn = self.node_ids(n)
        circuit = build_circuit(line_topology(ids), ids[0], ids[-1])
        total = s.warmup + s.trials
        # failed trials may still have consumed keys
        for a, b in circuit.links:
            self.kms.provision_link(a, b, total + max(10, total // 10))

        channel = Channel(s.latency)
        common = dict(nodes=self._nodes(n, ids, tn), recv_timeout=s.recv_timeout)
        if s.model is Model.KR:
            return KeyRelayEngine(circuit, channel, self.kms, **common)
        if s.model is Model.TN:
            return TrustedNodeEngine(circuit, tn, channel, self.kms, **common)
        return OnionRoutingRelayEngine(
            circuit, channel, self.kms, qkd_every_hop=s.orr_qkd_every_hop, **common
        )

    def run_size(self, n: int) -> ScenarioReport:
        s = self.scenario
        model = s.model.value
        report = ScenarioReport()
        logger.info(
            "scenario %s n=%d: %d trials after %d warm-up", model, n, s.trials, s.warmup
        )
        enc: list[float] = []
        dist: list[float] = []
        with self._engine(n) as engine:
            for trial in range(s.warmup + s.trials):
                try:
                    result = engine.run()
                    if not result.ok:
                        raise TrialFailed(
                            engine.circuit.destination, ValueError("recovered secret differs")
                        )
                except QkdnError as e:
                    engine.channel.reset()
                    logger.warning("%s n=%d trial %d invalid: %s", model, n, trial, e)
                    report.invalid.append(InvalidTrial(model, n, trial, str(e)))
                    continue
                if trial < s.warmup:
                    continue
                enc.append(result.encryption_time)
                dist.append(result.distribution_time)
                report.raw.append(
                    TrialRecord(
                        model=model,
                        n_nodes=n,
                        trial=trial - s.warmup,
                        encryption_us=result.encryption_time,
                        distribution_us=result.distribution_time,
                        messages_sent=result.messages_sent,
                        secret_hex=result.secret_sent.hex(),
                    )
                )
        if enc:
            report.rows.append(aggregate(model, n, Metric.ENCRYPTION_TIME, enc))
            report.rows.append(aggregate(model, n, Metric.DISTRIBUTION_TIME, dist))
        else:
            logger.error("%s n=%d produced no valid trials", model, n)
        logger.info(
            "scenario %s n=%d done: %d valid, %d invalid",
            model,
            n,
            len(enc),
            len(report.invalid),
        )
        return report


def run_scenario(s: Scenario, kms: KmsClient | None = None) -> list[StatRow]:
    return ScenarioRunner(s, kms).run().rows
