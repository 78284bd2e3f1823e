from __future__ import annotations

import pytest

from qkdn_orr.crypto import RandomSource
from qkdn_orr.kms import InProcessKmsClient, KeyManagementService
from qkdn_orr.netsim import Channel, ChannelConfig
from qkdn_orr.protocol import Circuit, build_circuit, line_topology


@pytest.fixture
def rng() -> RandomSource:
    return RandomSource(1234)


@pytest.fixture
def kms_service() -> KeyManagementService:
    return KeyManagementService(RandomSource(7))


@pytest.fixture
def kms(kms_service) -> InProcessKmsClient:
    return InProcessKmsClient(kms_service)


@pytest.fixture
def channel():
    ch = Channel(ChannelConfig())
    yield ch
    ch.close()


@pytest.fixture
def make_line(kms_service):
    """Build an n-node line circuit with `keys` QKD keys on every link."""

    def _make(n: int, keys: int = 16, prefix: str = "N") -> Circuit:
        ids = [f"{prefix}{i}" for i in range(n)]
        circuit = build_circuit(line_topology(ids), ids[0], ids[-1])
        for a, b in circuit.links:
            kms_service.provision_link(a, b, keys)
        return circuit

    return _make
