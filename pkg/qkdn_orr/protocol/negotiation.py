"""ML-KEM session-key negotiation between the initiator and each circuit node.

Each non-initiator node generates a key pair and sends its public key; the
initiator encapsulates a fresh secret under it and returns the ciphertext.
Messages go point-to-point, not through the circuit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Mapping

from qkdn_orr.crypto import (
    KemCiphertext,
    SymKey,
    kem_decapsulate,
    kem_encapsulate,
    kem_keygen,
)
from qkdn_orr.errors import UnexpectedEnvelope
from qkdn_orr.netsim import Channel
from qkdn_orr.protocol.circuit import Circuit
from qkdn_orr.protocol.envelope import Envelope, EnvelopeKind
from qkdn_orr.protocol.node import CircuitNode, NodeRuntime

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SessionKeyTable:
    """The initiator's view: one symmetric key per non-initiator circuit node."""

    keys: Mapping[str, SymKey]

    def __getitem__(self, node: str) -> SymKey:
        return self.keys[node]

    def __contains__(self, node: object) -> bool:
        return node in self.keys

    def __iter__(self) -> Iterator[str]:
        return iter(self.keys)

    def __len__(self) -> int:
        return len(self.keys)


def negotiate_session_keys(
    initiator: CircuitNode,
    circuit: Circuit,
    channel: Channel,
    nodes: Mapping[str, CircuitNode],
    runtime: NodeRuntime | None = None,
    timeout: float = 5.0,
) -> SessionKeyTable:
    """Run the KEM exchange; responders keep their key in `session_key`."""
    if initiator.node_id != circuit.initiator:
        raise ValueError(f"{initiator.node_id} does not start circuit {circuit.nodes}")
    responders = circuit.nodes[1:]
    channel.register(*circuit.nodes)

    def expect(node: str, kind: EnvelopeKind) -> Envelope:
        env = channel.recv(node, timeout)
        if env.kind is not kind:
            raise UnexpectedEnvelope(f"{node} expected {kind.value}, got {env.kind.value}")
        return env

    def respond(node: CircuitNode) -> SymKey:
        pair = kem_keygen(node.rng)
        channel.send(
            Envelope(node.node_id, initiator.node_id, EnvelopeKind.KEM_PK, pair.public_key)
        )
        env = expect(node.node_id, EnvelopeKind.KEM_CT)
        node.session_key = kem_decapsulate(pair.secret_key, KemCiphertext(env.payload))
        return node.session_key

    def initiate() -> dict[str, SymKey]:
        table: dict[str, SymKey] = {}
        for _ in responders:
            env = expect(initiator.node_id, EnvelopeKind.KEM_PK)
            if env.sender not in responders or env.sender in table:
                raise UnexpectedEnvelope(f"unexpected KEM_PK from {env.sender}")
            ct, shared = kem_encapsulate(env.payload, initiator.rng)
            table[env.sender] = shared
            channel.send(Envelope(initiator.node_id, env.sender, EnvelopeKind.KEM_CT, ct.data))
            logger.debug("session key agreed with %s", env.sender)
        return table

    roles = {initiator.node_id: initiate}
    roles.update({node: (lambda n=nodes[node]: respond(n)) for node in responders})

    own_runtime = runtime is None
    runtime = runtime or NodeRuntime(len(roles), timeout=timeout * 2)
    try:
        results = runtime.run(roles)
    finally:
        if own_runtime:
            runtime.close()
    return SessionKeyTable(keys=results[initiator.node_id])
