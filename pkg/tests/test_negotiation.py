from __future__ import annotations

import pytest

from qkdn_orr.protocol import (
    Circuit,
    EnvelopeKind,
    make_nodes,
    negotiate_session_keys,
)


@pytest.mark.parametrize("n", [2, 3, 7])
def test_initiator_and_nodes_agree(channel, n):
    circuit = Circuit(tuple(f"N{i}" for i in range(n)))
    nodes = make_nodes(circuit.nodes, seed=11, scope="neg")
    table = negotiate_session_keys(nodes["N0"], circuit, channel, nodes)
    assert set(table) == set(circuit.nodes[1:])
    for node in circuit.nodes[1:]:
        assert nodes[node].session_key == table[node]
        assert len(table[node]) == 32
    assert len({table[node] for node in table}) == n - 1


def test_negotiation_traffic_is_point_to_point(channel):
    circuit = Circuit(("N0", "N1", "N2", "N3"))
    nodes = make_nodes(circuit.nodes, seed=2)
    negotiate_session_keys(nodes["N0"], circuit, channel, nodes)
    kinds = [env.kind for env in channel.wiretap]
    assert kinds.count(EnvelopeKind.KEM_PK) == 3
    assert kinds.count(EnvelopeKind.KEM_CT) == 3
    for env in channel.wiretap:
        assert "N0" in (env.sender, env.recipient)


def test_wrong_initiator_rejected(channel):
    circuit = Circuit(("N0", "N1"))
    nodes = make_nodes(circuit.nodes)
    with pytest.raises(ValueError):
        negotiate_session_keys(nodes["N1"], circuit, channel, nodes)
