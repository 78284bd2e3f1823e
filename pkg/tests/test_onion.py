from __future__ import annotations

import pytest

from qkdn_orr.crypto import SECRET_SIZE
from qkdn_orr.errors import BadPadding, MissingKey
from qkdn_orr.protocol import Circuit, onion_length, peel_layer, wrap_onion


def circuit_of(n: int) -> Circuit:
    return Circuit(tuple(f"N{i}" for i in range(n)))


def keys_for(circuit: Circuit, rng) -> dict[str, bytes]:
    return {node: rng.random_bytes(32) for node in circuit.nodes[1:]}


@pytest.mark.parametrize("n", [2, 3, 5, 11])
def test_peel_in_circuit_order_recovers_secret(rng, n):
    circuit = circuit_of(n)
    keys = keys_for(circuit, rng)
    secret = rng.random_bytes(SECRET_SIZE)
    blob = wrap_onion(secret, circuit, keys, rng).layers
    assert len(blob) == onion_length(n)
    for node in circuit.nodes[1:]:
        blob = peel_layer(blob, keys[node])
    assert blob == secret


def test_onion_lengths():
    assert onion_length(2) == 64
    assert onion_length(3) == 96
    assert onion_length(11) == 32 + 10 * 32


def test_intermediate_layers_hide_secret(rng):
    circuit = circuit_of(6)
    keys = keys_for(circuit, rng)
    secret = rng.random_bytes(SECRET_SIZE)
    blob = wrap_onion(secret, circuit, keys, rng).layers
    for node in circuit.intermediates:
        assert secret not in blob
        blob = peel_layer(blob, keys[node])


def test_out_of_order_peel_fails(rng):
    failures = 0
    for _ in range(200):
        circuit = circuit_of(4)
        keys = keys_for(circuit, rng)
        secret = rng.random_bytes(SECRET_SIZE)
        blob = wrap_onion(secret, circuit, keys, rng).layers
        try:
            inner = peel_layer(blob, keys["N2"])
            inner = peel_layer(inner, keys["N1"])
            inner = peel_layer(inner, keys["N3"])
        except BadPadding:
            failures += 1
            continue
        assert inner != secret
    assert failures >= 190


def test_missing_key(rng):
    circuit = circuit_of(3)
    with pytest.raises(MissingKey):
        wrap_onion(bytes(32), circuit, {"N1": rng.random_bytes(32)}, rng)
