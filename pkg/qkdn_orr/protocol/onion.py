"""Layered encryption with per-node session keys."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from qkdn_orr.crypto import (
    SECRET_SIZE,
    RandomSource,
    SymKey,
    sym_ciphertext_length,
    sym_decrypt,
    sym_encrypt,
)
from qkdn_orr.errors import MissingKey
from qkdn_orr.protocol.circuit import Circuit


@dataclass(frozen=True)
class Onion:
    layers: bytes

    def __len__(self) -> int:
        return len(self.layers)


def wrap_onion(
    secret: bytes, circuit: Circuit, keys: Mapping[str, SymKey], rng: RandomSource
) -> Onion:
    """Encrypt under the destination's key first, then outwards to N_int,1."""
    blob = secret
    for node in reversed(circuit.nodes[1:]):
        try:
            key = keys[node]
        except KeyError:
            raise MissingKey(f"no session key for circuit node {node}") from None
        blob = sym_encrypt(key, blob, rng).to_bytes()
    return Onion(layers=blob)


def peel_layer(onion_bytes: bytes, key: SymKey) -> bytes:
    return sym_decrypt(key, onion_bytes)


def onion_length(n_nodes: int, secret_len: int = SECRET_SIZE) -> int:
    """Size of the onion for an n-node circuit, one layer per non-initiator."""
    size = secret_len
    for _ in range(n_nodes - 1):
        size = sym_ciphertext_length(size)
    return size
