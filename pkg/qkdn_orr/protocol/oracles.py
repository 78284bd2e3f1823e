"""What an adversary learns from a finished run.

Each oracle returns the recovered secret, or None when the material it holds
does not yield one. Recovery is judged against DistributionResult.secret_sent.
"""

from __future__ import annotations

from typing import Mapping

from qkdn_orr.crypto import SECRET_SIZE, SymKey, sym_decrypt, xor_otp
from qkdn_orr.errors import CryptoError
from qkdn_orr.protocol.circuit import Circuit
from qkdn_orr.protocol.engines import DistributionResult, Model
from qkdn_orr.protocol.envelope import SECRET_BEARING, EnvelopeKind


def leak_fraction(results: list[DistributionResult]) -> float:
    """Share of intermediate transcripts that contain the secret."""
    seen = total = 0
    for result in results:
        leaked = set(result.nodes_that_saw_secret())
        for node in result.circuit.intermediates:
            total += 1
            seen += node in leaked
    return seen / total if total else 0.0


def _checked(candidate: bytes | None, result: DistributionResult) -> bytes | None:
    return candidate if candidate == result.secret_sent else None


def xor_eavesdropper(
    result: DistributionResult, leaked_link: int, link_key: bytes
) -> bytes | None:
    """Classical-channel observer that also learned one link key.

    It holds every TN-bound share, the TN_FINAL message and every hop
    ciphertext. In TN the shares of the nodes up to the leaked link fold to
    S xor K(link); in KR the ciphertext on that link is S xor K(link). ORR hop
    traffic stays wrapped in PQC layers.
    """
    circuit = result.circuit
    upstream = circuit.nodes[leaked_link]
    shares = {
        env.sender: env.payload for env in result.wiretap if env.kind is EnvelopeKind.TN_SHARE
    }
    if shares:
        folded = bytes(SECRET_SIZE)
        for node in circuit.nodes[: leaked_link + 1]:
            if node not in shares:
                return None
            folded = xor_otp(folded, shares[node])
        return _checked(xor_otp(folded, link_key), result)

    for env in result.wiretap:
        if env.sender != upstream or env.kind not in SECRET_BEARING:
            continue
        if env.kind is EnvelopeKind.KR_HOP:
            return _checked(xor_otp(env.payload, link_key), result)
        if env.kind is EnvelopeKind.ONION_HOP:
            return _checked(_unwrap_link(env.payload, link_key), result)
    return None


def _unwrap_link(payload: bytes, link_key: SymKey) -> bytes | None:
    try:
        inner = sym_decrypt(link_key, payload)
    except CryptoError:
        return None
    # the best guess left is any secret-sized window of what is still an onion
    return inner[:SECRET_SIZE]


def malicious_node(result: DistributionResult, node: str) -> bytes | None:
    """A curious circuit member reading only its own transcript."""
    for item in result.per_node_transcripts.get(node, ()):
        if result.secret_sent in item:
            return result.secret_sent
    return None


def compromised_kem(
    result: DistributionResult, node: str, session_keys: Mapping[str, SymKey]
) -> bytes | None:
    """A malicious ORR member that also obtained downstream session keys.

    It peels what it observed with every key it holds, innermost order. With
    all downstream keys S falls out, which is exactly KR's exposure.
    """
    if result.model is not Model.ORR:
        return malicious_node(result, node)
    circuit: Circuit = result.circuit
    seen = result.per_node_transcripts.get(node, ())
    if not seen:
        return None
    blob = seen[-1]
    for downstream in circuit.nodes[circuit.position(node) + 1 :]:
        key = session_keys.get(downstream)
        if key is None:
            return None
        try:
            blob = sym_decrypt(key, blob)
        except CryptoError:
            return None
    return _checked(blob, result)


def routing_view(result: DistributionResult, node: str) -> set[str]:
    """Peers a node exchanged secret-bearing envelopes with."""
    peers: set[str] = set()
    for env in result.wiretap:
        if env.kind not in SECRET_BEARING:
            continue
        if env.sender == node:
            peers.add(env.recipient)
        elif env.recipient == node:
            peers.add(env.sender)
    return peers
