from qkdn_orr.protocol.circuit import Circuit, build_circuit, line_topology
from qkdn_orr.protocol.engines import (
    ENGINES,
    DistributionResult,
    KeyDistributionEngine,
    KeyRelayEngine,
    Model,
    OnionRoutingRelayEngine,
    TrustedNodeEngine,
    run_kr,
    run_orr,
    run_tn,
)
from qkdn_orr.protocol.envelope import SECRET_BEARING, Envelope, EnvelopeKind
from qkdn_orr.protocol.negotiation import SessionKeyTable, negotiate_session_keys
from qkdn_orr.protocol.node import CircuitNode, NodeRuntime, make_nodes
from qkdn_orr.protocol.onion import Onion, onion_length, peel_layer, wrap_onion

__all__ = [
    "Circuit",
    "CircuitNode",
    "DistributionResult",
    "ENGINES",
    "Envelope",
    "EnvelopeKind",
    "KeyDistributionEngine",
    "KeyRelayEngine",
    "Model",
    "NodeRuntime",
    "Onion",
    "OnionRoutingRelayEngine",
    "SECRET_BEARING",
    "SessionKeyTable",
    "TrustedNodeEngine",
    "build_circuit",
    "line_topology",
    "make_nodes",
    "negotiate_session_keys",
    "onion_length",
    "peel_layer",
    "run_kr",
    "run_orr",
    "run_tn",
    "wrap_onion",
]
