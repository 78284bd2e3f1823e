"""Key-Relay, Trusted-Node and Onion Routing Relay engines.

Each engine runs one thread per participant over the netsim channel. A run
starts with all participants at a barrier; the distribution clock starts
when the initiator creates the secret and stops when the destination
recovers it. The encryption clock wraps only the model's own region:

    KR   the initiator's XOR of the secret with the first link key
    TN   the trusted node's fold of the shares it received
    ORR  onion construction plus the outer QKD-layer encryption
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable, ClassVar, Mapping

from qkdn_orr.crypto import (
    SECRET_SIZE,
    RandomSource,
    sym_decrypt,
    sym_encrypt,
    xor_otp,
)
from qkdn_orr.errors import MissingKey, UnexpectedEnvelope
from qkdn_orr.kms import KmsClient, QkdKey
from qkdn_orr.netsim import Channel
from qkdn_orr.protocol.circuit import Circuit
from qkdn_orr.protocol.envelope import SECRET_BEARING, Envelope, EnvelopeKind
from qkdn_orr.protocol.negotiation import SessionKeyTable, negotiate_session_keys
from qkdn_orr.protocol.node import CircuitNode, NodeRuntime, make_nodes
from qkdn_orr.protocol.onion import peel_layer, wrap_onion

logger = logging.getLogger(__name__)


class Model(str, Enum):
    KR = "KR"
    TN = "TN"
    ORR = "ORR"


@dataclass(frozen=True)
class DistributionResult:
    model: Model
    circuit: Circuit
    secret_sent: bytes
    secret_received: bytes
    encryption_time: float
    distribution_time: float
    messages_sent: int
    per_node_transcripts: Mapping[str, tuple[bytes, ...]]
    wiretap: tuple[Envelope, ...] = ()

    @property
    def ok(self) -> bool:
        return self.secret_received == self.secret_sent

    def nodes_that_saw_secret(self) -> list[str]:
        return [
            node
            for node, seen in self.per_node_transcripts.items()
            if any(self.secret_sent in item for item in seen)
        ]


@dataclass(frozen=True)
class _Departure:
    secret: bytes
    started_us: float
    encryption_us: float | None


@dataclass(frozen=True)
class _Arrival:
    secret: bytes
    finished_us: float


def _elapsed_us(start_ns: int) -> float:
    return (time.perf_counter_ns() - start_ns) / 1_000


class KeyDistributionEngine:
    """Shared plumbing: node state, key fetches, barrier and result assembly."""

    model: ClassVar[Model]

    def __init__(
        self,
        circuit: Circuit,
        channel: Channel,
        kms: KmsClient,
        *,
        nodes: Mapping[str, CircuitNode] | None = None,
        seed: int | None = None,
        recv_timeout: float = 2.0,
    ) -> None:
        self.circuit = circuit
        self.channel = channel
        self.kms = kms
        self.recv_timeout = recv_timeout
        self.nodes = dict(nodes) if nodes is not None else {}
        missing = [p for p in self.participants if p not in self.nodes]
        self.nodes.update(make_nodes(missing, seed, scope=self.model.value))
        channel.register(*self.participants)
        self.runtime = NodeRuntime(len(self.participants), timeout=recv_timeout * 4)

    @property
    def participants(self) -> tuple[str, ...]:
        return self.circuit.nodes

    def roles(self) -> dict[str, Callable[[], object]]:
        raise NotImplementedError

    def run(self) -> DistributionResult:
        self.channel.clear_wiretap()
        for node in self.nodes.values():
            node.transcript.clear()
        if self.channel.clock.virtual:
            self.channel.clock.reset()

        outcome = self.runtime.run(self.roles())

        departure = outcome[self.circuit.initiator]
        arrival = outcome[self.circuit.destination]
        encryption_us = self._encryption_time(outcome)
        wiretap = self.channel.wiretap
        return DistributionResult(
            model=self.model,
            circuit=self.circuit,
            secret_sent=departure.secret,
            secret_received=arrival.secret,
            encryption_time=encryption_us,
            distribution_time=arrival.finished_us - departure.started_us,
            messages_sent=sum(1 for env in wiretap if env.kind in SECRET_BEARING),
            per_node_transcripts={
                node_id: tuple(self.nodes[node_id].transcript)
                for node_id in self.participants
            },
            wiretap=wiretap,
        )

    def _encryption_time(self, outcome: Mapping[str, object]) -> float:
        return outcome[self.circuit.initiator].encryption_us

    def close(self) -> None:
        self.runtime.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- helpers used inside node threads --

    def _neighbours(self, pos: int) -> tuple[str, str | None, str | None]:
        nodes = self.circuit.nodes
        prev = nodes[pos - 1] if pos > 0 else None
        nxt = nodes[pos + 1] if pos < len(nodes) - 1 else None
        return nodes[pos], prev, nxt

    def _barrier(self, node: str) -> None:
        self.channel.barrier(node, self.participants, timeout=self.recv_timeout)

    def _recv(self, node: str, kind: EnvelopeKind) -> Envelope:
        env = self.channel.recv(node, timeout=self.recv_timeout)
        if env.kind is not kind:
            raise UnexpectedEnvelope(f"{node} expected {kind.value}, got {env.kind.value}")
        return env

    def _enc_key(self, me: str, peer: str) -> QkdKey:
        return self.kms.get_enc_keys(me, peer, 1)[0]

    def _dec_key(self, me: str, peer: str, env: Envelope) -> QkdKey:
        if env.qkd_key_id is None:
            raise UnexpectedEnvelope(f"{env.kind.value} from {peer} carries no key_ID")
        return self.kms.get_dec_keys(me, peer, [env.qkd_key_id])[0]

    def _now(self, node: str) -> float:
        return self.channel.clock.now_us(node)


# ---------------------------------------------------------------------------
# Key Relay
# ---------------------------------------------------------------------------


class KeyRelayEngine(KeyDistributionEngine):
    """Hop-by-hop one-time pad: every intermediate decrypts and re-encrypts."""

    model = Model.KR

    def roles(self) -> dict[str, Callable[[], object]]:
        roles: dict[str, Callable[[], object]] = {self.circuit.initiator: self._initiator}
        for pos in range(1, len(self.circuit)):
            roles[self.circuit.nodes[pos]] = partial(self._hop, pos)
        return roles

    def _initiator(self) -> _Departure:
        me, _, nxt = self._neighbours(0)
        node = self.nodes[me]
        self._barrier(me)

        started = self._now(me)
        secret = node.rng.random_bytes(SECRET_SIZE)
        key = self._enc_key(me, nxt)
        start = time.perf_counter_ns()
        ciphertext = xor_otp(secret, key.key)
        encryption_us = _elapsed_us(start)
        self.channel.clock.charge(me, encryption_us)

        self.channel.send(Envelope(me, nxt, EnvelopeKind.KR_HOP, ciphertext, key.key_id))
        return _Departure(secret, started, encryption_us)

    def _hop(self, pos: int) -> _Arrival | None:
        me, prev, nxt = self._neighbours(pos)
        node = self.nodes[me]
        self._barrier(me)

        env = self._recv(me, EnvelopeKind.KR_HOP)
        inbound = self._dec_key(me, prev, env)
        plaintext = xor_otp(env.payload, inbound.key)
        node.observe(plaintext)
        if nxt is None:
            return _Arrival(plaintext, self._now(me))

        outbound = self._enc_key(me, nxt)
        self.channel.send(
            Envelope(
                me, nxt, EnvelopeKind.KR_HOP, xor_otp(plaintext, outbound.key), outbound.key_id
            )
        )
        logger.debug("KR %s relayed to %s", me, nxt)
        return None


# ---------------------------------------------------------------------------
# Trusted Node
# ---------------------------------------------------------------------------


class TrustedNodeEngine(KeyDistributionEngine):
    """Central relay folding XOR shares from every non-destination node.

    Once the clock runs every member fetches its outbound link key and
    announces the key_ID downstream (KEY_ID, management traffic), all
    concurrently. The initiator sends S xor K(link_0) and each intermediate j
    sends K(link_j-1) xor K(link_j) as soon as it holds both keys. The trusted
    node folds the shares into S xor K(link_last) and forwards that to the
    destination on TN_FINAL, which carries the last link's key_ID.
    """

    model = Model.TN

    def __init__(self, circuit: Circuit, tn: str, channel: Channel, kms: KmsClient, **kwargs):
        if tn in circuit.nodes:
            raise ValueError(f"trusted node {tn} must not be a circuit member")
        self.tn = tn
        super().__init__(circuit, channel, kms, **kwargs)

    @property
    def participants(self) -> tuple[str, ...]:
        return (*self.circuit.nodes, self.tn)

    def roles(self) -> dict[str, Callable[[], object]]:
        roles: dict[str, Callable[[], object]] = {
            node: partial(self._member, pos) for pos, node in enumerate(self.circuit.nodes)
        }
        roles[self.tn] = self._trusted_node
        return roles

    def _encryption_time(self, outcome: Mapping[str, object]) -> float:
        return outcome[self.tn]

    def _outbound(self, me: str, nxt: str) -> QkdKey:
        key = self._enc_key(me, nxt)
        # the destination learns its key_ID from TN_FINAL
        if nxt != self.circuit.destination:
            self.channel.send(Envelope(me, nxt, EnvelopeKind.KEY_ID, b"", key.key_id))
        return key

    def _member(self, pos: int) -> _Departure | _Arrival | None:
        me, prev, nxt = self._neighbours(pos)
        node = self.nodes[me]
        self._barrier(me)

        if prev is None:
            started = self._now(me)
            secret = node.rng.random_bytes(SECRET_SIZE)
            outbound = self._outbound(me, nxt)
            share = xor_otp(secret, outbound.key)
            self.channel.send(
                Envelope(me, self.tn, EnvelopeKind.TN_SHARE, share, outbound.key_id)
            )
            return _Departure(secret, started, None)

        if nxt is None:
            env = self._recv(me, EnvelopeKind.TN_FINAL)
            secret = xor_otp(env.payload, self._dec_key(me, prev, env).key)
            node.observe(secret)
            return _Arrival(secret, self._now(me))

        outbound = self._outbound(me, nxt)
        inbound = self._dec_key(me, prev, self._recv(me, EnvelopeKind.KEY_ID))
        share = xor_otp(inbound.key, outbound.key)
        node.observe(share)
        self.channel.send(Envelope(me, self.tn, EnvelopeKind.TN_SHARE, share, outbound.key_id))
        return None

    def _trusted_node(self) -> float:
        me = self.tn
        node = self.nodes[me]
        self._barrier(me)

        shares = [self._recv(me, EnvelopeKind.TN_SHARE) for _ in self.circuit.nodes[:-1]]
        start = time.perf_counter_ns()
        folded = bytes(SECRET_SIZE)
        for env in shares:
            if len(env.payload) != SECRET_SIZE:
                raise UnexpectedEnvelope(f"share from {env.sender} is {len(env.payload)} bytes")
            folded = xor_otp(folded, env.payload)
        encryption_us = _elapsed_us(start)
        self.channel.clock.charge(me, encryption_us)

        for env in shares:
            node.observe(env.payload)
        node.observe(folded)
        last_hop = self.circuit.nodes[-2]
        last_key_id = next(env.qkd_key_id for env in shares if env.sender == last_hop)
        self.channel.send(
            Envelope(me, self.circuit.destination, EnvelopeKind.TN_FINAL, folded, last_key_id)
        )
        return encryption_us


# ---------------------------------------------------------------------------
# Onion Routing Relay
# ---------------------------------------------------------------------------


class OnionRoutingRelayEngine(KeyDistributionEngine):
    """Layered PQC encryption, one layer peeled per hop, QKD on the links.

    With qkd_every_hop (default) every hop re-encrypts the peeled onion under
    the next link's QKD key; without it only the first hop is QKD-protected
    and later hops forward the peeled onion as is.
    """

    model = Model.ORR

    def __init__(
        self,
        circuit: Circuit,
        channel: Channel,
        kms: KmsClient,
        keys: SessionKeyTable | None = None,
        *,
        qkd_every_hop: bool = True,
        **kwargs,
    ) -> None:
        super().__init__(circuit, channel, kms, **kwargs)
        self.qkd_every_hop = qkd_every_hop
        self.keys = keys if keys is not None else self.negotiate()

    def negotiate(self) -> SessionKeyTable:
        self.keys = negotiate_session_keys(
            self.nodes[self.circuit.initiator],
            self.circuit,
            self.channel,
            self.nodes,
            runtime=self.runtime,
            timeout=self.recv_timeout,
        )
        return self.keys

    def roles(self) -> dict[str, Callable[[], object]]:
        roles: dict[str, Callable[[], object]] = {self.circuit.initiator: self._initiator}
        for pos in range(1, len(self.circuit)):
            roles[self.circuit.nodes[pos]] = partial(self._hop, pos)
        return roles

    def _initiator(self) -> _Departure:
        me, _, nxt = self._neighbours(0)
        node = self.nodes[me]
        self._barrier(me)

        started = self._now(me)
        secret = node.rng.random_bytes(SECRET_SIZE)
        key = self._enc_key(me, nxt)
        start = time.perf_counter_ns()
        onion = wrap_onion(secret, self.circuit, self.keys, node.rng)
        payload = sym_encrypt(key.key, onion.layers, node.rng).to_bytes()
        encryption_us = _elapsed_us(start)
        self.channel.clock.charge(me, encryption_us)

        self.channel.send(Envelope(me, nxt, EnvelopeKind.ONION_HOP, payload, key.key_id))
        return _Departure(secret, started, encryption_us)

    def _hop(self, pos: int) -> _Arrival | None:
        me, prev, nxt = self._neighbours(pos)
        node = self.nodes[me]
        if node.session_key is None:
            raise MissingKey(f"{me} holds no session key; negotiate first")
        self._barrier(me)

        env = self._recv(me, EnvelopeKind.ONION_HOP)
        if env.link_protected:
            onion = sym_decrypt(self._dec_key(me, prev, env).key, env.payload)
        else:
            onion = env.payload
        node.observe(onion)
        inner = peel_layer(onion, node.session_key)
        node.observe(inner)
        if nxt is None:
            if len(inner) != SECRET_SIZE:
                raise UnexpectedEnvelope(f"{me} peeled {len(inner)} bytes, expected a secret")
            return _Arrival(inner, self._now(me))

        if self.qkd_every_hop:
            key = self._enc_key(me, nxt)
            payload, key_id = sym_encrypt(key.key, inner, node.rng).to_bytes(), key.key_id
        else:
            payload, key_id = inner, None
        self.channel.send(Envelope(me, nxt, EnvelopeKind.ONION_HOP, payload, key_id))
        logger.debug("ORR %s peeled and forwarded %dB to %s", me, len(payload), nxt)
        return None


ENGINES: dict[Model, type[KeyDistributionEngine]] = {
    Model.KR: KeyRelayEngine,
    Model.TN: TrustedNodeEngine,
    Model.ORR: OnionRoutingRelayEngine,
}


# ---------------------------------------------------------------------------
# One-shot entry points
# ---------------------------------------------------------------------------


def run_kr(
    circuit: Circuit, channel: Channel, kms: KmsClient, *, seed: int | None = None
) -> DistributionResult:
    with KeyRelayEngine(circuit, channel, kms, seed=seed) as engine:
        return engine.run()


def run_tn(
    circuit: Circuit, tn: str, channel: Channel, kms: KmsClient, *, seed: int | None = None
) -> DistributionResult:
    with TrustedNodeEngine(circuit, tn, channel, kms, seed=seed) as engine:
        return engine.run()


def run_orr(
    circuit: Circuit,
    channel: Channel,
    kms: KmsClient,
    keys: SessionKeyTable,
    rng: RandomSource | None = None,
    *,
    nodes: Mapping[str, CircuitNode] | None = None,
    qkd_every_hop: bool = True,
) -> DistributionResult:
    """Distribute with already negotiated keys.

    Without `nodes`, each circuit node is taken to hold the key the table
    lists for it, which is the state a successful negotiation leaves behind.
    """
    if nodes is None:
        nodes = make_nodes(circuit.nodes, scope=Model.ORR.value)
        for node_id in circuit.nodes[1:]:
            nodes[node_id].session_key = keys.keys.get(node_id)
    if rng is not None:
        nodes[circuit.initiator].rng = rng
    with OnionRoutingRelayEngine(
        circuit, channel, kms, keys, nodes=nodes, qkd_every_hop=qkd_every_hop
    ) as engine:
        return engine.run()
