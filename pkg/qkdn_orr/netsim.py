"""In-process classical channel between node threads.

Every node owns a bounded FIFO mailbox. Sends never block the sender: the
envelope is queued at once, stamped with the time it becomes due, and the
receiver does not get it before then. Latency runs on a RealClock (wall
time, real sleeping) or on a VirtualClock (per-node counters, no sleeping).
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Protocol

from pydantic import BaseModel, ConfigDict, Field

from qkdn_orr.errors import Backpressure, ChannelDown, ChannelTimeout, UnknownRecipient

logger = logging.getLogger(__name__)

DEFAULT_CAPACITY = 1024
_POLL_S = 0.05


class Addressed(Protocol):
    sender: str
    recipient: str


class LatencyModel(str, Enum):
    ZERO = "zero"
    FIXED = "fixed"
    PER_HOP = "per_hop"


class ChannelConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    latency_model: LatencyModel = LatencyModel.ZERO
    latency_us: float = Field(default=0.0, ge=0.0)
    capacity: int = Field(default=DEFAULT_CAPACITY, ge=1)
    virtual_clock: bool = False

    @classmethod
    def fixed(cls, latency_us: float, **kwargs) -> ChannelConfig:
        model = LatencyModel.FIXED if latency_us > 0 else LatencyModel.ZERO
        return cls(latency_model=model, latency_us=latency_us, **kwargs)

    def delay_us(self, hops: int = 1) -> float:
        if self.latency_model is LatencyModel.ZERO:
            return 0.0
        if self.latency_model is LatencyModel.FIXED:
            return self.latency_us
        return self.latency_us * hops


# ---------------------------------------------------------------------------
# Clocks
# ---------------------------------------------------------------------------


class RealClock:
    """Monotonic wall clock shared by all nodes."""

    virtual = False

    def now_us(self, node: str) -> float:
        return time.perf_counter_ns() / 1_000

    def charge(self, node: str, elapsed_us: float) -> None:
        pass

    def wait_until(self, node: str, due_us: float) -> None:
        remaining = due_us - self.now_us(node)
        if remaining > 0:
            time.sleep(remaining / 1_000_000)


class VirtualClock:
    """Per-node virtual time in µs.

    Delivery moves the receiver forward to the envelope's due time and
    compute regions are added with charge(), so a run is reproducible for
    a given latency configuration.
    """

    virtual = True

    def __init__(self) -> None:
        self._now: dict[str, float] = {}
        self._lock = threading.Lock()

    def now_us(self, node: str) -> float:
        with self._lock:
            return self._now.get(node, 0.0)

    def charge(self, node: str, elapsed_us: float) -> None:
        with self._lock:
            self._now[node] = self._now.get(node, 0.0) + elapsed_us

    def wait_until(self, node: str, due_us: float) -> None:
        with self._lock:
            self._now[node] = max(self._now.get(node, 0.0), due_us)

    def reset(self) -> None:
        with self._lock:
            self._now.clear()


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SendReceipt:
    seq: int
    due_us: float


@dataclass
class Mailbox:
    owner: str
    queue: queue.Queue


class Channel:
    def __init__(
        self,
        config: ChannelConfig | None = None,
        hop_distance: Callable[[str, str], int] | None = None,
    ) -> None:
        self.config = config or ChannelConfig()
        self.clock: RealClock | VirtualClock = (
            VirtualClock() if self.config.virtual_clock else RealClock()
        )
        self.hop_distance = hop_distance or (lambda a, b: 1)
        self._mailboxes: dict[str, Mailbox] = {}
        self._barriers: dict[frozenset[str], threading.Barrier] = {}
        self._wiretap: list = []
        self._seq = 0
        self._lock = threading.Lock()
        self._closed = False

    # -- membership --

    def register(self, *nodes: str) -> None:
        with self._lock:
            for node in nodes:
                if node not in self._mailboxes:
                    self._mailboxes[node] = Mailbox(
                        owner=node, queue=queue.Queue(maxsize=self.config.capacity)
                    )

    def mailbox(self, node: str) -> Mailbox:
        try:
            return self._mailboxes[node]
        except KeyError:
            raise UnknownRecipient(f"no mailbox registered for {node}") from None

    def pending(self, node: str) -> int:
        return self.mailbox(node).queue.qsize()

    # -- traffic --

    def send(self, env: Addressed) -> SendReceipt:
        if self._closed:
            raise ChannelDown("channel is closed")
        box = self.mailbox(env.recipient)
        delay = self.config.delay_us(self.hop_distance(env.sender, env.recipient))
        due = self.clock.now_us(env.sender) + delay
        with self._lock:
            self._seq += 1
            seq = self._seq
            self._wiretap.append(env)
        try:
            box.queue.put_nowait((due, seq, env))
        except queue.Full:
            raise Backpressure(
                f"mailbox {env.recipient} is full ({self.config.capacity} envelopes)"
            ) from None
        return SendReceipt(seq=seq, due_us=due)

    def recv(self, node: str, timeout: float = 1.0) -> Addressed:
        box = self.mailbox(node)
        deadline = time.monotonic() + timeout
        while True:
            if self._closed:
                raise ChannelDown("channel is closed")
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ChannelTimeout(f"{node}: nothing received within {timeout:.3f}s")
            try:
                due, _, env = box.queue.get(timeout=min(remaining, _POLL_S))
            except queue.Empty:
                continue
            self.clock.wait_until(node, due)
            return env

    def barrier(self, node: str, participants: Iterable[str], timeout: float = 1.0) -> None:
        """Block until every participant reached the same barrier."""
        members = frozenset(participants)
        if node not in members:
            raise ValueError(f"{node} is not a barrier participant")
        for member in members:
            self.mailbox(member)
        with self._lock:
            barrier = self._barriers.get(members)
            if barrier is None:
                barrier = self._barriers[members] = threading.Barrier(len(members))
        try:
            barrier.wait(timeout=timeout)
        except threading.BrokenBarrierError:
            raise ChannelTimeout(
                f"{node}: barrier of {len(members)} not complete within {timeout:.3f}s"
            ) from None

    # -- observation and lifecycle --

    @property
    def wiretap(self) -> tuple:
        with self._lock:
            return tuple(self._wiretap)

    def clear_wiretap(self) -> None:
        with self._lock:
            self._wiretap.clear()

    def reset(self) -> None:
        """Drop queued envelopes and broken barriers after an aborted trial."""
        with self._lock:
            for box in self._mailboxes.values():
                while True:
                    try:
                        box.queue.get_nowait()
                    except queue.Empty:
                        break
            self._barriers.clear()
            self._wiretap.clear()
        if isinstance(self.clock, VirtualClock):
            self.clock.reset()

    def close(self) -> None:
        self._closed = True
