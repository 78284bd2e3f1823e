"""Per-node state and the thread pool that runs one context per node."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FuturesTimeout
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, TypeVar

from qkdn_orr.crypto import RandomSource, SymKey
from qkdn_orr.errors import ChannelTimeout, TrialFailed

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class CircuitNode:
    node_id: str
    rng: RandomSource
    session_key: SymKey | None = None
    transcript: list[bytes] = field(default_factory=list)

    def observe(self, plaintext: bytes) -> None:
        self.transcript.append(plaintext)


def make_nodes(
    ids: Iterable[str], seed: int | None = None, scope: str = ""
) -> dict[str, CircuitNode]:
    """One CircuitNode per id, each with its own random stream."""
    return {
        node_id: CircuitNode(node_id=node_id, rng=RandomSource.derive(seed, scope, node_id))
        for node_id in ids
    }


class NodeRuntime:
    """Runs one callable per node concurrently and gathers the results.

    The pool must have a worker per participant, otherwise barrier waits
    starve.
    """

    def __init__(self, workers: int, timeout: float = 5.0) -> None:
        self.workers = workers
        self.timeout = timeout
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="qkdn-node")

    def run(self, roles: Mapping[str, Callable[[], T]]) -> dict[str, T]:
        if len(roles) > self.workers:
            raise ValueError(f"{len(roles)} roles for {self.workers} workers")
        futures = {node: self._pool.submit(fn) for node, fn in roles.items()}
        results: dict[str, T] = {}
        failures: list[tuple[str, BaseException]] = []
        for node, fut in futures.items():
            try:
                results[node] = fut.result(timeout=self.timeout)
            except FuturesTimeout:
                failures.append((node, ChannelTimeout(f"{node} did not finish")))
            except Exception as e:
                failures.append((node, e))
        if failures:
            # timeouts are usually knock-on effects of the node that failed first
            failures.sort(key=lambda f: isinstance(f[1], ChannelTimeout))
            node, cause = failures[0]
            raise TrialFailed(node, cause) from cause
        return results

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    def __enter__(self) -> NodeRuntime:
        return self

    def __exit__(self, *exc) -> None:
        self.close()
