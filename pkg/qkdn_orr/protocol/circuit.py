"""Circuit construction over the QKD network topology."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from qkdn_orr.errors import NoPath

Topology = Mapping[str, Sequence[str]]


@dataclass(frozen=True)
class Circuit:
    """Ordered path [N_i, N_int,1 .. N_int,N, N_d]; the destination is included."""

    nodes: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) < 2:
            raise ValueError("a circuit needs at least an initiator and a destination")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"circuit repeats a node: {self.nodes}")

    @property
    def links(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.nodes, self.nodes[1:]))

    @property
    def initiator(self) -> str:
        return self.nodes[0]

    @property
    def destination(self) -> str:
        return self.nodes[-1]

    @property
    def intermediates(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    def position(self, node: str) -> int:
        return self.nodes.index(node)

    def __len__(self) -> int:
        return len(self.nodes)


def line_topology(ids: Sequence[str]) -> dict[str, list[str]]:
    topo: dict[str, list[str]] = {node: [] for node in ids}
    for a, b in zip(ids, ids[1:]):
        topo[a].append(b)
        topo[b].append(a)
    return topo


def build_circuit(topology: Topology, src: str, dst: str) -> Circuit:
    """Fewest-hop path from src to dst.

    Breadth-first search expanding neighbours in sorted order; among paths of
    equal length the one whose node sequence sorts first wins.
    """
    if src == dst:
        raise ValueError("source and destination must differ")
    for node in (src, dst):
        if node not in topology:
            raise NoPath(f"{node} is not in the topology")

    parent: dict[str, str | None] = {src: None}
    frontier = deque([src])
    while frontier:
        node = frontier.popleft()
        if node == dst:
            break
        for nxt in sorted(topology[node]):
            if nxt not in parent:
                parent[nxt] = node
                frontier.append(nxt)
    if dst not in parent:
        raise NoPath(f"no path from {src} to {dst}")

    path = [dst]
    while (prev := parent[path[-1]]) is not None:
        path.append(prev)
    return Circuit(nodes=tuple(reversed(path)))
