"""Node deployment, geometry and the range-limited neighbor graph."""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field

from .config import SimConfig

# Vertex id of the base station in routes and graphs.
BS = -1


def make_rng(seed: int) -> random.Random:
    """The single generator behind deployment and traffic.

    Python's MT19937 seeded with the 64-bit integer seed. Only ``random()`` is
    drawn from it, so streams are stable across Python versions and platforms.
    """
    return random.Random(seed)


@dataclass(slots=True)
class Node:
    id: int
    x_m: float
    y_m: float
    residual_j: float
    alive: bool = True

    @property
    def pos(self) -> tuple[float, float]:
        return (self.x_m, self.y_m)


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def deploy(config: SimConfig, rng: random.Random) -> list[Node]:
    """Place ``node_count`` nodes uniformly over the area, full battery each."""
    nodes = []
    for i in range(config.node_count):
        x = rng.random() * config.area_width_m
        y = rng.random() * config.area_height_m
        nodes.append(Node(i, x, y, config.initial_energy_j))
    return nodes


def place(positions, config: SimConfig) -> list[Node]:
    """Nodes at fixed positions, for hand-built scenarios."""
    return [Node(i, float(x), float(y), config.initial_energy_j) for i, (x, y) in enumerate(positions)]


@dataclass
class Geometry:
    """Distances for one set of positions; reused across graph rebuilds while nodes are static."""

    dist: list[list[float]]
    bs_dist: list[float]
    in_range: list[tuple[int, ...]]

    @classmethod
    def of(cls, nodes: list[Node], config: SimConfig) -> Geometry:
        pos = [n.pos for n in nodes]
        bs = (config.bs_x_m, config.bs_y_m)
        dist = [[distance(p, q) for q in pos] for p in pos]
        in_range = [
            tuple(v for v in range(len(pos)) if v != u and row[v] <= config.tx_range_m)
            for u, row in enumerate(dist)
        ]
        return cls(dist, [distance(p, bs) for p in pos], in_range)


@dataclass
class NeighborGraph:
    """Symmetric adjacency over alive nodes plus an implicit edge from every alive node to the BS."""

    alive: tuple[bool, ...]
    adjacency: tuple[tuple[int, ...], ...]
    geometry: Geometry = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.alive)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def dist(self, u: int, v: int) -> float:
        if v == BS:
            return self.geometry.bs_dist[u]
        if u == BS:
            return self.geometry.bs_dist[v]
        return self.geometry.dist[u][v]

    def alive_ids(self) -> list[int]:
        return [i for i, a in enumerate(self.alive) if a]

    def bs_edges(self) -> list[tuple[int, float]]:
        return [(i, self.geometry.bs_dist[i]) for i in self.alive_ids()]


def build_neighbor_graph(nodes: list[Node], config: SimConfig, geometry: Geometry | None = None) -> NeighborGraph:
    """Adjacency among alive nodes within ``tx_range_m``; pass ``geometry`` to skip distance work."""
    if geometry is None:
        geometry = Geometry.of(nodes, config)
    alive = tuple(n.alive for n in nodes)
    adjacency = tuple(
        tuple(v for v in geometry.in_range[u] if alive[v]) if alive[u] else ()
        for u in range(len(nodes))
    )
    return NeighborGraph(alive, adjacency, geometry)


def bs_reachable(graph: NeighborGraph, source: int) -> bool:
    """Any alive node reaches the BS: the final hop to the BS ignores range."""
    if not 0 <= source < graph.size:
        if graph.size == 0:
            return False
        raise KeyError(f"unknown node id {source}")
    return graph.alive[source]


def write_deployment_csv(nodes: list[Node], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y"])
        for n in nodes:
            w.writerow([n.id, repr(n.x_m), repr(n.y_m)])
