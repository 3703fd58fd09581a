"""Route and next-hop selection: HE, MECRT, MINHOP and an exhaustive oracle.

Route costs are the energy drawn from network nodes if the route were
executed now: a node-node hop charges both ends of the ADV/REQ/DATA
exchange, a hop into the BS charges the sender only. Costs are accumulated
from the BS end (``w0 + (w1 + (... + wk))``) so the search and the oracle
produce bit-identical totals for the same hop sequence.

Ties are broken by fewer hops, then by the lexicographically smallest id
sequence (the BS id, -1, only ever appears last).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .config import SimConfig
from .energy import RadioModel, hop_transaction_cost
from .network import BS, NeighborGraph, Node


class NoRoute(Exception):
    pass


class TooLarge(Exception):
    pass


BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class Route:
    hops: tuple[int, ...]
    predicted_network_j: float

    @property
    def hop_count(self) -> int:
        return len(self.hops) - 1


class EnergySnapshot:
    """Read-only view of residual energy and liveness, indexed by node id."""

    __slots__ = ("_nodes",)

    def __init__(self, nodes: list[Node]):
        self._nodes = nodes

    def __getitem__(self, node_id: int) -> float:
        return self._nodes[node_id].residual_j

    def __len__(self) -> int:
        return len(self._nodes)

    def alive(self, node_id: int) -> bool:
        return self._nodes[node_id].alive

    @classmethod
    def of(cls, residuals, alive=None) -> EnergySnapshot:
        """Detached snapshot from plain lists, mainly for tests."""
        if alive is None:
            alive = [r > 0 for r in residuals]
        return cls([Node(i, 0.0, 0.0, r, a) for i, (r, a) in enumerate(zip(residuals, alive))])


class EdgeCosts:
    """Cached hop weights for one geometry and radio setup."""

    def __init__(self, graph: NeighborGraph, config: SimConfig, model: RadioModel):
        geo = graph.geometry
        # (sender_j, receiver_j) per hop; the BS end never pays.
        self.bs_hop = [hop_transaction_cost(d, config, model) for d in geo.bs_dist]
        self.hop = [
            {v: hop_transaction_cost(geo.dist[u][v], config, model) for v in nbrs}
            for u, nbrs in enumerate(geo.in_range)
        ]
        self.bs = [s for s, _ in self.bs_hop]
        self.pair = [{v: s + r for v, (s, r) in row.items()} for row in self.hop]

    @classmethod
    def for_graph(cls, graph: NeighborGraph, config: SimConfig, model: RadioModel) -> EdgeCosts:
        geo = graph.geometry
        key = (config.control_packet_bits, config.data_packet_bits, model)
        cache = geo.__dict__.setdefault("_edge_costs", {})
        if key not in cache:
            cache[key] = cls(graph, config, model)
        return cache[key]

    def weight(self, u: int, v: int) -> float:
        return self.bs[u] if v == BS else self.pair[u][v]

    def path_cost(self, hops) -> float:
        total = 0.0
        for i in range(len(hops) - 2, -1, -1):
            total = self.weight(hops[i], hops[i + 1]) + total
        return total


def _check_source(graph: NeighborGraph, source: int) -> None:
    if not (0 <= source < graph.size and graph.alive[source]):
        raise NoRoute(f"source {source} is not an alive node")


def mecrt_tree(graph: NeighborGraph, config: SimConfig, model: RadioModel):
    """Minimum-energy routes from every alive node to the BS.

    Returns ``(cost, hops, parent)`` lists indexed by node id; dead nodes
    have ``parent is None``.
    """
    costs = EdgeCosts.for_graph(graph, config, model)
    n = graph.size
    inf = float("inf")
    cost = [inf] * n
    nhops = [0] * n
    parent: list[int | None] = [None] * n
    heap = []
    for u in graph.alive_ids():
        cost[u], nhops[u], parent[u] = costs.bs[u], 1, BS
        heap.append((cost[u], 1, u))
    heapq.heapify(heap)

    def path(v):
        out = []
        while v != BS:
            out.append(v)
            v = parent[v]
        return out

    done = [False] * n
    while heap:
        c, h, v = heapq.heappop(heap)
        if done[v] or c != cost[v] or h != nhops[v]:
            continue
        done[v] = True
        pair = costs.pair
        for u in graph.adjacency[v]:
            if done[u]:
                continue
            cand = pair[u][v] + c
            if cand < cost[u] or (cand == cost[u] and h + 1 < nhops[u]):
                cost[u], nhops[u], parent[u] = cand, h + 1, v
                heapq.heappush(heap, (cand, h + 1, u))
            elif cand == cost[u] and h + 1 == nhops[u] and path(v) < path(parent[u]):
                parent[u] = v
    return cost, nhops, parent


def route_from_tree(tree, source: int) -> Route:
    cost, _, parent = tree
    if parent[source] is None:
        raise NoRoute(f"source {source} is not an alive node")
    hops = [source]
    while hops[-1] != BS:
        hops.append(parent[hops[-1]])
    return Route(tuple(hops), cost[source])


def select_route_mecrt(graph: NeighborGraph, snapshot: EnergySnapshot | None, source: int,
                       config: SimConfig, model: RadioModel) -> Route:
    """Cheapest route to the BS in predicted network energy.

    Hop weights depend on distance only, so ``snapshot`` does not change the
    answer; it is accepted for interface symmetry with HE.
    """
    _check_source(graph, source)
    return route_from_tree(mecrt_tree(graph, config, model), source)


def select_next_hop_he(graph: NeighborGraph, snapshot: EnergySnapshot, current: int, visited) -> int:
    """Alive unvisited neighbor with the most residual energy, else the BS."""
    nodes = snapshot._nodes
    best, best_j = BS, -1.0
    for v in graph.adjacency[current]:
        node = nodes[v]
        if node.residual_j > best_j and node.alive and v not in visited:
            best, best_j = v, node.residual_j
    return best


def select_route_minhop(graph: NeighborGraph, source: int, config: SimConfig | None = None,
                        model: RadioModel | None = None) -> Route:
    # Every alive node may hop straight to the BS, so one hop is always minimal.
    _check_source(graph, source)
    hops = (source, BS)
    if config is None:
        return Route(hops, float("nan"))
    model = model or RadioModel.from_config(config)
    return Route(hops, EdgeCosts.for_graph(graph, config, model).path_cost(hops))


def brute_force_min_route(graph: NeighborGraph, snapshot: EnergySnapshot | None, source: int,
                          config: SimConfig, model: RadioModel) -> Route:
    """Enumerate every simple path to the BS and keep the cheapest."""
    if len(graph.alive_ids()) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"more than {BRUTE_FORCE_LIMIT} alive nodes")
    _check_source(graph, source)
    costs = EdgeCosts.for_graph(graph, config, model)
    best = None
    path = [source]
    on_path = {source}

    def walk(u):
        nonlocal best
        hops = tuple(path) + (BS,)
        key = (costs.path_cost(hops), len(hops), hops)
        if best is None or key < best:
            best = key
        for v in graph.adjacency[u]:
            if v not in on_path:
                path.append(v)
                on_path.add(v)
                walk(v)
                path.pop()
                on_path.discard(v)

    walk(source)
    return Route(best[2], best[0])
