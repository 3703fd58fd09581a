"""Per-hop ADV/REQ/DATA negotiation and packet delivery toward the BS."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .config import Strategy
from .energy import adv_leg_cost, hop_latency_s, hop_transaction_cost, rx_cost, tx_cost
from .network import BS
from .strategies import NoRoute, select_next_hop_he

if TYPE_CHECKING:
    from .engine import SimState


class PacketKind(enum.Enum):
    ADV = "ADV"
    REQ = "REQ"
    DATA = "DATA"


class FailureReason(enum.Enum):
    SENDER_DIED = "SenderDied"
    DUPLICATE = "Duplicate"
    STUCK = "Stuck"


class SenderDied(RuntimeError):
    """A dead node was asked to transmit."""


@dataclass
class Packet:
    kind: PacketKind
    size_bits: int
    data_id: int
    visited: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class TraceEvent:
    round: int
    hop_index: int
    kind: PacketKind
    sender: int
    receiver: int
    joules: float


@dataclass
class HopOutcome:
    fresh: bool
    sender_j: float
    receiver_j: float
    deaths: list[int]


@dataclass
class DeliveryResult:
    delivered: bool
    path_taken: list[int]
    network_j_consumed: float
    hops: int
    latency_s: float
    deaths_during: list[int]
    failure_reason: FailureReason | None = None


def _drain(node, amount: float) -> float:
    """Deduct up to ``amount``, clamping at 0; return what was actually taken."""
    taken = amount if amount < node.residual_j else node.residual_j
    node.residual_j -= taken
    return taken


def _emit(state, hop_index, sender, receiver, d, fresh):
    cfg, model = state.config, state.model
    ctrl, data = cfg.control_packet_bits, cfg.data_packet_bits
    to_bs = receiver == BS
    adv = tx_cost(ctrl, d, model) + (0.0 if to_bs else rx_cost(ctrl, model))
    events = [TraceEvent(state.round, hop_index, PacketKind.ADV, sender, receiver, adv)]
    if fresh:
        req = rx_cost(ctrl, model) + (0.0 if to_bs else tx_cost(ctrl, d, model))
        dat = tx_cost(data, d, model) + (0.0 if to_bs else rx_cost(data, model))
        events.append(TraceEvent(state.round, hop_index, PacketKind.REQ, receiver, sender, req))
        events.append(TraceEvent(state.round, hop_index, PacketKind.DATA, sender, receiver, dat))
    state.trace.extend(events)


def execute_hop(sender: int, receiver: int, packet: Packet, state: SimState, hop_index: int = 0) -> HopOutcome:
    """Run one ADV/REQ/DATA exchange from ``sender`` to ``receiver`` (node id or BS).

    A receiver that already holds ``packet.data_id`` ignores the ADV, so only
    the ADV leg is paid. Nodes overdrawing during the hop finish it, are
    clamped to 0 and then marked dead.
    """
    nodes = state.nodes
    snode = nodes[sender]
    if not snode.alive:
        raise SenderDied(f"node {sender} is dead")
    d = state.graph.dist(sender, receiver)
    rnode = None if receiver == BS else nodes[receiver]
    fresh = rnode is None or packet.data_id not in state.caches[receiver]
    if fresh:
        costs = state.edge_costs()
        if rnode is None:
            s_cost, r_cost = costs.bs_hop[sender]
        elif receiver in costs.hop[sender]:
            s_cost, r_cost = costs.hop[sender][receiver]
        else:
            s_cost, r_cost = hop_transaction_cost(d, state.config, state.model)
    else:
        s_cost, r_cost = adv_leg_cost(d, state.config, state.model)

    s_taken = _drain(snode, s_cost)
    r_taken = 0.0
    if rnode is not None:
        r_taken = _drain(rnode, r_cost)
        if fresh:
            state.caches[receiver].add(packet.data_id)
    if fresh:
        packet.visited.append(receiver)
    if state.trace is not None:
        _emit(state, hop_index, sender, receiver, d, fresh)

    deaths = []
    for node in (snode, rnode):
        if node is not None and node.alive and node.residual_j <= 0.0:
            node.residual_j = 0.0
            node.alive = False
            deaths.append(node.id)
            state.on_death(node.id)
    return HopOutcome(fresh, s_taken, r_taken, deaths)


def deliver(state: SimState, source: int, strategy: Strategy | None = None) -> DeliveryResult:
    """Forward one fresh reading from ``source`` to the BS hop by hop."""
    strategy = strategy or state.config.strategy
    if not (0 <= source < len(state.nodes) and state.nodes[source].alive):
        raise NoRoute(f"source {source} is not alive")
    data_id = state.round
    state.caches[source].add(data_id)
    packet = Packet(PacketKind.DATA, state.config.data_packet_bits, data_id, [source])
    max_hops = state.alive_count
    consumed = 0.0
    deaths: list[int] = []
    hops = 0
    current = source
    reason = None
    route = None if strategy is Strategy.HE else list(state.route_for(source, strategy).hops)
    on_path = {source}
    tried: set[int] = set()

    while True:
        if hops >= max_hops + 1:
            reason = FailureReason.STUCK
            break
        if strategy is Strategy.HE:
            excluded = on_path | tried if tried else on_path
            nxt = select_next_hop_he(state.graph, state.snapshot, current, excluded)
        else:
            nxt = route[1]
            if nxt != BS and not state.nodes[nxt].alive:
                route = list(state.route_for(current, strategy).hops)
                nxt = route[1]
        out = execute_hop(current, nxt, packet, state, hops)
        consumed += out.sender_j + out.receiver_j
        if out.deaths:
            deaths.extend(out.deaths)
            state.refresh_graph()
        if not out.fresh:
            if strategy is Strategy.HE:
                tried.add(nxt)
                continue
            reason = FailureReason.DUPLICATE
            break
        hops += 1
        on_path.add(nxt)
        tried.clear()
        if nxt == BS:
            break
        if not state.nodes[nxt].alive:
            # The relay spent its last energy receiving and cannot forward.
            reason = FailureReason.SENDER_DIED
            break
        current = nxt
        if route is not None:
            route.pop(0)

    return DeliveryResult(
        delivered=reason is None,
        path_taken=list(packet.visited),
        network_j_consumed=consumed,
        hops=hops,
        latency_s=hops * hop_latency_s(state.config),
        deaths_during=deaths,
        failure_reason=reason,
    )
