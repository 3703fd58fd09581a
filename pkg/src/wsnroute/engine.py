"""Round loop: traffic, delivery, death bookkeeping, termination and sweeps."""

from __future__ import annotations

import enum
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import ConfigError, SimConfig, Strategy, TrafficMode
from .energy import RadioModel
from .negotiation import DeliveryResult, TraceEvent, deliver
from .network import Geometry, NeighborGraph, Node, build_neighbor_graph, deploy, make_rng
from .strategies import EdgeCosts, EnergySnapshot, Route, mecrt_tree, route_from_tree, select_route_minhop


class Terminated(RuntimeError):
    pass


class TerminationReason(enum.Enum):
    NO_ALIVE_NODES = "NoAliveNodes"
    NO_SOURCE = "NoSource"
    MAX_ROUNDS = "MaxRounds"


@dataclass(slots=True)
class RoundMetrics:
    round: int
    source: int | None
    delivered: bool
    network_j_consumed: float
    total_residual_j: float
    alive_count: int
    cumulative_dead: int
    hops: int
    latency_s: float
    idle_j: float = 0.0


@dataclass
class SimResult:
    config: SimConfig
    rounds: list[RoundMetrics]
    lifetime_first_death: int
    lifetime_termination: int
    termination_reason: TerminationReason
    initial_total_j: float

    @property
    def final_residual_j(self) -> float:
        return self.rounds[-1].total_residual_j if self.rounds else self.initial_total_j

    @property
    def rounds_delivered(self) -> int:
        return sum(m.delivered for m in self.rounds)

    @property
    def total_consumed_j(self) -> float:
        return math.fsum(m.network_j_consumed + m.idle_j for m in self.rounds)


class SimState:
    """Mutable state of one run. ``round`` is the number of the next round to play."""

    def __init__(self, config: SimConfig, nodes: list[Node] | None = None, trace: list | None = None):
        self.config = config
        self.model = RadioModel.from_config(config)
        self.rng = make_rng(config.seed)
        self.nodes = deploy(config, self.rng) if nodes is None else nodes
        self.caches: list[set[int]] = [set() for _ in self.nodes]
        self.snapshot = EnergySnapshot(self.nodes)
        self.trace: list[TraceEvent] | None = trace
        self.round = 1
        self.alive_count = sum(n.alive for n in self.nodes)
        self.cumulative_dead = 0
        self.first_death: int | None = None
        self.terminated = False
        self.geometry = Geometry.of(self.nodes, config)
        self._costs = None
        self.refresh_graph()

    def on_death(self, node_id: int) -> None:
        self.alive_count -= 1

    def refresh_graph(self) -> None:
        self.graph = build_neighbor_graph(self.nodes, self.config, self.geometry)
        self._alive = [n for n in self.nodes if n.alive]
        self._tree = None

    def edge_costs(self) -> EdgeCosts:
        if self._costs is None:
            self._costs = EdgeCosts.for_graph(self.graph, self.config, self.model)
        return self._costs

    def alive_nodes(self) -> list[Node]:
        """Alive nodes as of the last graph refresh, ascending id."""
        return self._alive

    def move_nodes(self) -> None:
        step = self.config.mobility_step_m
        w, h = self.config.area_width_m, self.config.area_height_m
        for n in self.nodes:
            if n.alive:
                n.x_m = min(w, max(0.0, n.x_m + (2 * self.rng.random() - 1) * step))
                n.y_m = min(h, max(0.0, n.y_m + (2 * self.rng.random() - 1) * step))
        self.geometry = Geometry.of(self.nodes, self.config)
        self._costs = None
        self.refresh_graph()

    def route_for(self, source: int, strategy: Strategy) -> Route:
        if strategy is Strategy.MINHOP:
            return select_route_minhop(self.graph, source, self.config, self.model)
        if self._tree is None:
            self._tree = mecrt_tree(self.graph, self.config, self.model)
        return route_from_tree(self._tree, source)

    def total_residual_j(self) -> float:
        # Dead nodes hold exactly 0 J.
        return math.fsum(n.residual_j for n in self._alive)


def pick_source(state: SimState, config: SimConfig, rng) -> int | None:
    """Node generating this round's reading, or None for an idle round."""
    alive = state.alive_nodes()
    if config.traffic_mode is TrafficMode.RANDOM_SOURCE:
        if not alive:
            return None
        return alive[min(int(rng.random() * len(alive)), len(alive) - 1)].id
    px = rng.random() * config.area_width_m
    py = rng.random() * config.area_height_m
    best, best_d = None, config.sense_range_m
    hypot = math.hypot
    for n in alive:
        d = hypot(n.x_m - px, n.y_m - py)
        if d < best_d or (d == best_d and best is None):
            best, best_d = n.id, d
    return best


def step(state: SimState) -> RoundMetrics:
    if state.terminated:
        raise Terminated("simulation already terminated")
    config = state.config
    if config.mobility_step_m > 0:
        state.move_nodes()

    idle_j = 0.0
    died = []
    if config.idle_drain_j_per_round > 0:
        for n in state.nodes:
            if n.alive:
                take = min(config.idle_drain_j_per_round, n.residual_j)
                n.residual_j -= take
                idle_j += take
                if n.residual_j <= 0.0:
                    n.residual_j = 0.0
                    n.alive = False
                    died.append(n.id)
                    state.on_death(n.id)
        if died:
            state.refresh_graph()

    source = pick_source(state, config, state.rng)
    result = None
    if source is not None:
        result = deliver(state, source, config.strategy)
        died.extend(result.deaths_during)

    if died:
        state.cumulative_dead += len(died)
        if state.first_death is None:
            state.first_death = state.round
    metrics = _metrics(state, source, result, idle_j)
    state.round += 1
    return metrics


def _metrics(state: SimState, source, result: DeliveryResult | None, idle_j: float) -> RoundMetrics:
    alive = state.alive_count
    return RoundMetrics(
        round=state.round,
        source=source,
        delivered=bool(result and result.delivered),
        network_j_consumed=result.network_j_consumed if result else 0.0,
        total_residual_j=state.total_residual_j(),
        alive_count=alive,
        cumulative_dead=state.cumulative_dead,
        hops=result.hops if result else 0,
        latency_s=result.latency_s if result else 0.0,
        idle_j=idle_j,
    )


def run(config: SimConfig, nodes: list[Node] | None = None, trace: list | None = None) -> SimResult:
    """Play rounds until every node is dead or ``max_rounds`` is reached.

    ``nodes`` overrides random deployment (the RNG still starts from ``config.seed``).
    """
    config.validate()
    state = SimState(config, nodes, trace)
    initial = state.total_residual_j()
    rounds = []
    while True:
        if state.alive_count == 0:
            reason = TerminationReason.NO_ALIVE_NODES
            break
        if len(rounds) >= config.max_rounds:
            reason = TerminationReason.MAX_ROUNDS
            break
        rounds.append(step(state))
    state.terminated = True
    last = len(rounds)
    first = state.first_death if state.first_death is not None else last
    return SimResult(config, rounds, first, last, reason, initial)


# --- sweeps ---------------------------------------------------------------


@dataclass
class RunRow:
    n: int
    strategy: Strategy
    seed: int
    lifetime_first_death: int
    lifetime_termination: int
    rounds_delivered: int
    total_consumed_j: float
    final_residual_j: float
    final_dead: int
    # Sampled every ``checkpoint_every`` rounds, starting at round 0.
    residual_curve: list[float] = field(repr=False, default_factory=list)
    dead_curve: list[int] = field(repr=False, default_factory=list)


@dataclass
class AggregateRow:
    n: int
    strategy: Strategy
    runs: int
    mean_life_fd: float
    sd_life_fd: float
    mean_life_term: float
    sd_life_term: float
    checkpoints: list[int] = field(repr=False, default_factory=list)
    mean_residual: list[float] = field(repr=False, default_factory=list)
    mean_dead: list[float] = field(repr=False, default_factory=list)


@dataclass
class SweepTable:
    base: SimConfig
    seeds: list[int]
    checkpoint_every: int
    rows: list[RunRow]
    aggregates: list[AggregateRow]


def summarize(result: SimResult, checkpoint_every: int = 50) -> RunRow:
    cfg = result.config
    residual = [result.initial_total_j]
    dead = [0]
    for m in result.rounds[checkpoint_every - 1::checkpoint_every]:
        residual.append(m.total_residual_j)
        dead.append(m.cumulative_dead)
    final_dead = result.rounds[-1].cumulative_dead if result.rounds else 0
    return RunRow(
        cfg.node_count, cfg.strategy, cfg.seed,
        result.lifetime_first_death, result.lifetime_termination,
        result.rounds_delivered, result.total_consumed_j,
        result.final_residual_j, final_dead, residual, dead,
    )


def _run_one(args) -> RunRow:
    config, checkpoint_every = args
    return summarize(run(config), checkpoint_every)


def _padded(curve, length):
    return curve + [curve[-1]] * (length - len(curve))


def aggregate(rows: list[RunRow], checkpoint_every: int) -> list[AggregateRow]:
    groups: dict[tuple[int, Strategy], list[RunRow]] = {}
    for r in rows:
        groups.setdefault((r.n, r.strategy), []).append(r)
    out = []
    for (n, strategy), group in groups.items():
        fd = [r.lifetime_first_death for r in group]
        term = [r.lifetime_termination for r in group]
        length = max(len(r.residual_curve) for r in group)
        res = [_padded(r.residual_curve, length) for r in group]
        dead = [_padded(r.dead_curve, length) for r in group]
        out.append(AggregateRow(
            n, strategy, len(group),
            statistics.fmean(fd), statistics.pstdev(fd),
            statistics.fmean(term), statistics.pstdev(term),
            [i * checkpoint_every for i in range(length)],
            [math.fsum(col) / len(group) for col in zip(*res)],
            [sum(col) / len(group) for col in zip(*dead)],
        ))
    return out


def sweep(base: SimConfig, node_counts, strategies, seeds, checkpoint_every: int = 50,
          workers: int = 1) -> SweepTable:
    """Run every (node_count, strategy, seed) combination and aggregate per (N, strategy)."""
    node_counts, strategies, seeds = list(node_counts), list(strategies), list(seeds)
    if not (node_counts and strategies and seeds):
        raise ValueError("node_counts, strategies and seeds must be nonempty")
    jobs = []
    for n in node_counts:
        for s in strategies:
            for seed in seeds:
                try:
                    cfg = base.replace(node_count=n, strategy=s, seed=seed)
                except ConfigError as exc:
                    raise ConfigError(exc.key, f"n={n} strategy={s.value} seed={seed}: {exc}") from exc
                jobs.append((cfg, checkpoint_every))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(job) for job in jobs]
    return SweepTable(base, seeds, checkpoint_every, rows, aggregate(rows, checkpoint_every))
