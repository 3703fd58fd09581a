import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_state
from wsnroute.config import ConfigError, SimConfig, Strategy, TrafficMode
from wsnroute.engine import (
    SimState, Terminated, TerminationReason, pick_source, run, step, summarize, sweep,
)
from wsnroute.network import build_neighbor_graph, place


class FixedRng:
    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def single_node_rounds():
    """Deliveries a lone node at (25,50) survives, from exact arithmetic."""
    e, eps = Fraction("50e-9"), Fraction("100e-12")
    per_round = (e * 248 + eps * 248 * 100**2) + e * 248 + (e * 2000 + eps * 2000 * 100**2)
    return per_round, math.ceil(Fraction("0.5") / per_round)


def test_single_node_oracle_value():
    per_round, rounds = single_node_rounds()
    assert float(per_round) == pytest.approx(2.3728e-3, rel=1e-12)
    assert rounds == 211


def test_pick_source_event_point():
    state = make_state([(12, 10), (40, 40)])
    assert pick_source(state, state.config, FixedRng(0.2, 0.2)) == 0
    # 8 m sense range: (30,30) is ~14 m from both nodes
    assert pick_source(state, state.config, FixedRng(0.6, 0.6)) is None


def test_pick_source_tie_and_boundary():
    state = make_state([(18, 10), (2, 10)])
    assert pick_source(state, state.config, FixedRng(0.2, 0.2)) == 0
    state = make_state([(18, 10)])
    assert pick_source(state, state.config, FixedRng(0.2, 0.2)) == 0


def test_pick_source_random_mode():
    state = make_state([(5, 5), (30, 30)], traffic_mode=TrafficMode.RANDOM_SOURCE)
    state.nodes[1].alive, state.nodes[1].residual_j = False, 0.0
    state.refresh_graph()
    for v in (0.0, 0.5, 0.999):
        assert pick_source(state, state.config, FixedRng(v)) == 0


def test_idle_round_consumes_nothing():
    state = make_state([(1, 1)])
    state.rng = FixedRng(0.9, 0.9)
    m = step(state)
    assert m.source is None and not m.delivered
    assert m.network_j_consumed == 0.0 and m.total_residual_j == 0.5


@pytest.mark.parametrize("mode", list(TrafficMode))
@pytest.mark.parametrize("strategy", list(Strategy))
def test_single_node_lifetime(mode, strategy):
    cfg = SimConfig(node_count=1, strategy=strategy, traffic_mode=mode, sense_range_m=15.0)
    result = run(cfg, place([(25, 50)], cfg))
    delivered = [m for m in result.rounds if m.delivered]
    assert len(delivered) == single_node_rounds()[1] == 211
    assert result.termination_reason is TerminationReason.NO_ALIVE_NODES
    for m in delivered[:-1]:
        assert m.network_j_consumed == pytest.approx(2.3728e-3, abs=1e-7)
    if mode is TrafficMode.RANDOM_SOURCE:
        assert result.lifetime_termination == 211
        assert result.lifetime_first_death == 211


def test_max_rounds_zero():
    result = run(SimConfig(max_rounds=0))
    assert result.rounds == []
    assert result.termination_reason is TerminationReason.MAX_ROUNDS
    assert result.lifetime_termination == 0


def test_max_rounds_cap():
    result = run(SimConfig(max_rounds=25, seed=4))
    assert len(result.rounds) == 25
    assert result.termination_reason is TerminationReason.MAX_ROUNDS
    assert [m.round for m in result.rounds] == list(range(1, 26))
    assert result.lifetime_first_death <= result.lifetime_termination


def test_step_after_termination():
    state = SimState(SimConfig(node_count=1))
    state.terminated = True
    with pytest.raises(Terminated):
        step(state)


def test_relay_death_updates_graph():
    state = make_state([(25, 46), (25, 60)], traffic_mode=TrafficMode.RANDOM_SOURCE)
    state.nodes[1].residual_j = 2e-4
    state.rng = FixedRng(0.0)
    m = step(state)
    assert m.cumulative_dead == 1 and m.alive_count == 1
    assert state.graph.neighbors(0) == ()
    assert state.first_death == 1


def test_run_rejects_invalid_config():
    with pytest.raises(ConfigError) as info:
        run(SimConfig().replace(tx_range_m=-3))
    assert info.value.key == "tx_range_m"


def test_determinism():
    a = run(SimConfig(seed=9, node_count=20))
    b = run(SimConfig(seed=9, node_count=20))
    assert a.rounds == b.rounds


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.sampled_from(list(Strategy)), st.sampled_from(list(TrafficMode)),
       st.integers(0, 2**64 - 1), st.sampled_from([0.0, 1e-4]))
def test_run_invariants(n, strategy, mode, seed, drain):
    cfg = SimConfig(node_count=n, strategy=strategy, traffic_mode=mode, seed=seed,
                    initial_energy_j=0.02, idle_drain_j_per_round=drain)
    result = run(cfg)
    prev_res, prev_dead = result.initial_total_j, 0
    for m in result.rounds:
        assert m.total_residual_j <= prev_res
        assert m.cumulative_dead >= prev_dead
        assert m.alive_count + m.cumulative_dead == n
        prev_res, prev_dead = m.total_residual_j, m.cumulative_dead
    assert result.initial_total_j - result.final_residual_j == pytest.approx(result.total_consumed_j, abs=1e-9)
    assert result.lifetime_first_death <= result.lifetime_termination


def test_mobility_moves_nodes_within_area():
    cfg = SimConfig(node_count=10, mobility_step_m=2.0, max_rounds=30, seed=1)
    state = SimState(cfg)
    start = [n.pos for n in state.nodes]
    for _ in range(30):
        step(state)
    assert [n.pos for n in state.nodes] != start
    for n in state.nodes:
        assert 0 <= n.x_m <= 50 and 0 <= n.y_m <= 50
    assert state.graph.adjacency == build_neighbor_graph(state.nodes, cfg).adjacency
    assert run(cfg).rounds == run(cfg).rounds


def test_sweep_degenerate_equals_run():
    cfg = SimConfig(node_count=15)
    table = sweep(cfg, [15], [Strategy.MECRT], [3])
    row = summarize(run(cfg.replace(seed=3)))
    assert table.rows == [row]
    agg = table.aggregates[0]
    assert agg.sd_life_fd == 0 and agg.sd_life_term == 0
    assert agg.mean_life_term == row.lifetime_termination


def test_sweep_duplicate_seeds_and_order():
    table = sweep(SimConfig(), [8, 12], [Strategy.HE, Strategy.MECRT], [5, 5])
    assert [(r.n, r.strategy, r.seed) for r in table.rows] == [
        (8, Strategy.HE, 5), (8, Strategy.HE, 5), (8, Strategy.MECRT, 5), (8, Strategy.MECRT, 5),
        (12, Strategy.HE, 5), (12, Strategy.HE, 5), (12, Strategy.MECRT, 5), (12, Strategy.MECRT, 5)]
    assert table.rows[0] == table.rows[1]
    assert len(table.aggregates) == 4


def test_sweep_errors():
    with pytest.raises(ValueError):
        sweep(SimConfig(), [], [Strategy.HE], [1])
    with pytest.raises(ConfigError) as info:
        sweep(SimConfig(), [0], [Strategy.HE], [1])
    assert "n=0" in str(info.value)


def test_sweep_parallel_matches_serial():
    args = (SimConfig(), [10], [Strategy.HE, Strategy.MECRT], [1, 2])
    assert sweep(*args).rows == sweep(*args, workers=2).rows
