"""SPP optimal-sequence programs against the exhaustive oracle."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from brdlab.fixtures import fig3_minpath_chain, fig4_minpath_exp, fig8_weighted_minpath
from brdlab.oracle import reachable_ne
from brdlab.rules import min_path
from brdlab.serde import verify_trace
from brdlab.sppdp import (
    SppEdge,
    SppError,
    SppInstance,
    SppPlayer,
    dp_proper_intervals,
    dp_single_source,
    from_network_game,
    is_proper_intervals,
    replay,
    resolved_segments,
)
from helpers import random_proper_instance, random_single_source_instance


def check_instance(inst, table):
    game, p0 = inst.to_game()
    reach = reachable_ne(game, p0, state_limit=400_000)
    best = reach.best()[1]
    trace = replay(inst, table)
    assert trace.terminal_is_ne
    assert table.optimum == best == game.social_cost(trace.terminal)
    verify_trace(game, trace)


class TestSingleSource:
    def test_symmetric_base_case(self):
        # one segment: the optimum is the cheapest first-mover resolution
        inst = SppInstance(
            ((SppEdge(1, F(6)), SppEdge(2, F(14))),),
            (SppPlayer(0, 1, (2,)), SppPlayer(0, 1, (2,))),
        )
        table = dp_single_source(inst)
        assert table.optimum == 6
        check_instance(inst, table)

    def test_frozen_when_nobody_can_move(self):
        # both players are content (14/2 = 7 beats 8): the chain keeps its
        # initial edge and the optimum is the frozen cost
        inst = SppInstance(
            ((SppEdge(1, F(8)), SppEdge(2, F(14))),),
            (SppPlayer(0, 1, (2,)), SppPlayer(0, 1, (2,))),
        )
        table = dp_single_source(inst)
        assert table.optimum == 14
        assert table.skeleton == ()
        check_instance(inst, table)

    def test_chain_fixture(self):
        fx = fig3_minpath_chain()
        inst = from_network_game(fx.game, fx.initial)
        table = dp_single_source(inst)
        assert table.optimum == fx.expected["best_sc"]
        check_instance(inst, table)

    def test_random_equivalence(self):
        rng = random.Random(47)
        for _ in range(120):
            inst = random_single_source_instance(rng, tie_heavy=rng.random() < 0.4)
            check_instance(inst, dp_single_source(inst))

    def test_rejects_other_sources(self):
        inst = SppInstance(
            ((SppEdge(1, F(1)),), (SppEdge(2, F(1)),)),
            (SppPlayer(0, 2, (1, 2)), SppPlayer(1, 2, (2,))),
        )
        with pytest.raises(SppError):
            dp_single_source(inst)


class TestProperIntervals:
    @staticmethod
    def _make(ivals):
        segments = tuple((SppEdge(j, F(1)),) for j in range(1, 4))
        return SppInstance(
            segments,
            tuple(SppPlayer(s, t, tuple(range(s + 1, t + 1))) for s, t in ivals),
        )

    def test_definition(self):
        assert is_proper_intervals(self._make([(0, 3), (0, 1), (1, 3), (2, 3)]))
        # an earlier source paired with a strictly later target crosses
        assert not is_proper_intervals(self._make([(0, 3), (1, 2), (2, 3)]))

    def test_single_source_is_proper(self):
        rng = random.Random(49)
        for _ in range(20):
            inst = random_single_source_instance(rng)
            assert is_proper_intervals(inst)

    def test_chain_fixture_multi_target_is_proper(self):
        fx = fig3_minpath_chain()
        inst = from_network_game(fx.game, fx.initial)
        assert is_proper_intervals(inst)
        table = dp_proper_intervals(inst)
        assert table.optimum == fx.expected["best_sc"]

    def test_doubling_fixture_is_not_proper_at_three_segments(self):
        fx = fig4_minpath_exp(m=3)
        inst = from_network_game(fx.game, fx.initial)
        # the full-span pack strictly contains the middle per-segment
        # interval, so the proper-interval program refuses it
        assert not is_proper_intervals(inst)
        with pytest.raises(SppError):
            dp_proper_intervals(inst)

    def test_doubling_fixture_proper_at_two_segments(self):
        fx = fig4_minpath_exp(m=2)
        inst = from_network_game(fx.game, fx.initial)
        assert is_proper_intervals(inst)
        table = dp_proper_intervals(inst)
        assert table.optimum == fx.expected["best_sc"]
        check_instance(inst, table)

    def test_random_equivalence(self):
        rng = random.Random(53)
        for _ in range(120):
            inst = random_proper_instance(rng, tie_heavy=rng.random() < 0.4)
            check_instance(inst, dp_proper_intervals(inst))

    def test_agrees_with_single_source_program(self):
        rng = random.Random(59)
        for _ in range(60):
            inst = random_single_source_instance(rng)
            assert dp_proper_intervals(inst).optimum == dp_single_source(inst).optimum

    def test_rejects_improper(self):
        inst = SppInstance(
            ((SppEdge(1, F(1)),), (SppEdge(2, F(1)),), (SppEdge(3, F(1)),)),
            (SppPlayer(0, 3, (1, 2, 3)), SppPlayer(1, 2, (2,))),
        )
        # interval (1,2] sits strictly inside (0,3] with a later source
        assert not is_proper_intervals(inst)
        with pytest.raises(SppError):
            dp_proper_intervals(inst)


class TestFromNetworkGame:
    def test_weighted_rejected(self):
        fx = fig8_weighted_minpath()
        with pytest.raises(SppError):
            from_network_game(fx.game, fx.initial)

    def test_non_chain_rejected(self):
        from brdlab.networks import Edge, Network, NetworkFormationGame, PlayerSpec

        edges = (
            Edge(1, 0, 1, F(1)), Edge(2, 0, 2, F(1)),
            Edge(3, 1, 3, F(1)), Edge(4, 2, 3, F(1)),
        )
        net = Network(edges, source=0, sink=3)
        game = NetworkFormationGame(net, [PlayerSpec(0, 3)])
        p0 = game.profile_from_strategies([(1, 3)])
        with pytest.raises(SppError):
            from_network_game(game, p0)


class TestResolvedSegments:
    def test_agreed_initial_segments(self):
        # single edge per segment: everything is resolved from the start
        inst = SppInstance(
            ((SppEdge(1, F(2)),), (SppEdge(2, F(3)),)),
            (SppPlayer(0, 2, (1, 2)),),
        )
        resolved = resolved_segments(inst)
        assert resolved.edges == {1: 1, 2: 2}

    def test_chain_first_move_resolves_first_segment(self):
        fx = fig3_minpath_chain()
        inst = from_network_game(fx.game, fx.initial)
        from brdlab.engine import run_brd

        trace = run_brd(fx.game, fx.initial, min_path())
        first = trace.moves[0]
        resolved = resolved_segments(inst, [(first.player, first.new_strategy)])
        assert resolved.edges[1] == first.new_strategy[0] == 1  # the upper edge

    def test_monotone_and_final_along_traces(self):
        rng = random.Random(61)
        from brdlab.engine import LowestIdRule, run_brd

        for _ in range(25):
            inst = random_single_source_instance(rng)
            game, p0 = inst.to_game()
            trace = run_brd(game, p0, LowestIdRule())
            prefix = []
            prior = resolved_segments(inst, prefix).edges
            for m in trace.moves:
                prefix.append((m.player, m.new_strategy))
                now = resolved_segments(inst, prefix).edges
                # resolution only grows, and a resolved edge is final: later
                # deviators through the segment flock to the same edge
                assert set(prior) <= set(now)
                for seg, edge in prior.items():
                    assert now[seg] == edge
                prior = now


class TestMinPathResolutionBound:
    def test_each_min_path_move_resolves_at_most_optimum(self):
        # along min-path runs on single-source instances, the freshly
        # resolved segment cost per move never exceeds the optimum
        rng = random.Random(67)
        from brdlab.engine import run_brd

        checked = 0
        for _ in range(30):
            inst = random_single_source_instance(rng)
            table = dp_single_source(inst)
            game, p0 = inst.to_game()
            trace = run_brd(game, p0, min_path())
            prefix = []
            prior = set(resolved_segments(inst, prefix).edges)
            edge_cost = {e.id: e.cost for block in inst.segments for e in block}
            for m in trace.moves:
                prefix.append((m.player, m.new_strategy))
                now = resolved_segments(inst, prefix).edges
                fresh = {seg: e for seg, e in now.items() if seg not in prior}
                fresh_cost = sum((edge_cost[e] for e in fresh.values()), F(0))
                assert fresh_cost <= table.optimum
                prior = set(now)
                checked += 1
        assert checked > 20
