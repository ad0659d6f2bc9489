import random

import pytest

from conftest import chain_topology, star_topology
from rplsim.errors import NoParentAvailable, UnreachableNode
from rplsim.rpl import (
    RoutingState,
    apply_blacklist_broadcast,
    assign_initial_ranks,
    select_parent,
)
from rplsim.scenario import ScenarioConfig
from rplsim.topology import Topology, generate_topology


class TestAssignInitialRanks:
    def test_single_hop(self):
        topo = chain_topology(2)
        assert assign_initial_ranks(topo) == [0, 1]

    def test_chain_matches_hop_count(self):
        # Line of five: the fourth node sits three hops out, its child four.
        topo = chain_topology(5)
        ranks = assign_initial_ranks(topo)
        assert ranks[3] == 3
        assert ranks[4] == 4

    def test_star_all_leaves_rank_one(self):
        topo = star_topology(7)
        assert assign_initial_ranks(topo) == [0] + [1] * 7

    def test_disconnected_raises(self):
        topo = Topology.from_edges(4, [(0, 1), (2, 3)], root_id=0)
        with pytest.raises(UnreachableNode):
            assign_initial_ranks(topo)

    def test_bfs_neighbor_property_on_random_topologies(self):
        # Adjacent nodes never differ by more than one hop in rank.
        for seed in (1, 2, 3):
            topo = generate_topology(ScenarioConfig(node_count=60, seed=seed))
            ranks = assign_initial_ranks(topo)
            for u in range(topo.node_count):
                for v in topo.adjacency[u]:
                    assert abs(ranks[u] - ranks[v]) <= 1


class TestSelectParent:
    def test_min_rank_tie_breaks_to_lowest_id(self):
        state = RoutingState(node_id=9, my_rank=3)
        parent = select_parent(state, {30: 2, 20: 2, 40: 3})
        assert parent == 20
        assert state.parent_id == 20
        assert state.my_rank == 3
        assert state.dv_rank == 1

    def test_blacklisted_candidates_skipped(self):
        state = RoutingState(node_id=9, my_rank=3, blacklist={5})
        assert select_parent(state, {5: 0, 7: 2}) == 7

    def test_single_candidate_sets_dv_rank(self):
        # Node of rank 4 selecting a rank-3 parent stores a gap of one.
        state = RoutingState(node_id=9, my_rank=4)
        assert select_parent(state, {8: 3}) == 8
        assert state.dv_rank == 1

    def test_incumbent_parent_wins_ties(self):
        # A forged rank equal to the incumbent's must not steal the node.
        state = RoutingState(node_id=9, my_rank=1, parent_id=50)
        assert select_parent(state, {50: 0, 3: 0}) == 50
        # Strictly better candidates still win.
        state = RoutingState(node_id=9, my_rank=2, parent_id=50)
        assert select_parent(state, {50: 1, 3: 0}) == 3

    def test_loop_guard_excludes_descendants(self):
        state = RoutingState(node_id=9, my_rank=3)
        assert select_parent(state, {4: 1, 6: 2}, loop_guard=lambda c: c != 4) == 6

    def test_no_candidates_raises(self):
        state = RoutingState(node_id=9, my_rank=3, blacklist={1})
        with pytest.raises(NoParentAvailable):
            select_parent(state, {1: 2})

    def test_rank_refreshes_from_parent(self):
        state = RoutingState(node_id=9, my_rank=6)
        select_parent(state, {2: 2})
        assert state.my_rank == 3


class TestApplyBlacklistBroadcast:
    def test_merges_suspects(self):
        state = RoutingState(node_id=3, my_rank=2, parent_id=1)
        table = {1: 1, 5: 2}
        assert apply_blacklist_broadcast(state, {8}, table) is True
        assert state.blacklist == {8}
        assert state.parent_id == 1

    def test_reparents_when_parent_is_suspect(self):
        state = RoutingState(node_id=3, my_rank=2, parent_id=1, dv_rank=1)
        table = {1: 1, 5: 1, 6: 2}
        apply_blacklist_broadcast(state, {1}, table)
        assert state.parent_id == 5
        assert 1 not in table
        assert state.my_rank == 2

    def test_idempotent(self):
        state = RoutingState(node_id=3, my_rank=2, parent_id=5, blacklist={8})
        table = {5: 1}
        assert apply_blacklist_broadcast(state, {8}, table) is False
        assert state.blacklist == {8}

    def test_orphan_when_no_candidate_remains(self):
        state = RoutingState(node_id=3, my_rank=2, parent_id=1)
        table = {1: 1}
        apply_blacklist_broadcast(state, {1}, table)
        assert state.parent_id is None
        assert state.dv_rank is None

    def test_blacklist_never_shrinks(self):
        state = RoutingState(node_id=3, my_rank=2, parent_id=5)
        table = {5: 1, 6: 1, 7: 2}
        seen = set()
        rng = random.Random(1)
        for _ in range(50):
            suspect = rng.choice([8, 9, 10, 11])
            seen.add(suspect)
            apply_blacklist_broadcast(state, {suspect}, table)
            assert state.blacklist == seen
