import random
from fractions import Fraction

import pytest

import oracles as orc
from corepath import expander_oracle as xo
from corepath.graph_core import DynamicGraph, GraphView, UnknownEdge


def build(n, edges, q, phi):
    return xo.oracle_init(GraphView(DynamicGraph.from_edges(n, edges)), q, phi)


def verify_path(h, path, u, v):
    """Consecutive hops alive at the top, endpoints right, no repeats."""
    g = h.levels[h.q].graph
    assert path[0] == u and path[-1] == v
    assert len(set(path)) == len(path)
    for a, b in zip(path, path[1:]):
        assert g.has_edge(a, b)
    assert len(path) - 1 <= xo._len_cap(h.depth, h.q)


class TestLevelSizing:
    def test_exact_integer_roots(self):
        assert xo._x_count(120, 2, 2) == 11  # ceil(sqrt(120))
        assert xo._x_count(100, 2, 2) == 10
        assert xo._x_count(27, 2, 3) == 3    # float pow alone would give 4
        assert xo._x_count(27, 3, 3) == 9
        assert xo._x_count(96, 2, 2) == 10
        assert xo._x_count(5, 1, 2) == 1

    def test_length_cap_recurrence(self):
        assert xo._len_cap(10, 1) == 20
        assert xo._len_cap(10, 2) == 10 * (2 + 20)
        assert xo._len_cap(3, 3) == 3 * (2 + 3 * (2 + 6))


class TestSingleLevel:
    """q=1: one pruned expander plus one shortest-path tree."""

    def test_k8_all_pairs(self):
        h = build(8, orc.gen_complete(8), 1, Fraction(1, 4))
        assert h.levels[1].budget == 1  # floor(phi*28/10) == 0, floored up
        for u in range(8):
            for v in range(8):
                p = xo.oracle_query(h, u, v)
                if u == v:
                    assert p == []
                else:
                    verify_path(h, p, u, v)

    def test_delete_then_reroute(self):
        h = build(8, orc.gen_complete(8), 1, Fraction(1, 4))
        xo.oracle_delete(h, (0, 1))
        assert xo.oracle_pruned(h) == frozenset()
        p = xo.oracle_query(h, 0, 1)
        verify_path(h, p, 0, 1)
        assert len(p) == 3  # one intermediate hop now

    def test_budget_exhaustion_prunes_everything(self):
        h = build(8, orc.gen_complete(8), 1, Fraction(1, 4))
        xo.oracle_delete(h, (0, 1))
        with pytest.raises(xo.TopLevelBudgetExhausted):
            xo.oracle_delete(h, (2, 3))
        assert xo.oracle_pruned(h) == frozenset(range(8))
        with pytest.raises(xo.PrunedEndpoint):
            xo.oracle_query(h, 0, 7)
        with pytest.raises(xo.TopLevelBudgetExhausted):
            xo.oracle_delete(h, (4, 5))

    def test_dead_edge_rejected(self):
        h = build(8, orc.gen_complete(8), 1, Fraction(1, 4))
        xo.oracle_delete(h, (0, 1))
        with pytest.raises(UnknownEdge):
            xo.oracle_delete(h, (0, 1))

    def test_isolated_vertex_sits_outside(self):
        edges = orc.gen_complete(5)
        h = build(6, edges, 1, Fraction(1, 4))
        assert h.iso == frozenset({5})
        assert 5 in xo.oracle_pruned(h)
        with pytest.raises(xo.PrunedEndpoint):
            xo.oracle_query(h, 5, 0)
        xo.check_invariants(h)


class TestTwoLevelStructure:
    """Frozen facts about the deterministic build on K16 at phi=1/4."""

    def setup_method(self):
        self.h = build(16, orc.gen_complete(16), 2, Fraction(1, 4))

    def test_level_sizes(self):
        h = self.h
        # second-level sample: ceil(m^(1/2)) over m=120 edges
        assert len(h.levels[2].x_set) == 11
        assert h.levels[1].graph.n == 11
        assert h.levels[2].budget == 3   # floor(120/40)
        assert h.levels[1].budget == 1
        assert h.levels[1].graph.m == 19
        xo.check_invariants(h)

    def test_reverse_lists_mirror_embedding(self):
        h = self.h
        top = h.levels[2]
        # every guest path registers on the midpoint key of each hop
        want = {}
        for (av, bv), path in top.emb.items():
            for p, r in zip(path, path[1:]):
                x = p if p >= 16 else r
                want.setdefault(x, set()).add((av, bv))
        got = {k: set(v) for k, v in top.jlists.items()}
        assert got == want

    def test_all_pairs_queries(self):
        h = self.h
        for u in range(16):
            for v in range(u + 1, 16):
                verify_path(h, xo.oracle_query(h, u, v), u, v)

    def test_guest_load_histogram(self):
        from collections import Counter
        top = self.h.levels[2]
        counts = Counter(
            len(top.jlists.get(x, ())) for x in sorted(top.xid.values()))
        assert counts == {0: 109, 1: 1, 3: 3, 4: 7}

    def test_zero_guest_delete_stays_local(self):
        h = self.h
        before = len(h.events)
        xo.oracle_delete(h, (0, 12))  # midpoint carries no guest paths
        assert h.events[before:] == []
        assert h.levels[1].d == 0 and h.levels[2].d == 1
        assert xo.oracle_query(h, 0, 12) == [0, 7, 12]
        xo.check_invariants(h)

    def test_single_guest_delete_repairs_bottom(self):
        h = self.h
        # (0,11)'s midpoint hosts exactly one guest whose child vertex has
        # degree 1, so the cascade disconnects the bottom graph and the
        # span check forces a fresh embedding
        before = len(h.events)
        xo.oracle_delete(h, (0, 11))
        kinds = [(k, lvl) for k, lvl, _d in h.events[before:]]
        assert ("init", 2) in kinds
        assert ("stage", 1) not in kinds
        assert h.levels[1].d == 0
        for u, v in [(0, 11), (3, 14), (10, 2)]:
            verify_path(h, xo.oracle_query(h, u, v), u, v)
        xo.check_invariants(h)

    def test_busy_edge_delete_cascades_then_stages(self):
        h = self.h
        before = len(h.events)
        xo.oracle_delete(h, (0, 1))  # midpoint carries several guests
        kinds = [(k, lvl) for k, lvl, _d in h.events[before:]]
        assert ("stage", 1) in kinds
        assert ("init", 2) in kinds
        verify_path(h, xo.oracle_query(h, 0, 1), 0, 1)
        xo.check_invariants(h)

    def test_budget_then_death(self):
        h = self.h
        for e in [(0, 1), (0, 2), (0, 3)]:
            xo.oracle_delete(h, e)
        xo.check_invariants(h)
        verify_path(h, xo.oracle_query(h, 0, 15), 0, 15)
        with pytest.raises(xo.TopLevelBudgetExhausted):
            xo.oracle_delete(h, (4, 5))
        assert xo.oracle_pruned(h) == frozenset(range(16))

    def test_query_rejects_bad_vertices(self):
        h = self.h
        with pytest.raises(xo.PrunedEndpoint):
            xo.oracle_query(h, 0, 99)
        assert xo.oracle_query(h, 7, 7) == []


class TestRegularWorkload:
    """Decremental run on a 3-regular expander with caller-side rebuilds."""

    def test_ten_deletions_with_rebuilds(self):
        n = 64
        h = build(n, orc.gen_random_regular(n, 3, seed=7), 2, Fraction(1, 4))
        assert len(h.levels[2].x_set) == 10  # ceil(96^(1/2))
        rng = random.Random(42)
        rebuilds = 0
        pruned_before = xo.oracle_pruned(h)
        for _step in range(10):
            cur = h.levels[h.q].graph
            e = rng.choice([(u, v) for u, v, _l in cur.edge_list()])
            try:
                xo.oracle_delete(h, e)
                assert pruned_before <= xo.oracle_pruned(h)
            except xo.TopLevelBudgetExhausted:
                rebuilds += 1
                cur = h.levels[h.q].graph
                cur.delete_between(*e)
                h = xo.oracle_init(GraphView(cur), 2, Fraction(1, 4))
            pruned_before = xo.oracle_pruned(h)
            xo.check_invariants(h)
            cur = h.levels[h.q].graph
            live = [v for v in range(n) if v not in pruned_before]
            for _ in range(15):
                u, v = rng.choice(live), rng.choice(live)
                p = xo.oracle_query(h, u, v)
                if u == v:
                    assert p == []
                else:
                    verify_path(h, p, u, v)
        assert rebuilds == 3  # budget 2 per life at phi=1/4, m=96
        # one vertex lost all three edges over the run and sits outside
        assert len(xo.oracle_pruned(h)) == 1

    def test_stage_counts_grow_with_deletions(self):
        h = build(16, orc.gen_complete(16), 2, Fraction(1, 4))
        base = h.inits[2]
        assert base == 1
        for e in [(0, 1), (0, 2), (0, 3)]:
            xo.oracle_delete(h, e)
        assert h.inits[2] > base  # busy midpoints force re-embeddings
        assert h.inits[1] == h.inits[2]  # every rebuild reaches the bottom


class TestSparseRandom:
    def test_gnp_single_level_sweep(self):
        n = 14
        edges = orc.gen_gnp_connected(n, 0.5, seed=11)
        h = build(n, edges, 1, Fraction(1, 8))
        rng = random.Random(5)
        absorbed = 0
        while True:
            alive = [(u, v) for u, v, _l in h.levels[1].graph.edge_list()]
            if not alive:
                break
            try:
                xo.oracle_delete(h, rng.choice(alive))
                absorbed += 1
            except xo.TopLevelBudgetExhausted:
                break
            xo.check_invariants(h)
            live = sorted(set(range(n)) - xo.oracle_pruned(h))
            for u in live:
                p = xo.oracle_query(h, live[0], u)
                if u != live[0]:
                    verify_path(h, p, live[0], u)
        assert absorbed == h.levels[1].budget
