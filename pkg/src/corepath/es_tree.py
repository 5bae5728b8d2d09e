"""Bounded-depth shortest-path tree under edge deletions.

Levels equal true distances from the source up to a depth cap; vertices
past the cap are absent.  Levels never decrease while edges are deleted,
and the repair cost is charged per level increase, so a full deletion
sequence costs O(#edges * depth) scan work overall.

Two insertion shapes are supported: attaching a fresh vertex together
with its edge bundle, and inserting a single edge under the caller's
promise that no distance from the source decreases.  The promise is
checked locally and violations raise.

The tree keeps its own adjacency snapshot, so composed graphs (virtual
roots, supernodes, level graphs) can be driven through the same code;
vertex names are arbitrary hashables and edges carry opaque tags.
"""

from __future__ import annotations

import heapq
from typing import Hashable, Iterable, Optional

from .graph_core import GraphError, GraphView


class SourceMissing(GraphError):
    pass


class VertexAbsent(GraphError):
    pass


class PreconditionViolated(GraphError):
    pass


class EsTree:
    def __init__(
        self,
        source: Hashable,
        depth: int,
        edges: Iterable[tuple] = (),
        vertices: Iterable[Hashable] = (),
        debug: bool = False,
    ):
        """edges: (u, v, w) or (u, v, w, tag) with integer w >= 1."""
        if depth < 0:
            raise ValueError(f"depth {depth}")
        self.source = source
        self.depth = depth
        self.debug = debug
        self.work = 0
        self._adj: dict[Hashable, dict[Hashable, tuple[int, Hashable]]] = {}
        for v in vertices:
            self._adj.setdefault(v, {})
        for e in edges:
            u, v, w = e[0], e[1], e[2]
            tag = e[3] if len(e) > 3 else (u, v)
            self._add_adj(u, v, w, tag)
        if source not in self._adj:
            raise SourceMissing(f"source {source!r} not among the vertices")
        self._absent = self.depth + 1
        self.level: dict[Hashable, int] = {}
        self.parent: dict[Hashable, Optional[tuple[Hashable, Hashable]]] = {}
        self._initial_bfs()

    @classmethod
    def es_build(
        cls, view: GraphView, source: int, depth: int, debug: bool = False
    ) -> "EsTree":
        edges = [
            (u, v, view.graph.length(eid), eid)
            for u in view.vertex_list()
            for v, eid in view.neighbors(u)
            if u < v
        ]
        return cls(source, depth, edges, vertices=view.vertex_list(), debug=debug)

    # -- plumbing --------------------------------------------------------

    def _add_adj(self, u, v, w, tag):
        if u == v:
            raise ValueError(f"self-loop at {u!r}")
        if w < 1 or int(w) != w:
            raise ValueError(f"length {w!r} on ({u!r},{v!r})")
        row = self._adj.setdefault(u, {})
        if v in row:
            raise ValueError(f"duplicate edge ({u!r},{v!r})")
        row[v] = (int(w), tag)
        self._adj.setdefault(v, {})[u] = (int(w), tag)

    def _initial_bfs(self):
        for v in self._adj:
            self.level[v] = self._absent
            self.parent[v] = None
        self.level[self.source] = 0
        heap = [(0, self._key(self.source), self.source)]
        done = set()
        while heap:
            d, _, u = heapq.heappop(heap)
            if u in done or d > self.level[u]:
                continue
            done.add(u)
            for v, (w, tag) in self._adj[u].items():
                self.work += 1
                nd = d + w
                if nd <= self.depth and nd < self.level[v]:
                    self.level[v] = nd
                    self.parent[v] = (u, tag)
                    heapq.heappush(heap, (nd, self._key(v), v))

    @staticmethod
    def _key(v):
        # heap tiebreak that never compares raw vertex names of mixed types
        return repr(v)

    # -- queries ---------------------------------------------------------

    def contains(self, v) -> bool:
        return self.level.get(v, self._absent) <= self.depth

    def level_of(self, v) -> Optional[int]:
        lv = self.level.get(v, self._absent)
        return lv if lv <= self.depth else None

    def vertices(self):
        return self._adj.keys()

    def present(self):
        return [v for v in self._adj if self.contains(v)]

    def has_edge(self, u, v) -> bool:
        return v in self._adj.get(u, {})

    def incident(self, v) -> list:
        """(other, w, tag) rows for the live edges at v."""
        return [(u, w, tag) for u, (w, tag) in self._adj.get(v, {}).items()]

    def es_path(self, v) -> list:
        """Vertex path source..v along parent pointers."""
        if not self.contains(v):
            raise VertexAbsent(f"{v!r} is beyond depth {self.depth}")
        path = [v]
        while path[-1] != self.source:
            path.append(self.parent[path[-1]][0])
        return path[::-1]

    def es_path_edges(self, v) -> list:
        """Tags of the parent edges along source..v."""
        if not self.contains(v):
            raise VertexAbsent(f"{v!r} is beyond depth {self.depth}")
        tags = []
        while v != self.source:
            u, tag = self.parent[v]
            tags.append(tag)
            v = u
        return tags[::-1]

    # -- mutation --------------------------------------------------------

    def es_delete(self, u, v):
        """Remove edge (u, v) and restore correct levels."""
        row = self._adj.get(u)
        if row is None or v not in row:
            raise KeyError(f"no edge ({u!r},{v!r})")
        del self._adj[u][v]
        del self._adj[v][u]
        dirty = []
        if self.parent.get(v) is not None and self.parent[v][0] == u:
            dirty.append(v)
        if self.parent.get(u) is not None and self.parent[u][0] == v:
            dirty.append(u)
        if dirty:
            self._repair(dirty)

    def es_remove_vertex(self, v):
        """Delete every edge at v, then forget it."""
        for u in list(self._adj.get(v, {})):
            self.es_delete(v, u)
        self._adj.pop(v, None)
        self.level.pop(v, None)
        self.parent.pop(v, None)

    def es_insert(self, u, v, w, tag=None):
        """Single-edge insert.  Needs one endpoint fresh/absent-singleton,
        or the caller's promise that no level would decrease; a promise
        violation raises PreconditionViolated."""
        if tag is None:
            tag = (u, v)
        self._add_adj(u, v, w, tag)
        for x in (u, v):
            if x not in self.level:
                self.level[x] = self._absent
                self.parent[x] = None
        lu, lv = self.level[u], self.level[v]
        pu, pv = self.contains(u), self.contains(v)
        if pu and pv:
            if lu + w < lv or lv + w < lu:
                del self._adj[u][v]
                del self._adj[v][u]
                raise PreconditionViolated(
                    f"edge ({u!r},{v!r},{w}) would lower a level ({lu} vs {lv})"
                )
            return
        if not pu and not pv:
            return
        far, near = (u, v) if pv else (v, u)
        cand = self.level[near] + w
        if cand > self.depth:
            return
        # the far endpoint comes into range; its other edges must agree
        for y, (wy, _) in self._adj[far].items():
            self.work += 1
            ly = self.level.get(y, self._absent)
            bad = (
                (cand + wy < ly or ly + wy < cand)
                if ly <= self.depth
                else cand + wy <= self.depth  # would drag an absent vertex in
            )
            if bad and y != near:
                del self._adj[u][v]
                del self._adj[v][u]
                raise PreconditionViolated(
                    f"attaching {far!r} at level {cand} breaks neighbor {y!r}"
                )
        self.level[far] = cand
        self.parent[far] = (near, tag)

    def es_attach(self, v, edges: Iterable[tuple]):
        """Case-(i) batch: add fresh vertex v with all its edges at once.

        edges: (other, w) or (other, w, tag).  The new vertex adopts the
        correct level; existing levels must not drop (checked)."""
        if v in self._adj:
            raise PreconditionViolated(f"{v!r} is not fresh")
        self._adj[v] = {}
        self.level[v] = self._absent
        self.parent[v] = None
        best = None
        for e in edges:
            o, w = e[0], e[1]
            tag = e[2] if len(e) > 2 else (v, o)
            self._add_adj(v, o, w, tag)
            self.work += 1
            lo = self.level.get(o, self._absent)
            if lo <= self.depth and (best is None or lo + w < best[0]):
                best = (lo + w, o, tag)
        if best is not None and best[0] <= self.depth:
            self.level[v] = best[0]
            self.parent[v] = (best[1], best[2])
            for o, (w, _) in self._adj[v].items():
                self.work += 1
                lo = self.level.get(o, self._absent)
                if self.level[v] + w < lo:
                    raise PreconditionViolated(
                        f"attaching {v!r} would lower {o!r}: "
                        f"{self.level[v]}+{w} < {lo}"
                    )

    # -- repair ----------------------------------------------------------

    def _repair(self, seeds):
        heap = [(self.level[x], self._key(x), x) for x in seeds]
        heapq.heapify(heap)
        while heap:
            lv, _, x = heapq.heappop(heap)
            if x == self.source or lv != self.level[x] or lv > self.depth:
                continue
            best = None
            for y, (w, tag) in self._adj[x].items():
                self.work += 1
                ly = self.level.get(y, self._absent)
                if ly > self.depth:
                    continue
                cand = ly + w
                if best is None or cand < best[0]:
                    best = (cand, y, tag)
            if best is not None and best[0] <= lv:
                if self.debug and best[0] < lv:
                    raise AssertionError(f"level of {x!r} would drop")
                self.parent[x] = (best[1], best[2])
                continue
            new = best[0] if best is not None else self._absent
            if new > self.depth:
                new = self._absent
                self.parent[x] = None
            self.level[x] = new
            for y, (w, tag) in self._adj[x].items():
                self.work += 1
                p = self.parent.get(y)
                if p is not None and p[0] == x:
                    heapq.heappush(heap, (self.level[y], self._key(y), y))
            if new <= self.depth:
                heapq.heappush(heap, (new, self._key(x), x))

    # -- audit -----------------------------------------------------------

    def check(self):
        """Assert levels are exactly capped distances and parents consistent."""
        dist = {v: self._absent for v in self._adj}
        dist[self.source] = 0
        heap = [(0, self._key(self.source), self.source)]
        seen = set()
        while heap:
            d, _, u = heapq.heappop(heap)
            if u in seen:
                continue
            seen.add(u)
            for v, (w, _) in self._adj[u].items():
                if d + w <= self.depth and d + w < dist[v]:
                    dist[v] = d + w
                    heapq.heappush(heap, (d + w, self._key(v), v))
        for v in self._adj:
            assert self.level[v] == dist[v], (v, self.level[v], dist[v])
            if v != self.source and self.contains(v):
                u, tag = self.parent[v]
                w, tag2 = self._adj[v][u]
                assert tag == tag2
                assert self.level[v] == self.level[u] + w
