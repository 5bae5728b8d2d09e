"""Decremental (1+eps)-approximate single-source distances and paths.

One scale instance covers true distances near a target D.  The graph is
rescaled so that D maps onto the integer range [1, 2*ceil(4n/eps)] and
an exact bounded-depth tree becomes affordable there.  Edges split into
length classes by leading bit, and inside each class a layered
decomposition of the class subgraph assigns virtual degrees.  Vertices
whose virtual degree reaches the class threshold tau_i are heavy; every
connected component of the heavy class subgraph hides behind a
supernode.  The tree runs over the light remainder plus the supernodes,
with light lengths scaled by four and supernode rays of weight one, so
crossing a component costs a flat two.  Distance answers read one tree
level and pad by eps*D/4; path answers splice each supernode hop back
into real edges with a short-path query against the class decomposition.

The top level keeps an instance per power-of-two scale and binary
searches the scales at query time, so a query costs O(log log nL)
probes.  Deletions are broadcast to every scale.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dynamic_forest import ConnSF
from .es_tree import EsTree
from .graph_core import DynamicGraph, GraphError, UnknownEdge, edge_class
from .lcd import (
    NOT_CONNECTED,
    LcdParams,
    lcd_build,
    lcd_delete_edge,
    short_path,
    short_path_quality,
)


class ScaleMisuse(GraphError):
    pass


class _OverTwoDType:
    __slots__ = ()

    def __repr__(self):
        return "OVER_TWO_D"


OVER_TWO_D = _OverTwoDType()


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class SsspParams:
    """Tuning knobs shared by every scale instance of one run.

    q feeds the per-class decompositions; the default grows like the
    eighth root of log n.  lcd, when given, replaces the parameter block
    of every class decomposition wholesale.  tau overrides the heavy
    threshold (one value, a mapping, or a callable on the class index);
    it exists so small inputs can reach the heavy regime at all, and
    while it is set the replacement-budget assertions stand down.
    """

    q: Optional[int] = None
    lcd: Optional[LcdParams] = None
    tau: object = None

    def q_for(self, n: int) -> int:
        if self.q is not None:
            return self.q
        lg = max(1, (max(1, n) - 1).bit_length())
        k = 1
        while k ** 8 < lg:
            k += 1
        return k

    def tau_for(self, i: int, formula: Fraction) -> Fraction:
        t = self.tau
        if t is None:
            return formula
        if callable(t):
            return _frac(t(i))
        if isinstance(t, dict):
            return _frac(t[i]) if i in t else formula
        return _frac(t)


class ClassState:
    """Heavy-side bookkeeping for one length class."""

    def __init__(self, i: int):
        self.i = i
        self.tau: Fraction = Fraction(0)
        self.lcd = None  # layered decomposition of the unweighted class graph
        self.j_i = 0  # deepest layer whose width clears tau
        self.heavy: set = set()
        self.conn: Optional[ConnSF] = None
        self.sn_of: dict = {}  # component label -> supernode id
        self.light_ever = 0


def round_lengths(g: DynamicGraph, eps, D):
    """Copy g onto the integer range for scale D.

    Returns (graph, D', factor) with factor = 4n/(eps*D): every kept
    length becomes ceil(factor * len), edges beyond 2D are dropped, and
    D' = ceil(4n/eps) is the rounded scale every length now lives under.
    """
    eps = _frac(eps)
    D = _frac(D)
    if not 0 < eps < 1:
        raise ScaleMisuse(f"eps {eps} outside (0, 1)")
    if D <= 0:
        raise ScaleMisuse(f"scale {D} is not positive")
    n = g.n
    factor = Fraction(4 * n) / (eps * D)
    d_new = _ceil(Fraction(4 * n) / eps)
    out = DynamicGraph(n)
    for u, v, ln in g.edge_list():
        if ln > 2 * D:
            continue
        lp = _ceil(factor * ln)
        assert 1 <= lp <= 2 * d_new
        out.add_edge(u, v, lp)
    return out, d_new, factor


class SsspScaleInstance:
    def __init__(self, g: DynamicGraph, s: int, eps, D, params=None):
        eps = _frac(eps)
        if params is None:
            params = SsspParams()
        if not 0 <= int(s) < g.n:
            raise ScaleMisuse(f"source {s} is not a vertex")
        self.s = int(s)
        self.eps = eps
        self.D = _frac(D)
        self.params = params
        self.n = g.n
        self.g, self.Dp, self.factor = round_lengths(g, eps, D)
        kept = {(min(u, v), max(u, v)) for u, v, _ in self.g.edge_list()}
        self.discarded = {(min(u, v), max(u, v)) for u, v, _ in g.edge_list()
                          if (min(u, v), max(u, v)) not in kept}
        self.lam = (4 * self.Dp).bit_length() - 1
        self.depth = 32 * self.Dp
        self.tau_overridden = params.tau is not None
        self.sn_serial = 0
        self.last_path_audit = None
        self._build_classes()
        self._build_tree()

    # -- construction ----------------------------------------------------

    def _build_classes(self):
        by_class: dict = {}
        for u, v, lp in self.g.edge_list():
            i = edge_class(lp)
            # the top nominal class sits above the 2D' length cap
            assert i < self.lam
            by_class.setdefault(i, []).append((min(u, v), max(u, v)))
        q = self.params.q_for(self.n)
        self.classes: dict = {}
        alpha = Fraction(1)
        for i in sorted(by_class):
            cg = DynamicGraph.from_edges(self.n, sorted(by_class[i]))
            cs = ClassState(i)
            cs.lcd = lcd_build(cg, delta=2, q=q, params=self.params.lcd)
            alpha = max(alpha, short_path_quality(cs.lcd))
            self.classes[i] = cs
        self.alpha = alpha
        for i, cs in self.classes.items():
            formula = Fraction(8 * self.n * self.lam) * alpha \
                / (self.eps * self.Dp) * 2 ** i
            cs.tau = self.params.tau_for(i, formula)
            st = cs.lcd
            for j in range(1, st.r + 1):
                if Fraction(st.lay[j].h) >= cs.tau:
                    cs.j_i = j
            for j in range(1, cs.j_i + 1):
                cs.heavy.update(st.layers.members_of(j))
            if cs.heavy:
                pairs = sorted(p for p in sorted(by_class[i])
                               if p[0] in cs.heavy and p[1] in cs.heavy)
                cs.conn = ConnSF(sorted(cs.heavy), pairs)

    def _build_tree(self):
        edges = []
        for u, v, lp in self.g.edge_list():
            cs = self.classes[edge_class(lp)]
            if u in cs.heavy and v in cs.heavy:
                continue
            a, b = min(u, v), max(u, v)
            edges.append((a, b, 4 * lp, ("lt", a, b)))
            cs.light_ever += 1
        for i in sorted(self.classes):
            cs = self.classes[i]
            if cs.conn is None:
                continue
            seen = set()
            for v in sorted(cs.heavy):
                lab = cs.conn.component_label(v)
                if lab in seen:
                    continue
                seen.add(lab)
                snid = self._fresh_sn(i)
                cs.sn_of[lab] = snid
                for u in cs.conn.component_members(v):
                    edges.append((u, snid, 1, ("sn", snid, u)))
        self.tree = EsTree(self.s, self.depth, edges,
                           vertices=range(self.n))

    def _fresh_sn(self, i: int):
        snid = ("sn", i, self.sn_serial)
        self.sn_serial += 1
        return snid


def sssp_scale_build(g: DynamicGraph, s: int, eps, D,
                     params: SsspParams = None) -> SsspScaleInstance:
    return SsspScaleInstance(g, s, eps, D, params=params)


def sssp_scale_delete(inst: SsspScaleInstance, e) -> None:
    u, v = int(e[0]), int(e[1])
    key = (min(u, v), max(u, v))
    eid = inst.g.edge_id(u, v)
    if eid is None:
        if key in inst.discarded:
            return
        raise UnknownEdge(f"({u},{v}) is not a live edge at this scale")
    lp = inst.g.length(eid)
    cs = inst.classes[edge_class(lp)]
    both_heavy = u in cs.heavy and v in cs.heavy
    clog = lcd_delete_edge(cs.lcd, (u, v))
    inst.g.delete_between(u, v)
    if both_heavy:
        ev = cs.conn.conn_delete(u, v)
        if ev is not None:
            _apply_split(inst, cs, ev)
    else:
        inst.tree.es_delete(u, v)
    deps = sorted({w for (w, old, new) in clog.layer_moves
                   if old <= cs.j_i < new})
    if deps:
        _depart(inst, cs, deps)


def _apply_split(inst, cs, ev):
    # the moved side leaves its supernode for a fresh one; new rays go in
    # while the old ones still pin every level in place
    sn_old = cs.sn_of[ev.old_label]
    snid = inst._fresh_sn(cs.i)
    cs.sn_of[ev.new_label] = snid
    inst.tree.es_attach(snid, [(x, 1, ("sn", snid, x)) for x in ev.moved])
    for x in ev.moved:
        inst.tree.es_delete(x, sn_old)


def _depart(inst, cs, deps):
    """Retire vertices whose layer fell past j_i from the heavy side."""
    # edges toward a still-heavy or co-leaving vertex turn light first,
    # while the supernode two-step detour still backs the no-drop promise
    newly = set()
    for d in deps:
        for w, _ in sorted(cs.lcd.g.neighbors(d)):
            if w in cs.heavy:
                newly.add((min(d, w), max(d, w)))
    for a, b in sorted(newly):
        lp = inst.g.length(inst.g.edge_id(a, b))
        inst.tree.es_insert(a, b, 4 * lp, ("lt", a, b))
        cs.light_ever += 1
    for d in deps:
        lab = cs.conn.component_label(d)
        sn_old = cs.sn_of[lab]
        before = [x for x in cs.conn.component_members(d) if x != d]
        inst.tree.es_delete(d, sn_old)
        cs.conn.conn_remove_vertex(d)
        cs.heavy.discard(d)
        kept = False
        done = set()
        for x in before:
            nl = cs.conn.component_label(x)
            if nl == lab:
                kept = True
                continue
            if nl in done:
                continue
            done.add(nl)
            snid = inst._fresh_sn(cs.i)
            cs.sn_of[nl] = snid
            group = cs.conn.component_members(x)
            inst.tree.es_attach(snid, [(y, 1, ("sn", snid, y)) for y in group])
            for y in group:
                inst.tree.es_delete(y, sn_old)
        if not kept:
            cs.sn_of.pop(lab, None)
            inst.tree.es_remove_vertex(sn_old)


# -- queries ---------------------------------------------------------------


def sssp_dist_query(inst: SsspScaleInstance, v):
    """One tree level plus the eps*D/4 pad, in scaled units.

    Callers divide by inst.factor for original lengths.  The sentinel
    answer is only given when the true distance exceeds twice the scale.
    """
    lv = inst.tree.level_of(int(v))
    if lv is None:
        return OVER_TWO_D
    return Fraction(lv, 4) + inst.eps * inst.Dp / 4


def sssp_path_query(inst: SsspScaleInstance, v):
    """Tree path with every supernode hop spliced back into class edges."""
    v = int(v)
    if not inst.tree.contains(v):
        return OVER_TWO_D
    if v == inst.s:
        return []
    walk = inst.tree.es_path(v)
    out = [walk[0]]
    repl = 0  # scaled length spliced in for supernode hops
    for k in range(1, len(walk)):
        x = walk[k]
        if isinstance(x, tuple):
            continue
        prev = walk[k - 1]
        if not isinstance(prev, tuple):
            out.append(x)
            continue
        cs = inst.classes[prev[1]]
        a = walk[k - 2]
        seg = short_path(cs.lcd, cs.j_i, a, x)
        assert seg is not NOT_CONNECTED and seg[0] == a and seg[-1] == x
        assert all(y in cs.heavy for y in seg)
        for p, nxt in zip(seg, seg[1:]):
            repl += inst.g.length(inst.g.edge_id(p, nxt))
        if not inst.tau_overridden:
            comp = cs.conn.component_members(a)
            assert Fraction(len(seg) - 1) <= \
                Fraction(len(comp)) * inst.alpha / cs.tau
        out.extend(seg[1:])
    pairs = set()
    for a, b in zip(out, out[1:]):
        key = (min(a, b), max(a, b))
        assert key not in pairs, "edge repeated on the assembled path"
        pairs.add(key)
    total = sum(inst.g.length(inst.g.edge_id(a, b))
                for a, b in zip(out, out[1:]))
    est = Fraction(inst.tree.level_of(v), 4) + inst.eps * inst.Dp / 4
    if not inst.tau_overridden:
        assert 4 * repl <= inst.eps * inst.Dp, "splices blew the pad budget"
        assert total <= est
    inst.last_path_audit = {"replaced": repl, "scaled_total": total,
                            "estimate": est}
    return out


# -- audits ----------------------------------------------------------------


def _dijkstra(source, edges, vertices=()):
    adj: dict = {}
    for v in vertices:
        adj.setdefault(v, [])
    for u, v, w in edges:
        adj.setdefault(u, []).append((v, w))
        adj.setdefault(v, []).append((u, w))
    dist = {source: 0}
    heap = [(0, repr(source), source)]
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj.get(u, ()):
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, repr(v), v))
    return dist


def _hat_edges(inst):
    """The contracted light graph, rebuilt from first principles."""
    edges = []
    for u, v, lp in inst.g.edge_list():
        cs = inst.classes[edge_class(lp)]
        if u in cs.heavy and v in cs.heavy:
            continue
        edges.append((u, v, 4 * lp))
    for i in sorted(inst.classes):
        cs = inst.classes[i]
        if cs.conn is None:
            continue
        seen = set()
        for x in sorted(cs.heavy):
            lab = cs.conn.component_label(x)
            if lab in seen:
                continue
            seen.add(lab)
            snid = cs.sn_of[lab]
            for y in cs.conn.component_members(x):
                edges.append((y, snid, 1))
    return edges


def check_scale_invariants(inst: SsspScaleInstance):
    n = inst.n
    assert inst.lam == (4 * inst.Dp).bit_length() - 1
    assert inst.depth == 32 * inst.Dp
    per: dict = {}
    for u, v, lp in inst.g.edge_list():
        assert 1 <= lp <= 2 * inst.Dp
        i = edge_class(lp)
        assert i in inst.classes and i < inst.lam
        per.setdefault(i, set()).add((min(u, v), max(u, v)))
    for i, cs in inst.classes.items():
        mine = per.get(i, set())
        assert set(cs.lcd.alive_edges()) == mine, \
            f"class {i} decomposition lost sync"
        want = set()
        if cs.j_i:
            for j in range(1, cs.j_i + 1):
                want.update(cs.lcd.layers.members_of(j))
        assert cs.heavy == want, f"class {i} heavy set drifted"
        if cs.heavy:
            # components of the heavy subgraph, by fresh union-find
            root = {x: x for x in cs.heavy}

            def find(x):
                while root[x] != x:
                    root[x] = root[root[x]]
                    x = root[x]
                return x

            for a, b in sorted(mine):
                if a in cs.heavy and b in cs.heavy:
                    root[find(a)] = find(b)
            groups: dict = {}
            for x in sorted(cs.heavy):
                groups.setdefault(find(x), set()).add(x)
            live = {}
            for x in sorted(cs.heavy):
                live.setdefault(cs.conn.component_label(x), set()).add(x)
            assert sorted(map(sorted, groups.values())) == \
                sorted(map(sorted, live.values()))
            assert set(cs.sn_of) == set(live)
            for lab, grp in sorted(live.items()):
                rows = inst.tree.incident(cs.sn_of[lab])
                assert {r[0] for r in rows} == grp
                assert all(r[1] == 1 for r in rows)
        else:
            assert not cs.sn_of
        assert cs.light_ever <= 4 * n * max(Fraction(1), cs.tau), \
            f"class {i} light volume overran its charge"
    # the tree is an exact bounded-depth tree of the contracted graph
    hat = _hat_edges(inst)
    dist = _dijkstra(inst.s, hat, vertices=range(n))
    sn_ids = [snid for cs in inst.classes.values()
              for snid in cs.sn_of.values()]
    for v in list(range(n)) + sn_ids:
        lv = inst.tree.level_of(v)
        dv = dist.get(v)
        if dv is not None and dv <= inst.depth:
            assert lv == dv, f"tree level off at {v!r}"
        else:
            assert lv is None, f"{v!r} should sit beyond the depth cap"
    tree_deg = sum(len(inst.tree.incident(x)) for x in inst.tree.vertices())
    assert tree_deg == 2 * len(hat), "stray edges inside the tree"
    # dominance: contraction never stretches a scaled distance
    gdist = _dijkstra(inst.s, inst.g.edge_list(), vertices=range(n))
    for v in range(n):
        if v in gdist:
            assert Fraction(dist[v], 4) <= gdist[v], f"dominance lost at {v}"


# -- one instance per scale ------------------------------------------------


class SsspState:
    """Scale family for one source: instances at D = 2^i."""

    def __init__(self, g: DynamicGraph, s: int, eps, params=None):
        eps = _frac(eps)
        self.g = g.copy()
        self.s = int(s)
        self.eps = eps
        self.params = params if params is not None else SsspParams()
        lmax = max([ln for _, _, ln in g.edge_list()] or [1])
        top = max(1, g.n * lmax)  # above every finite distance
        self.imax = max(0, (top - 1).bit_length())
        self.scales = {}
        for i in range(self.imax + 1):
            self.scales[i] = sssp_scale_build(g, s, eps, 2 ** i,
                                              params=self.params)


def sssp_build_all(g: DynamicGraph, s: int, eps,
                   params: SsspParams = None) -> SsspState:
    return SsspState(g, s, eps, params=params)


def sssp_delete(sp: SsspState, u: int, v: int) -> None:
    sp.g.delete_between(u, v)
    for i in range(sp.imax + 1):
        sssp_scale_delete(sp.scales[i], (u, v))


def _too_far(sp, v, cache, i):
    if i not in cache:
        cache[i] = sssp_dist_query(sp.scales[i], v)
    r = cache[i]
    if r is OVER_TWO_D:
        return True
    return r / sp.scales[i].factor > 2 * 2 ** i * (1 + sp.eps)


def _locate(sp, v):
    """First scale that commits to an answer, or None; by binary search."""
    cache: dict = {}
    if _too_far(sp, v, cache, sp.imax):
        return None, cache
    lo, hi = 0, sp.imax
    while lo < hi:
        mid = (lo + hi) // 2
        if _too_far(sp, v, cache, mid):
            lo = mid + 1
        else:
            hi = mid
    return lo, cache


def sssp_dist(sp: SsspState, v):
    v = int(v)
    if not 0 <= v < sp.g.n:
        raise ScaleMisuse(f"vertex {v} out of range")
    if v == sp.s:
        return Fraction(0)
    i, cache = _locate(sp, v)
    if i is None:
        return NOT_CONNECTED
    return cache[i] / sp.scales[i].factor


def sssp_path(sp: SsspState, v):
    v = int(v)
    if not 0 <= v < sp.g.n:
        raise ScaleMisuse(f"vertex {v} out of range")
    if v == sp.s:
        return []
    i, _ = _locate(sp, v)
    if i is None:
        return NOT_CONNECTED
    path = sssp_path_query(sp.scales[i], v)
    assert path is not OVER_TWO_D
    return path
