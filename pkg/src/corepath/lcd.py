"""Layered core decomposition of a decremental graph.

The structure slices a graph into degree layers (powers of delta), splits
each layer into geometrically shrinking sublayers, and carves every
non-buffer sublayer into expander cores plus a trimmed residue ordered by
a low-in-degree DAG.  Each core carries a short-path oracle over its
creation-time snapshot; weighted spanning forests over the layer prefixes
let ``short_path`` stitch core-internal paths together with tree edges.

Everything is maintained under edge deletions only.  Vertices move
downward (deeper sublayer, buffer, lower layer), cores only shrink, and
every repair is charged against explicit budgets that
``check_invariants`` re-derives from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .degree_layers import LayerState
from .dynamic_forest import MsfState, tt_connect, tt_jump, tt_minedge, tt_weight
from .es_tree import EsTree
from .expander_oracle import (
    TopLevelBudgetExhausted,
    _len_cap,
    oracle_delete,
    oracle_init,
    oracle_pruned,
    oracle_query,
)
from .expander_tools import ExpanderParams, expander_decompose
from .graph_core import DynamicGraph, GraphError, GraphView, UnknownEdge

# trimming threshold: a vertex leaves the working graph once its current
# degree falls below target/TRIM_DIV
TRIM_DIV = 12
# a non-buffer resident must keep at least deg0/KEEP_DIV of its frozen
# start-of-phase degree, else it moves to the buffer
KEEP_DIV = 4
# a core survives phi*|E(K0)|/WEAR_DIV fed deletions, then it is destroyed
WEAR_DIV = 10
# alive cores never get smaller than phi^2 * h_j / CORE_SIZE_DIV vertices
CORE_SIZE_DIV = 72
# census: a sublayer holds at most CENSUS_COEFF*|sublayer|/(phi^2 h_j) cores
CENSUS_COEFF = 72
# near/far split for buffer moves: "near" when the leftover downward
# fan-out stays below NEAR_FACTOR times the remaining upward degree
NEAR_FACTOR = 2
C_TC = 8    # to-core tree depth coefficient
C_TCP = 16  # to-core walk length cap coefficient
ROOT = -1   # shared virtual root of every to-core tree


class LcdError(GraphError):
    pass


class IsolatedVertex(LcdError):
    """Raised for queries on vertices with zero virtual degree."""


class NotInCore(LcdError):
    pass


class CoreDestroyed(LcdError):
    pass


class LayerViolation(LcdError):
    """Query endpoint lives in a deeper layer than the requested prefix."""


class PhaseBroken(LcdError):
    """Internal guarantee failed; the structure cannot answer honestly."""


class _NotConnectedType:
    __slots__ = ()

    def __repr__(self):
        return "NOT_CONNECTED"


NOT_CONNECTED = _NotConnectedType()


def _ilg(n: int) -> int:
    return max(1, math.ceil(math.log2(max(2, n))))


def _ekey(u: int, v: int) -> tuple:
    return (u, v) if u < v else (v, u)


def _other(key, x):
    return key[0] if key[1] == x else key[1]


@dataclass
class LcdParams:
    q: int
    phi: Fraction
    expander: ExpanderParams
    c_tc: int = C_TC
    c_tcp: int = C_TCP
    move_coeff: int = 64
    phase_coeff: int = 64
    core_coeff: int = 64

    @classmethod
    def make(cls, n: int, q: int = 2, c_phi: int = 4) -> "LcdParams":
        ep = ExpanderParams.for_size(max(2, n), c_phi=c_phi)
        return cls(q=q, phi=ep.phi, expander=ep)


@dataclass
class DagResult:
    """Acyclic orientation of the trimmed residue.

    rank maps each trimmed vertex to its removal position; edges are
    (tail, head) pairs pointing from later-trimmed to earlier-trimmed,
    so in-degrees stay below target/TRIM_DIV.
    """

    rank: dict
    edges: tuple


@dataclass
class ChangeLog:
    layer_moves: list = field(default_factory=list)   # (v, old, new)
    buffer_moves: list = field(default_factory=list)  # (v, j, kind)
    prunings: list = field(default_factory=list)      # (cid, v)
    destructions: list = field(default_factory=list)  # cid
    restarts: list = field(default_factory=list)      # (j, ell)

    def total(self) -> int:
        return (len(self.layer_moves) + len(self.buffer_moves)
                + len(self.prunings) + len(self.destructions)
                + len(self.restarts))


class IncidentEdges:
    """Per-vertex partition of the alive incident edge keys.

    by_layer[u][j] holds edges toward layers other than u's own.
    by_sub[u][l] splits the own-layer edges by the neighbor's sublayer
    position, kept only up to u's own position; above[u] aggregates the
    own-layer edges pointing strictly deeper.
    """

    def __init__(self):
        self.by_layer: dict = {}
        self.by_sub: dict = {}
        self.above: dict = {}

    def ensure(self, u):
        self.by_layer.setdefault(u, {})
        self.by_sub.setdefault(u, {})
        self.above.setdefault(u, set())

    def inlayer_keys(self, u) -> set:
        out = set(self.above.get(u, ()))
        for ks in self.by_sub.get(u, {}).values():
            out |= ks
        return out

    def all_keys(self, u) -> set:
        out = self.inlayer_keys(u)
        for ks in self.by_layer.get(u, {}).values():
            out |= ks
        return out

    def discard_inlayer(self, u, key) -> bool:
        if key in self.above.get(u, ()):
            self.above[u].discard(key)
            return True
        for ks in self.by_sub.get(u, {}).values():
            if key in ks:
                ks.discard(key)
                return True
        return False

    def discard_any(self, u, key):
        if self.discard_inlayer(u, key):
            return
        for ks in self.by_layer.get(u, {}).values():
            if key in ks:
                ks.discard(key)
                return


class Core:
    """One expander core: a snapshot subgraph with a short-path oracle."""

    __slots__ = ("cid", "j", "ell", "live", "fwd", "back", "h",
                 "e0", "fed", "seen", "destroyed", "phi")

    def __init__(self, cid, j, ell, members, keys, params: LcdParams):
        self.cid = cid
        self.j = j
        self.ell = ell
        self.back = sorted(members)
        self.fwd = {v: i for i, v in enumerate(self.back)}
        self.live = set(members)
        self.e0 = len(keys)
        self.fed = 0
        self.seen: set = set()
        self.destroyed = False
        self.phi = params.phi
        cg = DynamicGraph(len(self.back))
        for a, b in sorted(keys):
            cg.add_edge(self.fwd[a], self.fwd[b])
        self.h = oracle_init(GraphView(cg), params.q, params.phi,
                             params.expander)

    def top_graph(self):
        return self.h.levels[self.h.q].graph

    def edge_alive(self, a, b) -> bool:
        if a not in self.fwd or b not in self.fwd:
            return False
        return self.top_graph().has_edge(self.fwd[a], self.fwd[b])


class PhaseState:
    """Mutable state of one non-buffer sublayer within a phase: frozen
    degree targets, cores, the trimmed residue with its dag, and the
    to-core search tree hanging off a shared virtual root."""

    __slots__ = ("j", "ell", "serial", "targets", "uset", "assoc",
                 "cores", "dag", "tree")

    def __init__(self, j, ell, serial):
        self.j = j
        self.ell = ell
        self.serial = serial
        self.targets: dict = {}
        self.uset: set = set()
        self.assoc: dict = {}
        self.cores: list = []
        self.dag: DagResult | None = None
        self.tree: EsTree | None = None

    def alive_cores(self) -> list:
        return [k for k in self.cores if not k.destroyed]


class SublayerState:
    """Per-layer bookkeeping: sublayer sets, buffer partition, move and
    phase counters.  Sublayer L is the buffer; 1..L-1 run phases."""

    def __init__(self, j, h, nleq0):
        self.j = j
        self.h = h
        self.nleq0 = nleq0
        l = 1
        # smallest l with nleq0 / 2^(l-1) <= h/2
        while nleq0 * 2 > h * (2 ** (l - 1)) and l < 64:
            l += 1
        self.L = l
        self.subs: dict = {i: set() for i in range(1, self.L + 1)}
        self.phases: dict = {}
        self.bufkind: dict = {}
        self.buf_up: dict = {}
        self.moves: dict = {"D": 0, "K": 0, "U1": 0, "U2": 0}
        self.starts: dict = {}
        self.ends: dict = {}
        self.pi_log: list = []
        self.cores_created = 0

    def moves_total(self) -> int:
        return sum(self.moves.values())


class LcdState:
    def __init__(self, g: DynamicGraph, delta: int, params: LcdParams,
                 debug: bool = False):
        self.g = g
        self.n = g.n
        self.delta = delta
        self.params = params
        self.debug = debug
        self.layers = LayerState(GraphView(g), delta)
        self.r = self.layers.config.r
        self.lay: dict = {}
        self.inc = IncidentEdges()
        self.pos: dict = {}
        self.cores_by_vertex: dict = {}
        self.msf: list = []
        self.eid_of: dict = {}
        self.jmax: dict = {}
        self.core_serial = 0
        self.phase_serial = 0
        self.micros = 0
        self.clog = ChangeLog()
        self._pending: set = set()
        self._touched_verts: set = set()
        self._touched_subs: set = set()

    def _work(self, k: int = 1):
        self.micros += k

    def layer_of(self, u) -> int:
        return self.layers.layer_of(u)

    def deg_below(self, u, j, l) -> int:
        """Current degree of u toward layers < j plus sublayers <= l."""
        t = 0
        for jj, ks in self.inc.by_layer.get(u, {}).items():
            if jj < j:
                t += len(ks)
        for ll, ks in self.inc.by_sub.get(u, {}).items():
            if ll <= l:
                t += len(ks)
        return t

    def upward_keys(self, u, j, l) -> list:
        """Alive keys from u toward layers < j or sublayers < l."""
        out = []
        for jj, ks in self.inc.by_layer.get(u, {}).items():
            if jj < j:
                out.extend(ks)
        for ll, ks in self.inc.by_sub.get(u, {}).items():
            if ll < l:
                out.extend(ks)
        return out

    def core_at(self, u):
        return self.cores_by_vertex.get(u)

    def alive_edges(self) -> list:
        return sorted(self.eid_of)


# -- core decomposition (static) ------------------------------------------


def _as_targets(view: GraphView, targets) -> dict:
    verts = sorted(view.vertex_list())
    if isinstance(targets, int):
        targets = {u: targets for u in verts}
    out = {}
    for u in verts:
        t = targets.get(u)
        if t is None or t <= 0:
            raise LcdError(f"vertex {u} needs a positive degree target")
        out[u] = t
    return out


def core_decompose(view: GraphView, degree_targets, params: LcdParams = None):
    """Split H into expander cores plus an acyclically oriented residue.

    Vertices whose current degree drops below target/TRIM_DIV are trimmed
    one at a time (lexicographic tie-break); edges present at trim time
    are oriented toward the trimmed vertex.  The remainder is cut into
    strong expander pieces; pieces with at least two vertices become
    cores and leave the working graph.  Repeats until nothing is left.
    """
    verts = sorted(view.vertex_list())
    targets = _as_targets(view, degree_targets)
    if params is None:
        params = LcdParams.make(max(2, len(verts)))
    adj: dict = {u: set() for u in verts}
    for u in verts:
        for v, _e in view.neighbors(u):
            if v in adj:
                adj[u].add(v)
    remaining = set(verts)
    rank: dict = {}
    oriented: list = []
    cores: list = []
    while remaining:
        progressed = False
        while True:
            bad = sorted(u for u in remaining
                         if TRIM_DIV * len(adj[u]) < targets[u])
            if not bad:
                break
            u = bad[0]
            rank[u] = len(rank)
            for w in sorted(adj[u]):
                oriented.append((w, u))
                adj[w].discard(u)
            adj[u].clear()
            remaining.discard(u)
            progressed = True
        if not remaining:
            break
        m = sum(len(adj[u]) for u in remaining) // 2
        if m == 0:
            raise LcdError("stuck: edgeless residue that no target trims")
        sub = DynamicGraph(max(remaining) + 1)
        for u in sorted(remaining):
            for w in sorted(adj[u]):
                if u < w:
                    sub.add_edge(u, w)
        res = expander_decompose(GraphView(sub, vertices=sorted(remaining)),
                                 params.phi, params.expander)
        if not res.quality_ok:
            raise LcdError("expander decomposition failed its quality check")
        for piece in res.clusters:
            if len(piece) < 2:
                continue
            edges = {(min(a, b), max(a, b))
                     for a in piece for b in adj[a] if b in piece}
            cores.append((frozenset(piece), frozenset(edges)))
            for a in piece:
                for w in adj[a]:
                    adj[w].discard(a)
                adj[a].clear()
                remaining.discard(a)
            progressed = True
        if not progressed:
            raise LcdError("no trim and no core piece: cannot make progress")
    dag_edges = tuple(sorted((a, b) for a, b in oriented
                             if a in rank and b in rank))
    for a, b in dag_edges:
        assert rank[a] > rank[b], "orientation must follow removal order"
    indeg: dict = {}
    for _a, b in dag_edges:
        indeg[b] = indeg.get(b, 0) + 1
    for u, d in indeg.items():
        assert TRIM_DIV * d <= targets[u], f"in-degree at {u} over its cap"
    phi = params.phi
    for piece, edges in cores:
        deg = {u: 0 for u in piece}
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        for u in piece:
            assert deg[u] >= phi * Fraction(targets[u], TRIM_DIV), \
                f"core degree at {u} below phi*target/{TRIM_DIV}"
    cores.sort(key=lambda ce: min(ce[0]))
    return [p for p, _e in cores], DagResult(rank=rank, edges=dag_edges)


# -- refinement bookkeeping -----------------------------------------------


def _set_inlayer_position(st: LcdState, x, j, newpos):
    """Rebuild x's own-layer refinement for its (possibly new) position
    and refile the shared keys inside every same-layer neighbor."""
    st.inc.ensure(x)
    keys = st.inc.inlayer_keys(x)
    moved_in = st.inc.by_layer[x].pop(j, None)
    if moved_in:
        keys |= moved_in
    st.inc.by_sub[x] = {}
    st.inc.above[x] = set()
    for key in sorted(keys):
        st._work()
        y = _other(key, x)
        py = st.pos[y]
        if py <= newpos:
            st.inc.by_sub[x].setdefault(py, set()).add(key)
        else:
            st.inc.above[x].add(key)
        st.inc.discard_inlayer(y, key)
        if newpos <= py:
            st.inc.by_sub[y].setdefault(newpos, set()).add(key)
        else:
            st.inc.above[y].add(key)


def _assign_uplink(st: LcdState, x, j):
    """Best-effort up-link; _repair_links enforces existence later."""
    sub = st.lay[j]
    cands = st.upward_keys(x, j, sub.L)
    if cands:
        sub.buf_up[x] = min(_other(k, x) for k in cands)
    else:
        sub.buf_up.pop(x, None)


def _buffer_insert(st: LcdState, x, j, kind, pi=0):
    """Complete a move of x into layer j's buffer.  Containers, position,
    refinements and up-link are all final on return; the I1 check is the
    caller's batch-boundary duty."""
    sub = st.lay[j]
    st.pos[x] = sub.L
    sub.subs[sub.L].add(x)
    sub.bufkind[x] = kind
    sub.moves[kind] += 1
    sub.pi_log.append((kind, pi))
    st.clog.buffer_moves.append((x, j, kind))
    _set_inlayer_position(st, x, j, sub.L)
    _assign_uplink(st, x, j)
    st._touched_verts.add(x)
    st._pending.add(x)
    for y, _e in st.g.neighbors(x):
        st._pending.add(y)
        st._touched_verts.add(y)


def _i1_restarts(st: LcdState, j):
    """Restart phases until every sublayer-count bound holds again."""
    sub = st.lay[j]
    while True:
        suffix = 0
        pivot = None
        for l in range(sub.L, 1, -1):
            suffix += len(sub.subs[l])
            if suffix * (2 ** (l - 1)) > sub.nleq0:
                pivot = l - 1
        if pivot is None:
            return
        _restart(st, j, pivot)


def _end_phase(st: LcdState, sub: SublayerState, l):
    ph = sub.phases.pop(l, None)
    if ph is None:
        return
    for k in ph.alive_cores():
        k.destroyed = True
        for v in k.live:
            st.cores_by_vertex.pop(v, None)
        k.live.clear()
    ph.tree = None


def _restart(st: LcdState, j, lv):
    """Merge sublayers lv..L into lv and open a fresh phase there."""
    sub = st.lay[j]
    members = set()
    for l in range(lv, sub.L + 1):
        members |= sub.subs[l]
    st.clog.restarts.append((j, lv))
    sub.ends[lv] = sub.ends.get(lv, 0) + 1
    for l in range(lv, sub.L):
        _end_phase(st, sub, l)
    for x in sub.subs[sub.L]:
        sub.bufkind.pop(x, None)
        sub.buf_up.pop(x, None)
    for l in range(lv, sub.L + 1):
        sub.subs[l] = set()
    sub.subs[lv] = set(members)
    for x in members:
        st.pos[x] = lv
    for x in sorted(members):
        _set_inlayer_position(st, x, j, lv)
        st._touched_verts.add(x)
        st._pending.add(x)
    _start_phase(st, j, lv)


def _start_phase(st: LcdState, j, lv):
    sub = st.lay[j]
    members = sorted(sub.subs[lv])
    if not members:
        return
    st.phase_serial += 1
    ph = PhaseState(j, lv, st.phase_serial)
    ph.targets = {x: st.deg_below(x, j, lv) for x in members}
    hkeys = set()
    for x in members:
        hkeys |= st.inc.by_sub.get(x, {}).get(lv, set())
    sg = DynamicGraph(st.n)
    for a, b in sorted(hkeys):
        sg.add_edge(a, b)
    cores_sets, dag = core_decompose(GraphView(sg, vertices=members),
                                     ph.targets, st.params)
    # creation census: the sublayer cannot afford more cores than this
    lhs = len(cores_sets) * (st.params.phi ** 2) * sub.h
    assert lhs <= CENSUS_COEFF * len(members), "phase created too many cores"
    covered = set()
    for vs in cores_sets:
        keys = {k for k in hkeys if k[0] in vs and k[1] in vs}
        st.core_serial += 1
        core = Core(st.core_serial, j, lv, vs, keys, st.params)
        ph.cores.append(core)
        sub.cores_created += 1
        for v in vs:
            st.cores_by_vertex[v] = core
        covered |= vs
    ph.dag = dag
    ph.uset = set(members) - covered
    assert ph.uset == set(dag.rank), "trim residue must match the dag"
    for u in sorted(ph.uset):
        cands = st.upward_keys(u, j, lv)
        if cands:
            ph.assoc[u] = min(_other(k, u) for k in cands)
    depth = st.params.c_tc * _ilg(st.n) + 1
    tedges = [(a, b, 1) for a, b in sorted(hkeys)]
    for k in ph.cores:
        for v in sorted(k.live):
            tedges.append((ROOT, v, 1))
    for u in sorted(ph.assoc):
        tedges.append((ROOT, u, 1))
    ph.tree = EsTree(ROOT, depth, tedges, vertices=members + [ROOT])
    sub.phases[lv] = ph
    sub.starts[lv] = sub.starts.get(lv, 0) + 1
    st._touched_subs.add((j, lv))
    st._work(len(members) + len(hkeys))


# -- core feeding and moves -----------------------------------------------


def _pull_to_buffer(st: LcdState, core: Core, y, kind):
    """Move a live core member to its layer's buffer, no feeding."""
    j, l = core.j, core.ell
    sub = st.lay[j]
    pi = len(st.inc.above.get(y, ()))
    core.live.discard(y)
    st.cores_by_vertex.pop(y, None)
    sub.subs[l].discard(y)
    st.pos.pop(y, None)
    ph = sub.phases.get(l)
    if ph is not None and ph.tree is not None and ph.tree.contains(y):
        ph.tree.es_remove_vertex(y)
    st._touched_subs.add((j, l))
    _buffer_insert(st, y, j, kind, pi=pi)


def _core_destroy(st: LcdState, core: Core):
    if core.destroyed:
        return
    core.destroyed = True
    st.clog.destructions.append(core.cid)
    for y in sorted(core.live):
        _pull_to_buffer(st, core, y, "K")
    core.live.clear()
    _i1_restarts(st, core.j)


def _core_prune_moves(st: LcdState, core: Core):
    if core.destroyed:
        return
    newly = [p for p in sorted(oracle_pruned(core.h)) if p not in core.seen]
    if not newly:
        return
    moved = False
    for p in newly:
        core.seen.add(p)
        y = core.back[p]
        if y not in core.live:
            continue
        st.clog.prunings.append((core.cid, y))
        _pull_to_buffer(st, core, y, "K")
        moved = True
    if moved:
        _i1_restarts(st, core.j)


def _core_feed_local(st: LcdState, core: Core, a, b):
    """Feed one deletion (local ids) into a core's oracle; the oracle may
    have dropped the edge on its own already, which is fine."""
    if core.destroyed:
        return
    if not core.top_graph().has_edge(a, b):
        return
    st._work(4)
    try:
        oracle_delete(core.h, (a, b))
    except TopLevelBudgetExhausted:
        _core_destroy(st, core)
        return
    core.fed += 1
    if core.fed * WEAR_DIV > core.phi * core.e0:
        _core_destroy(st, core)
        return
    _core_prune_moves(st, core)


def _detach_feed(st: LcdState, core: Core, lx):
    """Feed away the remaining oracle edges of a departed member."""
    while not core.destroyed:
        nbs = sorted(w for w, _e in core.top_graph().neighbors(lx))
        if not nbs:
            return
        _core_feed_local(st, core, lx, nbs[0])


def _leave_nonbuffer(st: LcdState, x, j, l):
    """Remove x from a non-buffer sublayer's containers; no feeding.
    Returns the core handle and local id when x was a core member."""
    sub = st.lay[j]
    sub.subs[l].discard(x)
    ph = sub.phases.get(l)
    core = st.cores_by_vertex.pop(x, None)
    lx = None
    if core is not None:
        core.live.discard(x)
        lx = core.fwd[x]
    elif ph is not None:
        ph.uset.discard(x)
        ph.assoc.pop(x, None)
    if ph is not None and ph.tree is not None and ph.tree.contains(x):
        ph.tree.es_remove_vertex(x)
    st._touched_subs.add((j, l))
    return core, lx


def _layer_drop(st: LcdState, x, jo, jn):
    """Container-only move of x from layer jo to jn.  Feeding and the I1
    check stay with the caller so the whole batch completes first."""
    st.clog.layer_moves.append((x, jo, jn))
    st._touched_verts.add(x)
    st._pending.add(x)
    for y, _e in st.g.neighbors(x):
        st._pending.add(y)
        st._touched_verts.add(y)
    core = lx = None
    if jo <= st.r:
        sub = st.lay[jo]
        l = st.pos.pop(x)
        if l == sub.L:
            sub.subs[l].discard(x)
            sub.bufkind.pop(x, None)
            sub.buf_up.pop(x, None)
        else:
            core, lx = _leave_nonbuffer(st, x, jo, l)
        # the own-layer refinement dissolves into a plain layer bucket
        keys = st.inc.inlayer_keys(x)
        st.inc.by_sub[x] = {}
        st.inc.above[x] = set()
        if keys:
            st.inc.by_layer[x].setdefault(jo, set()).update(keys)
        for key in sorted(keys):
            w = _other(key, x)
            st.inc.discard_inlayer(w, key)
            st.inc.by_layer[w].setdefault(jn, set()).add(key)
    # neighbors outside jo refile the shared key under the new layer
    for jj, ks in list(st.inc.by_layer.get(x, {}).items()):
        if jj == jo:
            continue
        for key in list(ks):
            z = _other(key, x)
            zl = st.layer_of(z)
            if zl == jo:
                continue
            bl = st.inc.by_layer[z]
            if jo in bl:
                bl[jo].discard(key)
            if zl == jn and jn <= st.r:
                tgt = st.lay[jn].L
                if tgt <= st.pos[z]:
                    st.inc.by_sub[z].setdefault(tgt, set()).add(key)
                else:
                    st.inc.above[z].add(key)
            else:
                bl.setdefault(jn, set()).add(key)
    # layer growth trims the edge out of the lower spanning forests
    for key in sorted(st.inc.all_keys(x)):
        w = _other(key, x)
        nj = max(st.layer_of(x), st.layer_of(w))
        old = st.jmax[key]
        if nj > old:
            eid = st.eid_of[key]
            for t in range(old, nj):
                st.msf[t - 1].msf_delete(eid)
            st.jmax[key] = nj
    if jn <= st.r:
        _buffer_insert(st, x, jn, "D", pi=0)
    else:
        assert not st.inc.all_keys(x), "isolated vertex still has edges"
    return core, lx


def _settle(st: LcdState):
    """Drain the dirty-vertex queue: every non-buffer resident that lost
    too much downward degree moves to its buffer, feeding its old core."""
    guard = 0
    while st._pending:
        guard += 1
        if guard > 10000 * (st.n + 1):
            raise LcdError("settle loop did not converge")
        x = min(st._pending)
        st._pending.discard(x)
        if x not in st.pos:
            continue
        j = st.layer_of(x)
        if j > st.r:
            continue
        sub = st.lay[j]
        l = st.pos[x]
        if l == sub.L:
            continue
        ph = sub.phases.get(l)
        if ph is None:
            continue
        deg0 = ph.targets.get(x)
        if deg0 is None:
            continue
        deg = st.deg_below(x, j, l)
        if KEEP_DIV * deg >= deg0:
            continue
        pi = len(st.inc.above.get(x, ()))
        kind = "U1" if pi < NEAR_FACTOR * deg else "U2"
        core, lx = _leave_nonbuffer(st, x, j, l)
        st.pos.pop(x, None)
        _buffer_insert(st, x, j, kind, pi=pi)
        if core is not None and not core.destroyed:
            _detach_feed(st, core, lx)
        _i1_restarts(st, j)


def _repair_links(st: LcdState):
    """Re-validate buffer up-links and residue associations everywhere.
    Runs after _settle, so candidate sets are final for this deletion."""
    for j in range(1, st.r + 1):
        sub = st.lay[j]
        for x in sorted(sub.subs[sub.L]):
            cands = st.upward_keys(x, j, sub.L)
            if not cands:
                raise PhaseBroken(
                    f"buffer vertex {x} in layer {j} lost all upward edges")
            best = min(_other(k, x) for k in cands)
            if sub.buf_up.get(x) != best:
                sub.buf_up[x] = best
                st._touched_verts.add(x)
        for l, ph in sorted(sub.phases.items()):
            for u in sorted(ph.uset):
                cands = st.upward_keys(u, j, l)
                if not cands:
                    if u in ph.assoc:
                        ph.assoc.pop(u)
                        if ph.tree is not None and ph.tree.has_edge(ROOT, u):
                            ph.tree.es_delete(ROOT, u)
                        st._touched_subs.add((j, l))
                        st._touched_verts.add(u)
                    continue
                best = min(_other(k, u) for k in cands)
                if u not in ph.assoc:
                    # candidates only shrink; a fresh link cannot appear
                    raise PhaseBroken(f"residue vertex {u} regrew an edge")
                if ph.assoc[u] != best:
                    ph.assoc[u] = best
                    st._touched_verts.add(u)


# -- edge weights and forests ---------------------------------------------


def _tree_claims(st: LcdState, a, b) -> bool:
    """Does a's parent structure make (a, b) a to-core walk edge?"""
    ja = st.layer_of(a)
    if ja > st.r:
        return False
    la = st.pos.get(a)
    if la is None:
        return False
    sub = st.lay[ja]
    if la == sub.L:
        return sub.buf_up.get(a) == b
    ph = sub.phases.get(la)
    if ph is None or ph.tree is None or not ph.tree.contains(a):
        return False
    par = ph.tree.parent.get(a)
    if par is None:
        return False
    if par[0] == b:
        return True
    return par[0] == ROOT and ph.assoc.get(a) == b


def _edge_weight(st: LcdState, a, b) -> int:
    ka = st.cores_by_vertex.get(a)
    if ka is not None and st.cores_by_vertex.get(b) is ka \
            and ka.edge_alive(a, b):
        return 0
    if _tree_claims(st, a, b) or _tree_claims(st, b, a):
        return 1
    return 2


def _sync_weights(st: LcdState):
    verts = set(st._touched_verts)
    for (j, l) in st._touched_subs:
        sub = st.lay.get(j)
        if sub is not None and l in sub.subs:
            verts |= sub.subs[l]
    for x in sorted(verts):
        for y, _e in st.g.neighbors(x):
            key = _ekey(x, y)
            eid = st.eid_of.get(key)
            if eid is None:
                continue
            w = _edge_weight(st, key[0], key[1])
            for t in range(st.jmax[key], st.r + 1):
                f = st.msf[t - 1]
                if f.edge_info(eid)[2] != w:
                    f.msf_reweight(eid, w)
                    st._work()


# -- build ----------------------------------------------------------------


def lcd_build(g: DynamicGraph, delta: int = 2, q: int = 2,
              params: LcdParams = None, debug: bool = False) -> LcdState:
    """Build the layered structure over a simple unweighted graph.

    Takes ownership of g; all later deletions must go through
    lcd_delete_edge.
    """
    if params is None:
        params = LcdParams.make(g.n, q=q)
    st = LcdState(g, delta, params, debug=debug)
    for j in range(1, st.r + 1):
        st.lay[j] = SublayerState(j, st.layers.config.h(j),
                                  st.layers.n_leq[j - 1])
    for u in range(st.n):
        st.inc.ensure(u)
    for j in range(1, st.r + 1):
        members = st.layers.members_of(j)
        if not members:
            continue
        sub = st.lay[j]
        if sub.L < 2:
            raise LcdError(f"populated layer {j} with a lone buffer sublayer")
        sub.subs[1] = set(members)
        for x in members:
            st.pos[x] = 1
    for (u, v, _len) in sorted(g.edge_list()):
        key = _ekey(u, v)
        ju, jv = st.layer_of(u), st.layer_of(v)
        if ju == jv and ju <= st.r:
            st.inc.by_sub[u].setdefault(1, set()).add(key)
            st.inc.by_sub[v].setdefault(1, set()).add(key)
        else:
            st.inc.by_layer[u].setdefault(jv, set()).add(key)
            st.inc.by_layer[v].setdefault(ju, set()).add(key)
    for j in range(1, st.r + 1):
        if st.lay[j].subs.get(1):
            _start_phase(st, j, 1)
    # spanning forests of the layer prefixes, weighted by structural role
    keys = sorted(_ekey(u, v) for (u, v, _l) in g.edge_list())
    for i, key in enumerate(keys):
        st.eid_of[key] = i
        st.jmax[key] = max(st.layer_of(key[0]), st.layer_of(key[1]))
    for _j in range(1, st.r + 1):
        st.msf.append(MsfState(vertices=range(st.n)))
    for key in keys:
        w = _edge_weight(st, key[0], key[1])
        for t in range(st.jmax[key], st.r + 1):
            st.msf[t - 1].msf_insert(key[0], key[1], st.eid_of[key], w)
    st._pending = set()
    st._touched_verts = set()
    st._touched_subs = set()
    if debug:
        check_invariants(st)
    return st


# -- mutation -------------------------------------------------------------


def lcd_delete_edge(st: LcdState, e) -> ChangeLog:
    u, v = int(e[0]), int(e[1])
    key = _ekey(u, v)
    if key not in st.eid_of:
        raise UnknownEdge(f"({u},{v}) is not an alive edge")
    st.clog = ChangeLog()
    st._pending = set()
    st._touched_verts = {u, v}
    st._touched_subs = set()
    ju, jv = st.layer_of(u), st.layer_of(v)
    pu, pv = st.pos.get(u), st.pos.get(v)
    eid = st.eid_of.pop(key)
    for t in range(st.jmax.pop(key), st.r + 1):
        st.msf[t - 1].msf_delete(eid)
    st.g.delete_between(u, v)
    st.inc.discard_any(u, key)
    st.inc.discard_any(v, key)
    st._pending.update((u, v))
    if ju == jv and ju <= st.r and pu is not None and pu == pv \
            and pu < st.lay[ju].L:
        ph = st.lay[ju].phases.get(pu)
        if ph is not None and ph.tree is not None and ph.tree.has_edge(u, v):
            ph.tree.es_delete(u, v)
            st._touched_subs.add((ju, pu))
    # run the whole layer cascade through the containers first, then the
    # count checks, and only then feed the oracles; an endpoint that left
    # its core hands the dead edge to its own detach feed below
    moved = []
    jset = set()
    for ev in st.layers.on_delete(u, v):
        moved.append(_layer_drop(st, ev.vertex, ev.old_layer, ev.new_layer))
        jset.update(jj for jj in (ev.old_layer, ev.new_layer) if jj <= st.r)
    for jj in sorted(jset):
        _i1_restarts(st, jj)
    ku = st.cores_by_vertex.get(u)
    if ku is not None and ku is st.cores_by_vertex.get(v):
        _core_feed_local(st, ku, ku.fwd[u], ku.fwd[v])
    for core, lx in moved:
        if core is not None and not core.destroyed:
            _detach_feed(st, core, lx)
    _settle(st)
    _repair_links(st)
    _sync_weights(st)
    st._work(4)
    if st.debug:
        check_invariants(st)
    return st.clog


# -- queries --------------------------------------------------------------


def to_core_path(st: LcdState, u) -> list:
    """Walk upward from u to the nearest reachable core vertex.

    Returns the walk as (from, to) real-edge pairs; empty when u already
    sits inside a core.  Positions (layer, sublayer) never increase along
    the walk and strictly decrease whenever the walk switches structure.
    """
    u = int(u)
    if st.layer_of(u) > st.r:
        raise IsolatedVertex(f"vertex {u} has zero virtual degree")
    cap = st.params.c_tcp * _ilg(st.n) ** 3
    out: list = []
    cur = u
    prev_pos = None
    while True:
        if st.core_at(cur) is not None:
            return out
        j = st.layer_of(cur)
        if j > st.r:
            raise PhaseBroken(f"walk fell onto isolated vertex {cur}")
        sub = st.lay[j]
        l = st.pos[cur]
        if prev_pos is not None and (j, l) >= prev_pos:
            raise PhaseBroken("walk failed to move upward")
        prev_pos = (j, l)
        if len(out) > cap:
            raise PhaseBroken(f"to-core walk exceeded {cap} edges")
        if l == sub.L:
            w = sub.buf_up.get(cur)
            if w is None:
                raise PhaseBroken(f"buffer vertex {cur} has no up-link")
            out.append((cur, w))
            cur = w
            continue
        ph = sub.phases.get(l)
        if ph is None or ph.tree is None or ph.tree.level_of(cur) is None:
            raise PhaseBroken(f"vertex {cur} is not tree-reachable")
        chain = list(reversed(ph.tree.es_path(cur)))  # cur .. x1, ROOT
        hop = None
        for a, b in zip(chain, chain[1:]):
            if b == ROOT:
                # a sits next to the virtual root: it is an associated
                # residue vertex, so cross its upward edge
                w = ph.assoc.get(a)
                if w is None:
                    raise PhaseBroken(f"vertex {a} has no upward edge")
                out.append((a, w))
                hop = w
                break
            out.append((a, b))
            if len(out) > cap:
                raise PhaseBroken(f"to-core walk exceeded {cap} edges")
            if st.core_at(b) is not None:
                return out
        if hop is None:
            raise PhaseBroken("tree walk ended without reaching the root")
        cur = hop


def short_core_path(st: LcdState, core: Core, u, v) -> list:
    """Path between two alive members inside one core, as a vertex list."""
    if core is None or core.destroyed:
        raise CoreDestroyed("core is gone")
    u, v = int(u), int(v)
    if u not in core.live:
        raise NotInCore(f"vertex {u} is not an alive member")
    if v not in core.live:
        raise NotInCore(f"vertex {v} is not an alive member")
    if u == v:
        return []
    loc = oracle_query(core.h, core.fwd[u], core.fwd[v])
    st._work(len(loc))
    return [core.back[p] for p in loc]


def _zero_run_end(st, f, x, toward):
    """Farthest vertex toward `toward` with an all-zero subpath from x."""
    if x == toward:
        return x
    lo, hi = 0, 1
    while True:
        w = tt_jump(f, x, toward, hi)
        if w is None:
            hi -= 1
            break
        st._work()
        if tt_weight(f, x, w) > 0:
            break
        if w == toward:
            return toward
        lo = hi
        hi *= 2
    # jump(lo) is all-zero; jump(hi) is known bad or out of range
    while lo < hi:
        mid = (lo + hi + 1) // 2
        w = tt_jump(f, x, toward, mid)
        if w is not None and tt_weight(f, x, w) == 0:
            lo = mid
        else:
            hi = mid - 1
        st._work()
    return tt_jump(f, x, toward, lo)


def _zero_blocks(st, f, u, v) -> list:
    """Maximal weight-zero stretches on the forest path u..v, in order."""
    out: list = []

    def rec(a, b):
        if a == b:
            return
        me = tt_minedge(f, a, b)
        st._work()
        if me is None or me[0] > 0:
            return
        _w, _eid, x, y = me
        start = _zero_run_end(st, f, x, a)
        end = _zero_run_end(st, f, y, b)
        rec(a, start)
        out.append((start, end))
        rec(end, b)

    rec(u, v)
    return out


def short_path(st: LcdState, j, u, v):
    """Short path between u and v inside the layer-j prefix graph.

    Follows the spanning forest, replacing every weight-zero block with a
    core-internal oracle path.  Returns a vertex list, or NOT_CONNECTED.
    """
    u, v = int(u), int(v)
    if not 1 <= j <= st.r:
        raise LayerViolation(f"layer {j} out of range 1..{st.r}")
    if st.layer_of(u) > j:
        raise LayerViolation(f"vertex {u} sits below layer {j}")
    if st.layer_of(v) > j:
        raise LayerViolation(f"vertex {v} sits below layer {j}")
    if u == v:
        return []
    f = st.msf[j - 1]
    if not tt_connect(f, u, v):
        return NOT_CONNECTED
    blocks = _zero_blocks(st, f, u, v)
    path = [u]
    used = set()

    def extend(vertices):
        for x in vertices:
            a = path[-1]
            if x == a:
                continue
            key = _ekey(a, x)
            assert key in st.eid_of, f"edge ({a},{x}) is not alive"
            assert key not in used, f"edge ({a},{x}) repeated on the path"
            used.add(key)
            path.append(x)

    cur = u
    kset = []
    for a, b in blocks:
        extend(f.tree_path(cur, a))
        ka = st.cores_by_vertex.get(a)
        kb = st.cores_by_vertex.get(b)
        assert ka is not None and ka is kb, "block ends must share a core"
        kset.append(ka)
        extend(short_core_path(st, ka, a, b))
        cur = b
    extend(f.tree_path(cur, v))
    assert path[0] == u and path[-1] == v
    for x in path:
        assert st.layer_of(x) <= j, f"path vertex {x} fell below layer {j}"
    # structural audit against the component's live core census
    label = f.component_label(u)
    kc = 0
    for jj in range(1, j + 1):
        for _l, ph in st.lay[jj].phases.items():
            for core in ph.alive_cores():
                anyv = next(iter(core.live))
                if f.component_label(anyv) == label:
                    kc += 1
    assert len(blocks) <= kc, "more zero blocks than live cores"
    tpath = f.tree_path(u, v)
    w2 = 0
    one_blocks = 0
    in_one = False
    for a, b in zip(tpath, tpath[1:]):
        w = f.edge_info(f.forest_neighbors(a)[b])[2]
        if w == 2:
            w2 += 1
        if w == 1 and not in_one:
            one_blocks += 1
        in_one = w == 1
    if kc >= 1:
        assert w2 <= kc - 1, "too many weight-2 edges on the forest path"
        assert one_blocks <= 2 * kc, "too many weight-1 stretches"
        treecap = st.params.c_tcp * _ilg(st.n) ** 3
        cap = (kc - 1) + 2 * kc * treecap
        for core in kset:
            cap += _len_cap(core.h.depth, core.h.q)
        assert len(path) - 1 <= cap, "assembled path exceeds its budget"
    return path


def short_path_quality(st: LcdState) -> Fraction:
    """Smallest coefficient a with every short_path(st, j, ...) output
    within n_j * a / h_j edges, n_j counting the layer-<=j prefix.

    Mirrors the assembled-path budget above; callers measure it once
    after a build and freeze the value for their own thresholds.
    """
    treecap = st.params.c_tcp * _ilg(st.n) ** 3
    best = Fraction(1)
    n_j = 0
    kc = 0
    caps = 0
    for j in range(1, st.r + 1):
        n_j += len(st.layers.members_of(j))
        for _l, ph in st.lay[j].phases.items():
            for core in ph.alive_cores():
                kc += 1
                caps += _len_cap(core.h.depth, core.h.q)
        if n_j == 0:
            continue
        cap_j = max(n_j, (kc - 1) + 2 * kc * treecap + caps)
        best = max(best, Fraction(cap_j * st.lay[j].h, n_j))
    return best


# -- audits ---------------------------------------------------------------


def check_invariants(st: LcdState):
    # vertex partition across layers, positions, and buffers
    for u in range(st.n):
        j = st.layer_of(u)
        if j > st.r:
            assert u not in st.pos, f"isolated vertex {u} holds a position"
            assert not st.inc.all_keys(u), f"isolated {u} keeps incident keys"
            continue
        l = st.pos.get(u)
        assert l is not None, f"vertex {u} has no sublayer position"
        sub = st.lay[j]
        homes = [ll for ll in sub.subs if u in sub.subs[ll]]
        assert homes == [l], f"vertex {u} containers disagree: {homes} vs {l}"
    polylog = (1 + _ilg(st.n)) ** 3
    phi = st.params.phi
    for j in range(1, st.r + 1):
        sub = st.lay[j]
        for l in range(2, sub.L + 1):
            tail = sum(len(sub.subs[i]) for i in range(l, sub.L + 1))
            assert tail * (2 ** (l - 1)) <= sub.nleq0, \
                f"I1 fails at layer {j} sublayer {l}"
        buf = sub.subs[sub.L]
        assert set(sub.bufkind) == buf, f"buffer kinds drifted in layer {j}"
        assert set(sub.buf_up) == buf, f"buffer links drifted in layer {j}"
        for x in buf:
            w = sub.buf_up[x]
            key = _ekey(x, w)
            assert key in st.eid_of, f"up-link ({x},{w}) is dead"
            jw = st.layer_of(w)
            assert jw < j or (jw == j and st.pos[w] < sub.L), \
                f"up-link of {x} does not point upward"
            cands = st.upward_keys(x, j, sub.L)
            assert w == min(_other(k, x) for k in cands), \
                f"up-link of {x} is not the smallest neighbor"
        # lifetime counters against the configured budgets
        mv = sub.moves_total()
        assert mv * (phi ** 3) <= \
            st.params.move_coeff * sub.nleq0 * st.delta, \
            f"too many buffer moves in layer {j}"
        for l, cnt in sub.starts.items():
            assert cnt <= \
                st.params.phase_coeff * (2 ** l) * st.delta * polylog, \
                f"too many phases at ({j},{l})"
        assert sub.cores_created * sub.h <= \
            st.params.core_coeff * sub.nleq0 * st.delta * polylog, \
            f"too many cores created in layer {j}"
        # restarts must be funded by moves: the pivot at l only fires
        # once more than nleq0/2^l vertices sank below it
        for l, cnt in sub.ends.items():
            assert cnt * sub.nleq0 <= mv * (2 ** l), \
                f"unfunded restarts at ({j},{l})"
        for l, ph in sub.phases.items():
            members = sub.subs[l]
            assert l < sub.L, "buffer sublayer cannot hold a phase"
            assert set(ph.targets) >= members, \
                f"phase ({j},{l}) lost degree targets"
            live_cores = ph.alive_cores()
            assert len(live_cores) * (phi ** 2) * sub.h <= \
                CENSUS_COEFF * max(1, len(members)), \
                f"core census violated at ({j},{l})"
            seen_members = set()
            for core in live_cores:
                assert core.live, f"empty core {core.cid} still alive"
                assert core.live <= members, \
                    f"core {core.cid} members left the sublayer"
                assert not (core.live & seen_members), "cores overlap"
                seen_members |= core.live
                assert len(core.live) * CORE_SIZE_DIV >= (phi ** 2) * sub.h, \
                    f"core {core.cid} got too small"
                assert core.fed * WEAR_DIV <= core.phi * core.e0 \
                    or core.fed <= 1, \
                    f"core {core.cid} outlived its wear budget"
                pruned_orig = {core.back[p] for p in oracle_pruned(core.h)}
                assert not (pruned_orig & core.live), \
                    f"core {core.cid} keeps pruned members"
                for (a, b, _w) in core.top_graph().edge_list():
                    oa, ob = core.back[a], core.back[b]
                    if oa in core.live and ob in core.live:
                        assert _ekey(oa, ob) in st.eid_of, \
                            f"core {core.cid} holds a dead edge"
            for x in members:
                deg = st.deg_below(x, j, l)
                assert KEEP_DIV * deg >= ph.targets[x], \
                    f"I2 fails for vertex {x} at ({j},{l})"
                if x in ph.uset:
                    assert st.cores_by_vertex.get(x) is None
                    assert ph.tree.level_of(x) is not None, \
                        f"residue vertex {x} unreachable in its tree"
                    cands = st.upward_keys(x, j, l)
                    if x in ph.assoc:
                        assert cands, f"association of {x} has no backing"
                        assert ph.assoc[x] == min(_other(k, x) for k in cands)
                        assert _ekey(x, ph.assoc[x]) in st.eid_of
                    else:
                        assert not cands, f"vertex {x} missing an association"
    # incident structure covers the alive edges exactly
    for u in range(st.n):
        if st.layer_of(u) > st.r:
            continue
        mine = {_ekey(u, w) for w, _e in st.g.neighbors(u)}
        held = st.inc.all_keys(u)
        assert held == mine, f"incident sets of {u} drifted"
        n_in = len(st.inc.inlayer_keys(u))
        n_by = sum(len(ks) for ks in st.inc.by_layer[u].values())
        assert n_in + n_by == len(mine), f"incident sets of {u} overlap"
        ju, lu = st.layer_of(u), st.pos[u]
        assert not st.inc.by_layer[u].get(ju), \
            f"own-layer edges of {u} left in the plain bucket"
        for ll, ks in st.inc.by_sub[u].items():
            assert ll <= lu, f"refinement of {u} points below its position"
            for key in ks:
                w = _other(key, u)
                assert st.layer_of(w) == ju and st.pos[w] == ll, \
                    f"misplaced refinement key {key} at {u}"
        for key in st.inc.above[u]:
            w = _other(key, u)
            assert st.layer_of(w) == ju and st.pos[w] > lu, \
                f"misfiled above key {key} at {u}"
        for jj, ks in st.inc.by_layer[u].items():
            for key in ks:
                w = _other(key, u)
                assert st.layer_of(w) == jj, f"misbucketed key {key} at {u}"
    # forests: pool membership and weights re-derived from scratch
    for t in range(1, st.r + 1):
        f = st.msf[t - 1]
        want = {st.eid_of[k] for k in st.eid_of if st.jmax[k] <= t}
        assert set(f._edge) == want, f"forest {t} pool drifted"
        for key, eid in st.eid_of.items():
            if st.jmax[key] <= t:
                uu, vv, w = f.edge_info(eid)
                assert _ekey(uu, vv) == key
                assert w == _edge_weight(st, key[0], key[1]), \
                    f"weight of {key} stale in forest {t}"


# -- serialization --------------------------------------------------------


def lcd_state_json(st: LcdState) -> dict:
    layers = {}
    for j in range(1, st.r + 1):
        sub = st.lay[j]
        layers[str(j)] = {
            "h": sub.h,
            "L": sub.L,
            "n0": sub.nleq0,
            "subs": {str(l): sorted(sub.subs[l]) for l in sub.subs
                     if sub.subs[l]},
            "buffer_kinds": {str(v): k for v, k
                             in sorted(sub.bufkind.items())},
            "moves": dict(sub.moves),
            "phase_starts": {str(l): c for l, c in sorted(sub.starts.items())},
            "phase_ends": {str(l): c for l, c in sorted(sub.ends.items())},
            "cores_created": sub.cores_created,
            "phases": {
                str(l): {
                    "serial": ph.serial,
                    "cores": sorted(k.cid for k in ph.alive_cores()),
                    "residue": len(ph.uset),
                }
                for l, ph in sorted(sub.phases.items())
            },
        }
    cores = {}
    for j in range(1, st.r + 1):
        for _l, ph in st.lay[j].phases.items():
            for k in ph.alive_cores():
                cores[str(k.cid)] = {
                    "layer": k.j,
                    "sublayer": k.ell,
                    "members": sorted(k.live),
                    "snapshot_edges": k.e0,
                    "fed": k.fed,
                }
    return {
        "n": st.n,
        "r": st.r,
        "delta": st.delta,
        "phi": str(st.params.phi),
        "q": st.params.q,
        "alive_edges": len(st.eid_of),
        "layers": layers,
        "cores": cores,
        "micros": st.micros,
    }
