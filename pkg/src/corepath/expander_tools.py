"""Expander toolbox: strong-expander checks, cut-or-certify, decomposition,
pruning, the cut-matching game, and short-path embeddings.

Conventions shared by everything here:

* graphs are undirected and treated combinatorially (edge lengths ignored);
* "strong" conductance of a cut inside a subgraph divides the subgraph
  boundary by host-graph volumes;
* logs are base 2 and floored at 1 so thresholds stay meaningful on tiny
  instances;
* exact cut enumeration is capped at EXACT_CAP vertices, everything larger
  falls back to a seeded sampled family (sweep cuts, balls, random subsets).
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Optional

import numpy as np

from .es_tree import EsTree
from .graph_core import GraphError, GraphView, UnknownEdge, cut_stats

EXACT_CAP = 20


class ExpanderError(GraphError):
    pass


class TooLargeForExactCheck(ExpanderError):
    pass


class DeletionBudgetExhausted(ExpanderError):
    pass


class UnexpectedSparseCut(ExpanderError):
    """The host was supposed to be an expander but a sparse cut showed up."""

    def __init__(self, cut, conductance):
        super().__init__(f"sparse cut of conductance {conductance}")
        self.cut = cut
        self.conductance = conductance


class DistancePreconditionViolated(ExpanderError):
    pass


class RoundLimitExceeded(ExpanderError):
    pass


class EmbeddingQualityError(ExpanderError):
    pass


def _lg(x) -> float:
    # base-2 log floored at 1; x < 2 collapses to 1
    if x < 2:
        return 1.0
    return max(1.0, math.log2(x))


def gamma_value(n: int) -> Fraction:
    """Default quality factor: (1 + ceil(log2 n))^3, exact."""
    if n < 1:
        raise ValueError(f"n={n}")
    k = max(0, math.ceil(math.log2(n))) if n > 1 else 0
    return Fraction((1 + k) ** 3)


@dataclass(frozen=True)
class ExpanderParams:
    """Knobs for the whole toolbox.

    phi and gamma are exact rationals; the caps derived from them use the
    floored base-2 log of the edge count.
    """

    phi: Fraction
    gamma: Fraction
    cut_balance: Fraction = Fraction(1, 4)
    cut_sparsity: Fraction = Fraction(1, 100)
    c_l: int = 32
    c_eta: int = 1024
    c_phi: int = 4
    c_rounds: int = 8
    exact_cap: int = EXACT_CAP
    seed: int = 0x5EED

    def __post_init__(self):
        for name in ("phi", "gamma", "cut_balance", "cut_sparsity"):
            val = getattr(self, name)
            if val <= 0:
                raise ValueError(f"{name}={val} must be positive")
        if self.phi > 1:
            raise ValueError(f"phi={self.phi} > 1")
        if self.phi * self.gamma > 1:
            raise ValueError(f"phi*gamma = {self.phi * self.gamma} > 1")

    @classmethod
    def for_size(cls, n: int, c_phi: int = 4, **kw) -> "ExpanderParams":
        g = gamma_value(max(2, n))
        return cls(phi=Fraction(1, c_phi) / g, gamma=g, c_phi=c_phi, **kw)

    def path_len_cap(self, m: int) -> int:
        return math.ceil(self.c_l * _lg(m) / float(self.phi))

    def congestion_cap(self, m: int) -> int:
        return math.ceil(self.c_eta * _lg(m) ** 2 / float(self.phi) ** 2)


def _default_params(phi) -> ExpanderParams:
    phi = Fraction(phi)
    gamma = max(Fraction(1), 1 / phi)
    return ExpanderParams(phi=phi, gamma=gamma)


# -- multigraph ----------------------------------------------------------


class MultiGraph:
    """Tiny undirected multigraph; parallel edges count everywhere."""

    def __init__(self, vertices: Iterable[Hashable] = (), edges=()):
        self._adj: dict[Hashable, Counter] = {}
        self._m = 0
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    def add_vertex(self, v):
        self._adj.setdefault(v, Counter())

    def add_edge(self, u, v):
        if u == v:
            raise ValueError(f"self-loop at {u!r}")
        self.add_vertex(u)
        self.add_vertex(v)
        self._adj[u][v] += 1
        self._adj[v][u] += 1
        self._m += 1

    def vertex_list(self) -> list:
        return sorted(self._adj, key=repr)

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def m(self) -> int:
        return self._m

    def degree(self, u) -> int:
        return sum(self._adj[u].values())

    def multiplicity(self, u, v) -> int:
        return self._adj.get(u, Counter()).get(v, 0)

    def max_degree(self) -> int:
        return max((self.degree(u) for u in self._adj), default=0)

    def edge_list(self) -> list[tuple]:
        """Every parallel copy listed once, endpoints in repr order."""
        out = []
        for u in self.vertex_list():
            for v, k in sorted(self._adj[u].items(), key=lambda t: repr(t[0])):
                if repr(u) < repr(v) or (repr(u) == repr(v) and u == v):
                    out.extend([(u, v)] * k)
        return out

    def distinct_edges(self) -> list[tuple]:
        """(u, v, multiplicity) triples, each unordered pair once."""
        out = []
        for u in self.vertex_list():
            for v, k in sorted(self._adj[u].items(), key=lambda t: repr(t[0])):
                if repr(u) < repr(v):
                    out.append((u, v, k))
        return out


def _graph_data(g) -> tuple[list, list[tuple]]:
    """Normalize a GraphView / MultiGraph / (verts, edges) into
    (sorted vertex list, distinct (u, v, mult) edge triples)."""
    if isinstance(g, GraphView):
        verts = sorted(g.vertex_list(), key=repr)
        return verts, [(u, v, 1) for u, v, _ in g.edge_list()]
    if isinstance(g, MultiGraph):
        return g.vertex_list(), g.distinct_edges()
    verts, edges = g
    verts = sorted(verts, key=repr)
    cnt = Counter()
    for e in edges:
        u, v = e[0], e[1]
        key = (u, v) if repr(u) <= repr(v) else (v, u)
        cnt[key] += 1
    return verts, [(u, v, k) for (u, v), k in sorted(cnt.items(), key=repr)]


def _adjacency(verts, triples) -> dict:
    adj = {v: Counter() for v in verts}
    for u, v, k in triples:
        adj[u][v] += k
        adj[v][u] += k
    return adj


# -- exact cut engine ----------------------------------------------------


def _bit_members(nv: int) -> np.ndarray:
    """Membership matrix over every subset that contains vertex 0.

    Row i is the subset with mask 2i+1; the full set is the last row.
    """
    masks = (np.arange(1 << (nv - 1), dtype=np.int64) << 1) | 1
    return ((masks[:, None] >> np.arange(nv)[None, :]) & 1).astype(bool)


def _boundary_vector(mem: np.ndarray, eidx: list[tuple[int, int, int]]):
    out = np.zeros(mem.shape[0], dtype=np.int64)
    for ui, vi, k in eidx:
        out += (mem[:, ui] ^ mem[:, vi]) * k
    return out


class _CutTables:
    """All-bipartition statistics of one small graph, numpy-backed."""

    def __init__(self, verts, triples, host_deg=None):
        self.verts = list(verts)
        self.idx = {v: i for i, v in enumerate(self.verts)}
        nv = len(self.verts)
        self.nv = nv
        deg = np.zeros(nv, dtype=np.int64)
        self.eidx = []
        for u, v, k in triples:
            ui, vi = self.idx[u], self.idx[v]
            deg[ui] += k
            deg[vi] += k
            self.eidx.append((ui, vi, k))
        self.deg = deg
        if host_deg is None:
            self.hdeg = deg
        else:
            self.hdeg = np.array([host_deg[v] for v in self.verts], dtype=np.int64)
        self.mem = _bit_members(nv)
        self.size = self.mem.sum(axis=1).astype(np.int64)
        self.boundary = _boundary_vector(self.mem, self.eidx)
        self.vol = self.mem.astype(np.int64) @ self.hdeg
        self.vol_total = int(self.hdeg.sum())
        self.proper = self.size < nv

    def side(self, row: int, complement=False) -> frozenset:
        bits = self.mem[row]
        if complement:
            bits = ~bits
        return frozenset(self.verts[i] for i in np.nonzero(bits)[0])

    def min_vol(self) -> np.ndarray:
        return np.minimum(self.vol, self.vol_total - self.vol)

    def min_size(self) -> np.ndarray:
        return np.minimum(self.size, self.nv - self.size)


def _violation_rows(tab: _CutTables, phi: Fraction) -> np.ndarray:
    """Rows whose strong conductance against the host volumes drops
    below phi.  Zero-volume sides never violate (vacuous)."""
    denom = tab.min_vol()
    lhs = tab.boundary * phi.denominator
    rhs = phi.numerator * denom
    return np.nonzero(tab.proper & (denom > 0) & (lhs < rhs))[0]


def _worst_violation(tab: _CutTables, rows: np.ndarray) -> int:
    # float ratios only pick the argmin; ties fall back to row order
    ratios = tab.boundary[rows] / np.maximum(tab.min_vol()[rows], 1)
    order = np.lexsort((rows, tab.min_size()[rows], ratios))
    return int(rows[order[0]])


def _small_side(tab: _CutTables, row: int) -> frozenset:
    """The side of a cut with smaller host volume (ties: smaller size,
    then the side holding the first vertex)."""
    vs = int(tab.vol[row])
    vr = tab.vol_total - vs
    sz = int(tab.size[row])
    if vs < vr or (vs == vr and sz <= tab.nv - sz):
        return tab.side(row)
    return tab.side(row, complement=True)


# -- sampled cut family --------------------------------------------------


def _spectral_order(verts, triples, rng) -> list:
    """Vertex order from a power-iteration sweep vector."""
    n = len(verts)
    idx = {v: i for i, v in enumerate(verts)}
    a = np.zeros((n, n))
    deg = np.zeros(n)
    for u, v, k in triples:
        ui, vi = idx[u], idx[v]
        a[ui, vi] += k
        a[vi, ui] += k
        deg[ui] += k
        deg[vi] += k
    scale = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-12)), 0.0)
    m_norm = scale[:, None] * a * scale[None, :]
    top = np.sqrt(np.maximum(deg, 0.0))
    nrm = np.linalg.norm(top)
    if nrm > 0:
        top = top / nrm
    x = np.array([rng.uniform(-1, 1) for _ in range(n)])
    for _ in range(160):
        x = x - top * float(top @ x)
        y = 0.5 * x + 0.5 * (m_norm @ x)
        nr = np.linalg.norm(y)
        if nr < 1e-14:
            break
        x = y / nr
    keyed = sorted(range(n), key=lambda i: (x[i], repr(verts[i])))
    return [verts[i] for i in keyed]


def _candidate_cuts(verts, adj, rng, order=None):
    """A deterministic (seeded) family of candidate cut sides."""
    n = len(verts)
    seen = set()

    def emit(s):
        s = frozenset(s)
        if 0 < len(s) < n and s not in seen:
            seen.add(s)
            return s
        return None

    out = []
    for v in verts:
        c = emit([v])
        if c:
            out.append(c)
    for v in verts:
        ball = {v} | set(adj[v])
        c = emit(ball)
        if c:
            out.append(c)
        ring = set(ball)
        for u in list(ball):
            ring |= set(adj[u])
        c = emit(ring)
        if c:
            out.append(c)
    if order:
        for i in range(1, n):
            c = emit(order[:i])
            if c:
                out.append(c)
    for _ in range(64):
        size = rng.randrange(1, n)
        c = emit(rng.sample(verts, size))
        if c:
            out.append(c)
    for _ in range(32):
        c = emit(rng.sample(verts, n // 2))
        if c:
            out.append(c)
    return out


def _cut_measure(adj, deg_of, s: frozenset):
    """(boundary, vol_s, vol_rest) of one candidate side."""
    boundary = 0
    vol_s = 0
    for u in s:
        vol_s += deg_of(u)
        for v, k in adj[u].items():
            if v not in s:
                boundary += k
    total = sum(deg_of(u) for u in adj)
    return boundary, vol_s, total - vol_s


# -- strong expander check ----------------------------------------------


def is_strong_expander(
    sub: GraphView, host: GraphView, phi, cap: int = EXACT_CAP
) -> tuple[bool, Optional[frozenset]]:
    """Exact check that ``sub`` is a strong phi-expander against ``host``:
    every bipartition's sub-boundary is at least phi times the smaller
    host volume.  Returns (ok, witness); the witness is a most-violating
    side when the check fails."""
    phi = Fraction(phi)
    verts = sorted(sub.vertex_list(), key=repr)
    if len(verts) > cap:
        raise TooLargeForExactCheck(f"{len(verts)} vertices > cap {cap}")
    if len(verts) <= 1:
        return True, None
    host_deg = {v: host.degree(v) for v in verts}
    triples = [(u, v, 1) for u, v, _ in sub.edge_list()]
    tab = _CutTables(verts, triples, host_deg=host_deg)
    rows = _violation_rows(tab, phi)
    if rows.size == 0:
        return True, None
    row = _worst_violation(tab, rows)
    return False, _small_side(tab, row)


def _sampled_violation(verts, triples, host_deg, phi: Fraction, rng):
    """Best violating side found by the sampled family, or None."""
    adj = _adjacency(verts, triples)
    order = _spectral_order(verts, triples, rng) if len(verts) > 2 else None
    total = sum(host_deg[v] for v in verts)

    def hvol(s):
        return sum(host_deg[v] for v in s)

    best = None
    for cand in _candidate_cuts(verts, adj, rng, order):
        boundary = 0
        for u in cand:
            for v, k in adj[u].items():
                if v not in cand:
                    boundary += k
        vs = hvol(cand)
        denom = min(vs, total - vs)
        if denom <= 0:
            continue
        if boundary * phi.denominator < phi.numerator * denom:
            ratio = boundary / denom
            key = (ratio, len(cand), repr(sorted(cand, key=repr)))
            if best is None or key < best[0]:
                side = cand if 2 * vs <= total else frozenset(verts) - cand
                best = (key, side)
    return best[1] if best else None


# -- cut or certify ------------------------------------------------------


@dataclass(frozen=True)
class BalancedCut:
    a: frozenset
    b: frozenset
    crossing: int


@dataclass(frozen=True)
class Certified:
    s: frozenset
    psi_star: Optional[Fraction]
    sampled: bool = False


def _exact_sparsity(verts, triples):
    """(min over proper cuts of boundary/min-side-size, that side).

    None when no proper cut exists (fewer than two vertices)."""
    if len(verts) < 2:
        return None, None
    tab = _CutTables(verts, triples)
    rows = np.nonzero(tab.proper)[0]
    msize = tab.min_size()[rows]
    ratios = tab.boundary[rows] / msize
    order = np.lexsort((rows, msize, ratios))
    row = int(rows[order[0]])
    psi = Fraction(int(tab.boundary[row]), int(tab.min_size()[row]))
    sz = int(tab.size[row])
    small = tab.side(row) if sz <= tab.nv - sz else tab.side(row, complement=True)
    return psi, small


def _sampled_sparsity(verts, triples, rng):
    adj = _adjacency(verts, triples)
    order = _spectral_order(verts, triples, rng) if len(verts) > 2 else None
    best = None
    for cand in _candidate_cuts(verts, adj, rng, order):
        boundary = 0
        for u in cand:
            for v, k in adj[u].items():
                if v not in cand:
                    boundary += k
        denom = min(len(cand), len(verts) - len(cand))
        ratio = Fraction(boundary, denom)
        key = (ratio, denom, repr(sorted(cand, key=repr)))
        if best is None or key < best[0]:
            side = cand if 2 * len(cand) <= len(verts) else frozenset(verts) - cand
            best = (key, ratio, side)
    if best is None:
        return None, None
    return best[1], best[2]


def _sub_triples(triples, keep: frozenset):
    return [(u, v, k) for u, v, k in triples if u in keep and v in keep]


def cut_or_certify(g, params: Optional[ExpanderParams] = None):
    """Either a balanced sparse cut (min side >= max(2, ceil(n/4)),
    crossing <= max(1, floor(n/100))) or a certified half-or-larger subset
    with its measured induced sparsity."""
    verts, triples = _graph_data(g)
    n = len(verts)
    if params is None:
        params = ExpanderParams.for_size(max(2, n))
    if n < 2:
        return Certified(frozenset(verts), None)

    balance_floor = max(2, math.ceil(params.cut_balance * n))
    sparse_cap = max(1, math.floor(params.cut_sparsity * n))
    half = math.ceil(Fraction(n, 2))

    if n <= params.exact_cap:
        tab = _CutTables(verts, triples)
        msize = tab.min_size()
        rows = np.nonzero(tab.proper & (msize >= balance_floor) & (tab.boundary <= sparse_cap))[0]
        if rows.size:
            order = np.lexsort((rows, -msize[rows], tab.boundary[rows]))
            row = int(rows[order[0]])
            sz = int(tab.size[row])
            a = tab.side(row) if sz <= tab.nv - sz else tab.side(row, complement=True)
            b = frozenset(verts) - a
            return BalancedCut(a, b, int(tab.boundary[row]))
        # no qualifying cut: peel toward the best certified half
        cand = frozenset(verts)
        best_psi, best_set = None, cand
        while True:
            psi, small = _exact_sparsity(sorted(cand, key=repr), _sub_triples(triples, cand))
            if psi is not None and (best_psi is None or psi > best_psi):
                best_psi, best_set = psi, cand
            if psi is None or small is None:
                break
            nxt = cand - small
            if len(nxt) < half or len(nxt) == len(cand):
                break
            cand = nxt
        return Certified(best_set, best_psi)

    rng = random.Random(params.seed)
    adj = _adjacency(verts, triples)
    order = _spectral_order(verts, triples, rng)
    best = None
    for cand in _candidate_cuts(verts, adj, rng, order):
        sz = min(len(cand), n - len(cand))
        if sz < balance_floor:
            continue
        boundary = 0
        for u in cand:
            for v, k in adj[u].items():
                if v not in cand:
                    boundary += k
        if boundary > sparse_cap:
            continue
        key = (boundary, -sz, repr(sorted(cand, key=repr)))
        if best is None or key < best[0]:
            side = cand if len(cand) <= n - len(cand) else frozenset(verts) - cand
            best = (key, side, boundary)
    if best:
        a = best[1]
        return BalancedCut(a, frozenset(verts) - a, best[2])
    cand = frozenset(verts)
    best_psi, best_set = None, cand
    for _ in range(8):
        psi, small = _sampled_sparsity(sorted(cand, key=repr), _sub_triples(triples, cand), rng)
        if psi is not None and (best_psi is None or psi > best_psi):
            best_psi, best_set = psi, cand
        if psi is None or small is None:
            break
        nxt = cand - small
        if len(nxt) < half or len(nxt) == len(cand):
            break
        cand = nxt
    return Certified(best_set, best_psi, sampled=True)


# -- cut player ----------------------------------------------------------


@dataclass(frozen=True)
class CutPlayerMove:
    a: frozenset
    b: frozenset
    terminal: bool
    certificate: Optional[Fraction] = None


def cut_player_round(w, params: Optional[ExpanderParams] = None) -> CutPlayerMove:
    """One cut-player move on the witness graph.

    A balanced sparse cut is equalized (the small side padded up to
    floor(n/2) with the smallest vertices of the other side); a certified
    subset S yields the terminal move (V minus S, S)."""
    verts, triples = _graph_data(w)
    n = len(verts)
    if params is None:
        params = ExpanderParams.for_size(max(2, n))
    res = cut_or_certify((verts, [(u, v) for u, v, k in triples for _ in range(k)]), params)
    if isinstance(res, Certified):
        a = frozenset(verts) - res.s
        return CutPlayerMove(a, res.s, True, res.psi_star)
    a = set(res.a)
    need = n // 2 - len(a)
    pad = [v for v in verts if v not in a and v in res.b]
    a.update(pad[:need])
    b = frozenset(verts) - a
    return CutPlayerMove(frozenset(a), b, False)


# -- ball growing --------------------------------------------------------


def _to_adj_simple(h) -> dict:
    if isinstance(h, dict):
        return {u: set(vs) for u, vs in h.items()}
    verts, triples = _graph_data(h)
    adj = {v: set() for v in verts}
    for u, v, _ in triples:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _bfs_dist(adj, sources) -> dict:
    dist = {s: 0 for s in sources}
    frontier = sorted(sources, key=repr)
    d = 0
    while frontier:
        nxt = []
        d += 1
        for u in frontier:
            for v in sorted(adj[u], key=repr):
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def ball_cut(h, s_set, t_set, ell: int) -> frozenset:
    """Grow a ball around the lighter of the two seed sets until its
    boundary dips under (8 log m / ell) of its volume.  Needs the seed
    sets to be further than ell apart."""
    adj = _to_adj_simple(h)
    s_set = frozenset(s_set)
    t_set = frozenset(t_set)
    if not s_set or not t_set:
        raise ValueError("empty seed set")
    m = sum(len(vs) for vs in adj.values()) // 2
    dist_s = _bfs_dist(adj, s_set)
    if any(dist_s.get(t, math.inf) <= ell for t in t_set):
        d = min(dist_s.get(t, math.inf) for t in t_set)
        raise DistancePreconditionViolated(f"dist(S,T) = {d} <= ell = {ell}")
    dist_t = _bfs_dist(adj, t_set)
    radius = ell // 3
    total_vol = 2 * m

    def ball_vol(dist, r):
        return sum(len(adj[v]) for v in dist if dist[v] <= r)

    vol_s_ball = ball_vol(dist_s, radius)
    dist = dist_s if 2 * vol_s_ball <= total_vol else dist_t
    thr = 8.0 * _lg(m) / ell

    # per-radius volumes and boundaries by bucketed prefix sums
    vol_at = [0] * (radius + 2)
    for v, d in dist.items():
        if d <= radius:
            vol_at[d] += len(adj[v])
    bnd_delta = [0] * (radius + 2)
    for u in adj:
        for v in adj[u]:
            if repr(u) < repr(v):
                du = dist.get(u, math.inf)
                dv = dist.get(v, math.inf)
                lo, hi = min(du, dv), max(du, dv)
                if lo > radius:
                    continue
                bnd_delta[int(lo)] += 1
                if hi <= radius:
                    bnd_delta[int(hi)] -= 1
    vol = 0
    bnd = 0
    for i in range(radius + 1):
        vol += vol_at[i]
        bnd += bnd_delta[i]
        if bnd <= thr * vol:
            return frozenset(v for v, d in dist.items() if d <= i)
    raise ExpanderError("ball growing found no sparse radius")


# -- matching player -----------------------------------------------------


@dataclass(frozen=True)
class MatchOutcome:
    pairs: tuple
    paths: tuple


@dataclass(frozen=True)
class CutOutcome:
    x: frozenset
    y: frozenset
    conductance: Fraction


def matching_or_cut(g: GraphView, a_set, b_set, ell: int):
    """One harvest round of the matching player.

    Pulls edge-disjoint short paths between the two seed sets out of an
    auxiliary source/sink tree while they stay within reach.  If the sets
    drift further than ell apart before the harvest reaches the count
    target 8k log(m)/ell^2, a grown sparse cut is returned instead."""
    a_left = sorted(set(a_set), key=repr)
    b_left = sorted(set(b_set), key=repr)
    if set(a_left) & set(b_left):
        raise ValueError("seed sets intersect")
    if len(a_left) > len(b_left):
        raise ValueError(f"|A'|={len(a_left)} > |B'|={len(b_left)}")
    m = g.m
    if not a_left:
        return MatchOutcome((), ())

    k = len(a_left)
    target = 8.0 * k * _lg(m) / (ell * ell)
    src = ("mp#", 0)
    sink = ("mp#", 1)
    edges = [(u, v, 1, eid) for u in g.vertex_list() for v, eid in g.neighbors(u) if u < v]
    edges += [(src, a, 1, ("sa", a)) for a in a_left]
    edges += [(b, sink, 1, ("tb", b)) for b in b_left]
    tree = EsTree(src, ell + 2, edges, vertices=list(g.vertex_list()) + [src, sink])

    used_eids: set = set()
    pairs = []
    paths = []
    a_remaining = set(a_left)
    b_remaining = set(b_left)
    # harvest greedily past the count target; the target only classifies
    # the outcome once the sets drift out of range
    while a_remaining:
        lv = tree.level_of(sink)
        if lv is None or lv > ell + 2:
            break
        walk = tree.es_path(sink)
        tags = tree.es_path_edges(sink)
        inner = walk[1:-1]
        a_v, b_v = inner[0], inner[-1]
        for x, y in zip(walk, walk[1:]):
            tree.es_delete(x, y)
        for tag in tags:
            if isinstance(tag, int):
                used_eids.add(tag)
        pairs.append((a_v, b_v))
        paths.append(tuple(inner))
        a_remaining.discard(a_v)
        b_remaining.discard(b_v)

    if len(paths) >= target:
        return MatchOutcome(tuple(pairs), tuple(paths))

    # too far apart: grow the cut in the graph minus the harvested paths
    adj = {u: set() for u in g.vertex_list()}
    for u in g.vertex_list():
        for v, eid in g.neighbors(u):
            if eid not in used_eids:
                adj[u].add(v)
    z = ball_cut(adj, a_remaining, b_remaining, ell)
    stats = cut_stats(g, z)
    return CutOutcome(z, frozenset(g.vertex_list()) - z, stats.conductance)


# -- embeddings ----------------------------------------------------------


@dataclass
class Embedding:
    """Paths in a host graph realizing guest edges; the recorded length
    and congestion are measured at build time."""

    host: GraphView
    guest_edges: dict
    length: int
    congestion: int

    @classmethod
    def build(cls, host: GraphView, mapping: dict) -> "Embedding":
        pair_ok = {frozenset((u, v)) for u, v, _ in host.edge_list()}
        usage = Counter()
        length = 0
        for key, path in mapping.items():
            a, b = key[-2], key[-1]
            if path[0] != a or path[-1] != b:
                raise ValueError(f"path for {key} joins {path[0]}..{path[-1]}")
            for x, y in zip(path, path[1:]):
                if frozenset((x, y)) not in pair_ok:
                    raise ValueError(f"({x},{y}) is not a host edge")
                usage[frozenset((x, y))] += 1
            length = max(length, len(path) - 1)
        congestion = max(usage.values(), default=0)
        return cls(host, dict(mapping), length, congestion)

    def recompute(self) -> tuple[int, int]:
        usage = Counter()
        length = 0
        for path in self.guest_edges.values():
            for x, y in zip(path, path[1:]):
                usage[frozenset((x, y))] += 1
            length = max(length, len(path) - 1)
        return length, max(usage.values(), default=0)


def terminal_matching(g: GraphView, a_set, b_set, phi, params=None):
    """Match every A vertex to a distinct B vertex along short paths of
    the expander host.  Raises UnexpectedSparseCut when the host turns
    out not to be the expander the caller promised."""
    phi = Fraction(phi)
    if params is None:
        params = _default_params(phi)
    a_sorted = sorted(set(a_set), key=repr)
    b_sorted = sorted(set(b_set), key=repr)
    if set(a_sorted) & set(b_sorted):
        raise ValueError("A and B intersect")
    if len(a_sorted) > len(b_sorted):
        raise ValueError(f"|A|={len(a_sorted)} > |B|={len(b_sorted)}")
    m = g.m
    ell = math.ceil(params.c_l * _lg(m) / float(phi))
    unmatched_a = list(a_sorted)
    unmatched_b = list(b_sorted)
    pairs = []
    mapping = {}
    guard = 0
    while unmatched_a:
        guard += 1
        if guard > len(a_sorted) + ell * ell:
            raise ExpanderError("matching loop failed to make progress")
        out = matching_or_cut(g, unmatched_a, unmatched_b, ell)
        if isinstance(out, CutOutcome):
            raise UnexpectedSparseCut((out.x, out.y), out.conductance)
        got = set()
        for (av, bv), path in zip(out.pairs, out.paths):
            pairs.append((av, bv))
            mapping[(av, bv)] = path
            got.add(av)
            unmatched_b.remove(bv)
        unmatched_a = [v for v in unmatched_a if v not in got]
    return pairs, Embedding.build(g, mapping)


def multigraph_conductance(w: MultiGraph, cap: int = EXACT_CAP, seed: int = 0x5EED):
    """(min conductance, exact?) of a multigraph; None when no proper cut
    with positive volume exists."""
    verts = w.vertex_list()
    n = len(verts)
    if n < 2 or w.m == 0:
        return None, True
    if any(w.degree(v) == 0 for v in verts):
        # a declared vertex without edges disconnects the witness; the
        # zero-volume side would otherwise slip past the cut tables
        return Fraction(0), True
    triples = w.distinct_edges()
    if n <= cap:
        tab = _CutTables(verts, triples)
        denom = tab.min_vol()
        rows = np.nonzero(tab.proper & (denom > 0))[0]
        if rows.size == 0:
            return None, True
        ratios = tab.boundary[rows] / denom[rows]
        order = np.lexsort((rows, ratios))
        row = int(rows[order[0]])
        return Fraction(int(tab.boundary[row]), int(denom[row])), True
    rng = random.Random(seed)
    adj = _adjacency(verts, triples)
    order = _spectral_order(verts, triples, rng)
    deg_of = w.degree
    best = None
    for cand in _candidate_cuts(verts, adj, rng, order):
        boundary, vs, vr = _cut_measure(adj, deg_of, cand)
        denom = min(vs, vr)
        if denom <= 0:
            continue
        val = Fraction(boundary, denom)
        if best is None or val < best:
            best = val
    return best, False


@dataclass
class EmbedResult:
    witness: MultiGraph
    embedding: Embedding
    rounds: int
    conductance: object
    exact: bool


def embed_expander(g: GraphView, terminals, phi, params=None) -> EmbedResult:
    """Play the cut-matching game over the terminal set, realizing every
    matching-player move with short paths in the host expander.  The
    returned witness graph is a union of matchings whose conductance is
    spot-checked against 1/gamma(|T|)."""
    phi = Fraction(phi)
    if params is None:
        params = _default_params(phi)
    terms = sorted(set(terminals), key=repr)
    if not terms:
        raise ValueError("no terminals")
    w = MultiGraph(terms)
    mapping = {}
    rounds = 0
    n_t = len(terms)
    if n_t == 1:
        emb = Embedding.build(g, {})
        return EmbedResult(w, emb, 0, None, True)
    target = Fraction(1) / gamma_value(n_t)

    def spot():
        return multigraph_conductance(w, cap=params.exact_cap, seed=params.seed)

    if n_t <= 3:
        cap = 2 * n_t + 1
        i = 0
        while True:
            if rounds >= cap:
                raise RoundLimitExceeded(f"{rounds} bootstrap rounds")
            t = terms[i % n_t]
            i += 1
            others = [v for v in terms if v != t]
            pairs, emb_b = terminal_matching(g, [t], others, phi, params)
            for av, bv in pairs:
                w.add_edge(av, bv)
                mapping[(rounds, av, bv)] = emb_b.guest_edges[(av, bv)]
            rounds += 1
            cond, exact = spot()
            if cond is not None and cond >= target:
                break
        emb = Embedding.build(g, mapping)
        return EmbedResult(w, emb, rounds, cond, exact)

    cap = params.c_rounds * max(1, math.ceil(math.log2(n_t)))
    terminal_seen = False
    while rounds < cap:
        move = cut_player_round(w, params)
        if move.a:
            match_pairs, emb_round = terminal_matching(g, move.a, move.b, phi, params)
            for av, bv in match_pairs:
                w.add_edge(av, bv)
                mapping[(rounds, av, bv)] = emb_round.guest_edges[(av, bv)]
        rounds += 1
        if move.terminal:
            terminal_seen = True
            break
    if not terminal_seen:
        raise RoundLimitExceeded(f"no certificate within {cap} rounds")
    cond, exact = spot()
    if cond is not None and cond < target:
        raise EmbeddingQualityError(f"witness conductance {cond} < {target}")
    emb = Embedding.build(g, mapping)
    return EmbedResult(w, emb, rounds, cond, exact)


# -- decomposition -------------------------------------------------------


@dataclass(frozen=True)
class DecompResult:
    clusters: tuple
    boundary_edges: int
    budget: Fraction
    quality_ok: bool


def expander_decompose(g: GraphView, phi, params=None) -> DecompResult:
    """Split the vertex set until every piece is a strong phi-expander
    against the original graph (host degrees stay fixed through the
    recursion, which is what the usual self-loop trick buys)."""
    phi = Fraction(phi)
    if params is None:
        params = _default_params(phi)
    verts = sorted(g.vertex_list(), key=repr)
    host_deg = {v: g.degree(v) for v in verts}
    all_triples = [(u, v, 1) for u, v, _ in g.edge_list()]
    rng = random.Random(params.seed)

    clusters = []
    stack = [frozenset(verts)]
    while stack:
        piece = stack.pop()
        pv = sorted(piece, key=repr)
        if len(pv) <= 1:
            clusters.append(piece)
            continue
        triples = _sub_triples(all_triples, piece)
        if len(pv) <= params.exact_cap:
            tab = _CutTables(pv, triples, host_deg=host_deg)
            rows = _violation_rows(tab, phi)
            witness = _small_side(tab, _worst_violation(tab, rows)) if rows.size else None
        else:
            witness = _sampled_violation(pv, triples, host_deg, phi, rng)
        if witness is None:
            clusters.append(piece)
        else:
            stack.append(piece - witness)
            stack.append(frozenset(witness))

    clusters.sort(key=lambda c: repr(sorted(c, key=repr)))
    owner = {}
    for i, c in enumerate(clusters):
        for v in c:
            owner[v] = i
    boundary = sum(1 for u, v, _ in all_triples if owner[u] != owner[v])
    budget = params.gamma * phi * g.m
    return DecompResult(tuple(clusters), boundary, budget, Fraction(boundary) <= budget)


# -- pruning -------------------------------------------------------------


class PrunedExpander:
    """Certify-or-prune maintenance of an expander under deletions.

    Keeps a snapshot of the initial graph, the live adjacency, and a
    monotonically growing pruned set; after every deletion the remainder
    is re-certified as a strong phi/6-expander against the snapshot and
    violating sides get pruned until it passes.
    """

    def __init__(self, view: GraphView, phi, params: Optional[ExpanderParams] = None):
        self.phi = Fraction(phi)
        if not 0 < self.phi <= 1:
            raise ValueError(f"phi={phi}")
        self.params = params if params is not None else _default_params(self.phi)
        self.verts = tuple(sorted(view.vertex_list(), key=repr))
        self.adj0 = {u: set() for u in self.verts}
        for u, v, _ in view.edge_list():
            self.adj0[u].add(v)
            self.adj0[v].add(u)
        self.deg0 = {u: len(self.adj0[u]) for u in self.verts}
        self.m0 = sum(self.deg0.values()) // 2
        self.adj = {u: set(vs) for u, vs in self.adj0.items()}
        self.pruned: set = set()
        self.t = 0
        self.budget = max(1, int(self.phi * self.m0 / 10))
        self._rng = random.Random(self.params.seed)

    @property
    def pruned_set(self) -> frozenset:
        return frozenset(self.pruned)

    def vol_initial(self, s) -> int:
        return sum(self.deg0[v] for v in s)

    def boundary_initial(self, s) -> int:
        s = set(s)
        return sum(1 for u in s for v in self.adj0[u] if v not in s)

    def remainder(self) -> list:
        return [v for v in self.verts if v not in self.pruned]

    def remainder_edge_list(self) -> list[tuple]:
        out = []
        for u in self.verts:
            if u in self.pruned:
                continue
            for v in self.adj[u]:
                if v not in self.pruned and repr(u) < repr(v):
                    out.append((u, v))
        return out

    def _settle(self) -> list:
        """Prune violating sides until the remainder re-certifies."""
        phi6 = self.phi / 6
        newly = []
        while True:
            rem = [v for v in self.verts if v not in self.pruned]
            if len(rem) <= 1:
                break
            triples = [
                (u, v, 1)
                for u in rem
                for v in self.adj[u]
                if v not in self.pruned and repr(u) < repr(v)
            ]
            if len(rem) <= self.params.exact_cap:
                tab = _CutTables(rem, triples, host_deg=self.deg0)
                rows = _violation_rows(tab, phi6)
                if rows.size == 0:
                    break
                # least-volume violating side keeps the bullets tight
                denom = tab.min_vol()
                cand = rows[np.lexsort((rows, tab.min_size()[rows], denom[rows]))[0]]
                side = _small_side(tab, int(cand))
            else:
                side = self._stray_components(rem)
                if side is None:
                    side = _sampled_violation(rem, triples, self.deg0, phi6, self._rng)
                if side is None:
                    break
            self.pruned.update(side)
            newly.extend(side)
        return sorted(newly, key=repr)

    def _stray_components(self, rem) -> Optional[set]:
        """Everything outside the heaviest component; cut sampling can miss
        a zero-boundary split, so components are checked directly."""
        seen: set = set()
        comps = []
        for s in rem:
            if s in seen:
                continue
            comp = {s}
            queue = [s]
            while queue:
                u = queue.pop()
                for v in self.adj[u]:
                    if v not in self.pruned and v not in comp:
                        comp.add(v)
                        queue.append(v)
            seen |= comp
            comps.append(comp)
        if len(comps) <= 1:
            return None
        comps.sort(key=lambda c: (self.vol_initial(c), min(repr(v) for v in c)))
        out: set = set()
        for c in comps[:-1]:
            out |= c
        return out


def prune_init(g: GraphView, phi, params=None) -> PrunedExpander:
    return PrunedExpander(g, phi, params)


def prune_delete(p: PrunedExpander, e) -> list:
    """Feed one edge deletion; returns the newly pruned vertices.

    Blowing the deletion budget destroys the structure: the pruned set
    jumps to the full vertex set and the error is raised."""
    u, v = e
    if p.t + 1 > p.budget:
        p.pruned = set(p.verts)
        raise DeletionBudgetExhausted(f"deletion {p.t + 1} > budget {p.budget}")
    if v not in p.adj.get(u, ()):
        raise UnknownEdge(f"({u!r},{v!r}) not alive")
    p.adj[u].discard(v)
    p.adj[v].discard(u)
    p.t += 1
    return p._settle()
