"""Placement of netlist cells on Chimera tiles, chain routing and assembly.

Routing runs twice with the same machinery: a global pass on the reduced
graph (one super-vertex per tile shore, with capacities) fixes a corridor per
net, and a detailed pass on the qubit graph inside those corridors produces
vertex-disjoint chains.  Each pass is the resource-sharing loop (repeated
weighted Steiner trees with multiplicative vertex penalties) followed by an
integer selection of one tree per net.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DomainError, PlacementError, RoutingError
from .ising_core import IsingModel, as_fraction, edge_key, fraction_str, graph_from_dict, normalize
from .netlist import Netlist

# ---------------------------------------------------------------------------
# sites


@dataclass(frozen=True, order=True)
class Site:
    footprint: str
    row: int
    col: int
    sub: int = 0  # half-tile index, side*shore+k for a single qubit, orientation bits for a tile

    def to_list(self):
        return [self.footprint, self.row, self.col, self.sub]


def local_to_global(graph, site: Site, q: int) -> int:
    L = graph.shore
    fp = site.footprint
    if fp == "qubit":
        if q != 0:
            raise DomainError("a qubit footprint has only local qubit 0")
        return graph.qubit(site.row, site.col, site.sub // L, site.sub % L)
    side, k = divmod(q % 8, 4)
    if fp == "tile":
        # orientation bit `side` rotates that shore by half its size (a tile automorphism)
        if site.sub >> side & 1:
            k = (k + graph.shore // 2) % graph.shore
        return graph.qubit(site.row, site.col, side, k)
    if fp == "half-tile":
        return graph.qubit(site.row, site.col, side, k + 2 * site.sub)
    if fp == "2-tile":
        return graph.qubit(site.row + q // 8, site.col, side, k)
    raise DomainError(f"unknown footprint {fp!r}")


def site_tiles(site: Site) -> list:
    if site.footprint == "2-tile":
        return [(site.row, site.col), (site.row + 1, site.col)]
    return [(site.row, site.col)]


def orientation(pattern: str, r: int, c: int) -> int:
    """Tile orientation bits alternating between neighbouring cell sites, so
    pins of adjacent cells leave through different connector qubits."""
    if pattern == "grid":
        r, c = r // 2, c // 2
    return (r % 2) | (c % 2) << 1


def candidate_sites(graph, footprint: str, tile, pattern: str = "dense") -> list:
    r, c = tile
    if footprint == "tile":
        return [Site("tile", r, c, orientation(pattern, r, c))]
    if footprint == "half-tile":
        return [Site("half-tile", r, c, h) for h in range(graph.shore // 2)]
    if footprint == "2-tile":
        return [Site("2-tile", r, c)] if r + 1 < graph.rows else []
    if footprint == "qubit":
        return [Site("qubit", r, c, s) for s in range(2 * graph.shore)]
    raise DomainError(f"unknown footprint {footprint!r}")


# ---------------------------------------------------------------------------
# placement


@dataclass
class Placement:
    graph: object
    sites: list  # one Site per netlist cell
    hpwl: int = 0
    history: list = field(default_factory=list)

    def cell_map(self, netlist: Netlist, i: int) -> dict:
        pf = netlist.cells[i].penalty
        return {q: local_to_global(self.graph, self.sites[i], q) for q in pf.variables}

    def occupancy(self, netlist: Netlist) -> dict:
        """Qubit -> owning cell.  A one-qubit cell may sit on another cell's
        pin of the same variable; the pin's owner is kept."""
        occ, var_at = {}, {}
        order = sorted(range(len(self.sites)), key=lambda i: _is_unit_cell(netlist.cells[i]))
        for i in order:
            cell = netlist.cells[i]
            pins = {cell.penalty.inputs[p]: v for p, v in enumerate(cell.variables)}
            for q, g in self.cell_map(netlist, i).items():
                if g in occ:
                    if _is_unit_cell(cell) and var_at.get(g) == pins.get(q):
                        continue
                    raise PlacementError(f"qubit {g} used by cells {occ[g]} and {i}")
                occ[g] = i
                if q in pins:
                    var_at[g] = pins[q]
        return occ

    def to_dict(self, netlist: Netlist) -> dict:
        return {c.name: {"site": self.sites[i].to_list(),
                         "qubits": {str(k): v for k, v in self.cell_map(netlist, i).items()}}
                for i, c in enumerate(netlist.cells)}


def _is_unit_cell(cell) -> bool:
    return cell.cell.footprint == "qubit" and not cell.penalty.ancillas


def _attachments(netlist: Netlist) -> dict:
    """One-qubit cells whose variable is a pin of a larger cell -> (cell, pin)."""
    anchor = {}
    for ci, c in enumerate(netlist.cells):
        if not _is_unit_cell(c):
            for pin, v in enumerate(c.variables):
                anchor.setdefault(v, (ci, pin))
    return {i: anchor[c.variables[0]] for i, c in enumerate(netlist.cells)
            if _is_unit_cell(c) and c.variables[0] in anchor}


def hpwl(netlist: Netlist, sites) -> int:
    total = 0
    for v, pins in netlist.nets.items():
        rows = [sites[ci].row for ci, _ in pins]
        cols = [sites[ci].col for ci, _ in pins]
        total += max(rows) - min(rows) + max(cols) - min(cols)
    return total


PATTERNS = ("grid", "checkerboard", "dense")


def tile_allowed(pattern: str, footprint: str, r: int, c: int) -> bool:
    """Which tiles may host multi-qubit cells.

    grid: even row and even column, so odd rows and columns stay free as
    routing channels.  checkerboard: tiles with even r + c.  dense: any tile.
    Single-qubit cells may go anywhere.
    """
    if footprint == "qubit" or pattern == "dense":
        return True
    if pattern == "grid":
        return r % 2 == 0 and c % 2 == 0
    if pattern == "checkerboard":
        return (r + c) % 2 == 0
    raise DomainError(f"unknown placement pattern {pattern!r}")


class _Annealer:
    def __init__(self, netlist: Netlist, graph, pattern: str, rng: random.Random):
        self.nl = netlist
        self.graph = graph
        self.rng = rng
        self.pattern = pattern
        self.cell_vars = [c.variables for c in netlist.cells]
        self.nets = {v: [ci for ci, _ in pins] for v, pins in netlist.nets.items()}
        self.local = [c.penalty.variables for c in netlist.cells]
        self.sites: list = [None] * len(netlist.cells)
        self.occ: dict = {}
        self.enabled = graph.nodes
        self._cache: dict = {}

    def tile_allowed(self, footprint, r, c) -> bool:
        return tile_allowed(self.pattern, footprint, r, c)

    def qubits(self, i, site):
        key = (i, site)
        out = self._cache.get(key)
        if out is None:
            out = self._cache[key] = [local_to_global(self.graph, site, q) for q in self.local[i]]
        return out

    def fits(self, i, site) -> bool:
        for t in site_tiles(site):
            if not (0 <= t[0] < self.graph.rows and 0 <= t[1] < self.graph.cols):
                return False
        if not self.tile_allowed(site.footprint, site.row, site.col):
            return False
        for g in self.qubits(i, site):
            if g not in self.enabled:
                return False
            o = self.occ.get(g)
            if o is not None and o != i:
                return False
        return True

    def put(self, i, site):
        self.sites[i] = site
        for g in self.qubits(i, site):
            self.occ[g] = i

    def lift(self, i):
        for g in self.qubits(i, self.sites[i]):
            if self.occ.get(g) == i:
                del self.occ[g]

    def var_hpwl(self, v) -> int:
        cs = self.nets[v]
        rows = [self.sites[c].row for c in cs]
        cols = [self.sites[c].col for c in cs]
        return max(rows) - min(rows) + max(cols) - min(cols)

    def cost_of(self, cells) -> int:
        vs = {v for i in cells for v in self.cell_vars[i]}
        return sum(self.var_hpwl(v) for v in vs)

    def tile_order(self):
        R, C = self.graph.rows, self.graph.cols
        cr, cc = (R - 1) / 2, (C - 1) / 2
        tiles = [(r, c) for r in range(R) for c in range(C)]
        tiles.sort(key=lambda t: (max(abs(t[0] - cr), abs(t[1] - cc)), abs(t[0] - cr) + abs(t[1] - cc), t))
        return tiles

    def initial(self):
        order = self._bfs_order()
        tiles = self.tile_order()
        fp_rank = {"2-tile": 0, "tile": 1, "half-tile": 2, "qubit": 3}
        order.sort(key=lambda i: fp_rank[self.nl.cells[i].footprint])  # stable: BFS order within kind
        for i in order:
            fp = self.nl.cells[i].footprint
            placed = False
            anchor = self._anchor(i)
            cand = tiles if anchor is None else sorted(
                tiles, key=lambda t: (abs(t[0] - anchor[0]) + abs(t[1] - anchor[1]), t))
            for t in cand:
                for s in candidate_sites(self.graph, fp, t, self.pattern):
                    if self.fits(i, s):
                        self.put(i, s)
                        placed = True
                        break
                if placed:
                    break
            if not placed:
                raise PlacementError(f"no free {fp} site for cell {self.nl.cells[i].name}")

    def _anchor(self, i):
        """Mean tile of already placed neighbours, for qubit cells."""
        if self.nl.cells[i].footprint != "qubit":
            return None
        pts = [(self.sites[j].row, self.sites[j].col) for v in self.cell_vars[i] for j in self.nets[v]
               if self.sites[j] is not None and j != i]
        if not pts:
            return None
        return (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))

    def _bfs_order(self):
        n = len(self.nl.cells)
        seen = [False] * n
        order = []
        for start in range(n):
            if seen[start]:
                continue
            seen[start] = True
            queue = [start]
            while queue:
                i = queue.pop(0)
                order.append(i)
                for v in self.cell_vars[i]:
                    for j in self.nets[v]:
                        if not seen[j]:
                            seen[j] = True
                            queue.append(j)
        return order

    def random_site(self, i, radius):
        s = self.sites[i]
        r = self.rng.randint(max(0, s.row - radius), min(self.graph.rows - 1, s.row + radius))
        c = self.rng.randint(max(0, s.col - radius), min(self.graph.cols - 1, s.col + radius))
        opts = candidate_sites(self.graph, s.footprint, (r, c), self.pattern)
        return self.rng.choice(opts) if opts else None

    def anneal(self, moves: int, t0: float, t1: float, history: list):
        n = len(self.sites)
        if n < 1 or moves < 1:
            return
        kinds: dict = {}
        for i, c in enumerate(self.nl.cells):
            kinds.setdefault((c.footprint, self.local[i]), []).append(i)
        radius = max(2, max(self.graph.rows, self.graph.cols) // 2)
        cur = hpwl(self.nl, self.sites)
        best = (cur, list(self.sites))
        decay = (t1 / t0) ** (1.0 / moves) if t0 > 0 else 0.0
        T = t0
        for step in range(moves):
            i = self.rng.randrange(n)
            group = kinds[(self.nl.cells[i].footprint, self.local[i])]
            if len(group) > 1 and self.rng.random() < 0.5:
                j = self.rng.choice(group)
                if j == i:
                    continue
                before = self.cost_of((i, j))
                si, sj = self.sites[i], self.sites[j]
                self.lift(i)
                self.lift(j)
                self.put(i, sj)
                self.put(j, si)
                delta = self.cost_of((i, j)) - before
                if not self._accept(delta, T):
                    self.lift(i)
                    self.lift(j)
                    self.put(i, si)
                    self.put(j, sj)
                    delta = 0
            else:
                site = self.random_site(i, radius)
                if site is None or site == self.sites[i]:
                    continue
                old = self.sites[i]
                before = self.cost_of((i,))
                self.lift(i)
                if not self.fits(i, site):
                    self.put(i, old)
                    continue
                self.put(i, site)
                delta = self.cost_of((i,)) - before
                if not self._accept(delta, T):
                    self.lift(i)
                    self.put(i, old)
                    delta = 0
            if delta:
                cur += delta
                history.append(cur)
                if cur < best[0]:
                    best = (cur, list(self.sites))
            T *= decay
            if step % 256 == 0:
                radius = max(1, int(radius * 0.9))
        # restore the best configuration seen
        for i in range(n):
            self.lift(i)
        for i, s in enumerate(best[1]):
            self.put(i, s)

    def _accept(self, delta, T) -> bool:
        if delta <= 0:
            return True
        if T <= 0:
            return False
        return self.rng.random() < math.exp(-delta / T)


def place(netlist: Netlist, graph, seed: int = 0, budget: int | None = None, pattern: str = "dense",
          initial=None, t0: float = 2.0, t1: float = 0.02) -> Placement:
    """Simulated annealing over cell sites minimizing total HPWL.

    `budget` is the number of proposed moves (default 400 per cell).  With
    t0 = 0 only non-worsening moves are accepted.
    """
    if not netlist.cells:
        return Placement(graph, [], 0, [0])
    capacity = len(graph.nodes)
    if netlist.qubit_cost() > capacity:
        raise PlacementError(f"netlist needs {netlist.qubit_cost()} qubits, graph has {capacity}")
    rng = random.Random(seed)
    if initial is not None:
        ann = _Annealer(netlist, graph, pattern, rng)
        for i, s in enumerate(initial):
            if not ann.fits(i, s):
                raise PlacementError(f"initial site {s} does not fit cell {i}")
            ann.put(i, s)
        return _anneal(ann, netlist, budget, t0, t1)
    # unit cells ride on a pin of their variable instead of taking a qubit of their own,
    # which saves routing a branch to them; only the remaining cells are annealed
    attached = _attachments(netlist)
    if not attached:
        ann = _Annealer(netlist, graph, pattern, rng)
        ann.initial()
        return _anneal(ann, netlist, budget, t0, t1)
    free = [i for i in range(len(netlist.cells)) if i not in attached]
    sub = Netlist([netlist.cells[i] for i in free])
    ann = _Annealer(sub, graph, pattern, rng)
    ann.initial()
    inner = _anneal(ann, sub, budget, t0, t1)
    sites: list = [None] * len(netlist.cells)
    for j, i in enumerate(free):
        sites[i] = inner.sites[j]
    for i, (ci, pin) in attached.items():
        g = local_to_global(graph, sites[ci], netlist.cells[ci].penalty.inputs[pin])
        r, c, side, k = graph.coords(g)
        sites[i] = Site("qubit", r, c, side * graph.shore + k)
    return Placement(graph, sites, hpwl(netlist, sites), inner.history)


def _anneal(ann: "_Annealer", netlist: Netlist, budget, t0, t1) -> Placement:
    history = [hpwl(netlist, ann.sites)]
    moves = 400 * len(netlist.cells) if budget is None else budget
    ann.anneal(moves, t0, t1 if t0 > 0 else 0.0, history)
    final = hpwl(netlist, ann.sites)
    history.append(final)
    return Placement(ann.graph, list(ann.sites), final, history)


# ---------------------------------------------------------------------------
# routing graphs


@dataclass
class RoutingGraph:
    vertices: list  # hashable ids
    eu: np.ndarray  # edge endpoints as vertex indices
    ev: np.ndarray
    capacity: np.ndarray
    tile: np.ndarray  # (V, 2) tile coordinates for windowing
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.vertices)}

    @property
    def size(self) -> int:
        return len(self.vertices)

    def neighbors(self, i):
        return np.concatenate((self.ev[self.eu == i], self.eu[self.ev == i]))


def reduce_graph(graph, placement: Placement | None = None, netlist: Netlist | None = None) -> RoutingGraph:
    """One super-vertex per (tile, shore) with capacity = free enabled qubits."""
    used = set(placement.occupancy(netlist)) if placement is not None else set()
    verts, caps, tiles = [], [], []
    for r in range(graph.rows):
        for c in range(graph.cols):
            for side in (0, 1):
                qs = [graph.qubit(r, c, side, k) for k in range(graph.shore)]
                verts.append((r, c, side))
                caps.append(sum(1 for q in qs if q in graph.nodes and q not in used))
                tiles.append((r, c))
    index = {v: i for i, v in enumerate(verts)}
    eu, ev = [], []
    for (r, c, side), i in index.items():
        if side == 0:
            eu.append(i)
            ev.append(index[(r, c, 1)])
            if r + 1 < graph.rows:
                eu.append(i)
                ev.append(index[(r + 1, c, 0)])
        elif c + 1 < graph.cols:
            eu.append(i)
            ev.append(index[(r, c + 1, 1)])
    return RoutingGraph(verts, np.array(eu), np.array(ev), np.array(caps), np.array(tiles).reshape(-1, 2))


def qubit_routing_graph(graph) -> RoutingGraph:
    verts = sorted(graph.nodes)
    index = {q: i for i, q in enumerate(verts)}
    edges = sorted(graph.edges)
    eu = np.array([index[u] for u, _ in edges], dtype=np.int64)
    ev = np.array([index[v] for _, v in edges], dtype=np.int64)
    tiles = np.array([graph.coords(q)[:2] for q in verts]).reshape(-1, 2)
    return RoutingGraph(verts, eu, ev, np.ones(len(verts), dtype=np.int64), tiles)


# ---------------------------------------------------------------------------
# Steiner trees


@dataclass(frozen=True)
class SteinerTree:
    vertices: frozenset  # vertex indices into the routing graph
    edges: tuple  # pairs of vertex indices
    weight: float = 0.0

    @property
    def size(self) -> int:
        return len(self.vertices)


def tree_weight(edges, weights) -> float:
    return float(sum((weights[u] + weights[v]) / 2 for u, v in edges))


class Window:
    """Sparse structure of a routing graph restricted to a vertex mask.

    Built once per net; each Steiner call only refreshes the edge costs.
    """

    def __init__(self, rg: RoutingGraph, allowed=None):
        mask = np.ones(rg.size, dtype=bool) if allowed is None else np.array(allowed, dtype=bool)
        emask = mask[rg.eu] & mask[rg.ev]
        self.eu, self.ev = rg.eu[emask], rg.ev[emask]
        self.sub = np.flatnonzero(mask)
        self.loc = -np.ones(rg.size, dtype=np.int64)
        self.loc[self.sub] = np.arange(len(self.sub))
        self.a, self.b = self.loc[self.eu], self.loc[self.ev]
        n, m = len(self.sub), len(self.a)
        order = np.arange(1, 2 * m + 1, dtype=float)
        self.mat = csr_matrix((order, (np.concatenate((self.a, self.b)), np.concatenate((self.b, self.a)))),
                              shape=(n, n))
        self.perm = self.mat.data.astype(np.int64) - 1

    def costs(self, w):
        data = (w[self.eu] + w[self.ev]) / 2
        self.mat.data = np.concatenate((data, data))[self.perm]
        return data


def steiner_tree(rg: RoutingGraph, terminals, weights, allowed=None, window: Window | None = None) -> SteinerTree:
    """Minimum-spanning-tree 2-approximation with vertex weights.

    Edge (u, v) costs (w_u + w_v) / 2.  Shortest paths from every terminal
    give the metric closure on the terminals; its MST is expanded into graph
    paths, re-spanned by an MST and stripped of non-terminal leaves.
    `allowed` (boolean mask) restricts the search window; terminals are
    always allowed.  A prepared `window` replaces `allowed`.
    """
    terms = sorted({int(t) for t in terminals})
    if not terms:
        raise RoutingError("no terminals")
    if len(terms) == 1:
        return SteinerTree(frozenset(terms), (), 0.0)
    w = np.asarray(weights, dtype=float)
    if window is None:
        mask = np.ones(rg.size, dtype=bool) if allowed is None else np.array(allowed, dtype=bool)
        mask[terms] = True
        window = Window(rg, mask)
    loc, a, b, sub = window.loc, window.a, window.b, window.sub
    if np.any(loc[terms] < 0):
        raise RoutingError("terminal outside the routing window")
    data = window.costs(w)
    n = len(sub)
    mat = window.mat
    tl = loc[terms]
    dist, pred = dijkstra(mat, directed=True, indices=tl, return_predecessors=True)
    if not np.all(np.isfinite(dist[:, tl])):
        raise RoutingError("terminals are not mutually reachable")
    # Prim on the metric closure
    k = len(terms)
    in_tree = [0]
    closure_edges = []
    best = {j: (dist[0, tl[j]], 0) for j in range(1, k)}
    while best:
        j = min(best, key=lambda x: (best[x][0], x))
        d, i = best.pop(j)
        closure_edges.append((i, j))
        in_tree.append(j)
        for x in best:
            if dist[j, tl[x]] < best[x][0]:
                best[x] = (dist[j, tl[x]], j)
    verts = set()
    for i, j in closure_edges:
        node = tl[j]
        verts.add(int(node))
        while node != tl[i]:
            node = pred[i, node]
            verts.add(int(node))
    # MST on the subgraph induced by the path vertices
    vs = sorted(verts)
    inside = np.zeros(n, dtype=bool)
    inside[vs] = True
    em = inside[a] & inside[b]
    cand = sorted(zip(data[em], a[em], b[em]))
    parent = {v: v for v in vs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree_edges = []
    for d, u, v in cand:
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            parent[ru] = rv
            tree_edges.append((int(u), int(v)))
    # prune non-terminal leaves
    tset = set(int(x) for x in tl)
    adj: dict = {v: set() for v in vs}
    for u, v in tree_edges:
        adj[u].add(v)
        adj[v].add(u)
    leaves = [v for v in vs if len(adj[v]) <= 1 and v not in tset]
    while leaves:
        v = leaves.pop()
        if v not in adj:
            continue
        for u in adj.pop(v):
            adj[u].discard(v)
            if len(adj[u]) <= 1 and u not in tset:
                leaves.append(u)
    glob = sub
    edges = tuple(sorted((int(glob[u]), int(glob[v])) for u in adj for v in adj[u] if u < v))
    vertices = frozenset(int(glob[v]) for v in adj)
    return SteinerTree(vertices, edges, tree_weight(edges, w))


def exhaustive_steiner(rg: RoutingGraph, terminals, weights, max_vertices: int = 14) -> float:
    """Optimal Steiner weight by enumerating vertex supersets of the terminals."""
    from itertools import combinations

    if rg.size > max_vertices:
        raise DomainError("graph too large for exhaustive Steiner search")
    terms = sorted(set(int(t) for t in terminals))
    others = [v for v in range(rg.size) if v not in terms]
    w = np.asarray(weights, dtype=float)
    best = math.inf
    edges = [(int(u), int(v)) for u, v in zip(rg.eu, rg.ev)]
    for r in range(len(others) + 1):
        for extra in combinations(others, r):
            vs = set(terms) | set(extra)
            es = sorted(((w[u] + w[v]) / 2, u, v) for u, v in edges if u in vs and v in vs)
            parent = {v: v for v in vs}

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            total, used = 0.0, 0
            for d, u, v in es:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv
                    total += d
                    used += 1
            if used == len(vs) - 1:
                best = min(best, total)
    return best


# ---------------------------------------------------------------------------
# resource sharing and selection


@dataclass
class Distribution:
    trees: list  # distinct SteinerTree
    counts: list
    iterations: int

    @property
    def probabilities(self):
        return [c / self.iterations for c in self.counts]


def route(rg: RoutingGraph, nets: dict, iterations: int = 64, alpha: float = 2.0, allowed=None,
          weights_out: dict | None = None) -> dict:
    """Resource sharing: every iteration routes each net (in sorted order) on
    the current weights, records the tree and multiplies the weight of its
    vertices by alpha**(1/capacity)."""
    if iterations < 1 or alpha <= 1:
        raise DomainError("need iterations >= 1 and alpha > 1")
    w = np.ones(rg.size)
    cap = np.maximum(rg.capacity, 1).astype(float)
    mult = alpha ** (1.0 / cap)
    found: dict = {name: {} for name in nets}
    order = sorted(nets, key=str)
    windows = {}
    for name in order:
        mask = np.ones(rg.size, dtype=bool) if allowed is None or name not in allowed else allowed[name].copy()
        mask[list(nets[name])] = True
        windows[name] = Window(rg, mask)
    for _ in range(iterations):
        for name in order:
            try:
                tree = steiner_tree(rg, nets[name], w, window=windows[name])
            except RoutingError as exc:
                raise RoutingError(f"net {name}: {exc}", name) from None
            key = (tree.vertices, tree.edges)
            if key in found[name]:
                found[name][key][1] += 1
            else:
                found[name][key] = [tree, 1]
            idx = np.fromiter(tree.vertices, dtype=np.int64)
            w[idx] *= mult[idx]
    if weights_out is not None:
        weights_out["weights"] = w
    out = {}
    for name in order:
        items = sorted(found[name].values(), key=lambda t: (-t[1], t[0].size, t[0].edges))
        out[name] = Distribution([t for t, _ in items], [c for _, c in items], iterations)
    return out


def select_trees(distributions: dict, capacity, free: dict | None = None, node_budget: int = 5000):
    """One tree per net, no vertex used beyond its capacity, minimum total size.

    `free[net]` lists vertices the net may use without consuming capacity
    (its own terminals on the reduced graph).  Returns (choice, optimal) or
    (None, False) when no feasible combination was found within the budget.
    """
    free = free or {}
    cap = np.asarray(capacity)
    nets = sorted(distributions, key=lambda n: (len(distributions[n].trees), str(n)))
    cands = {}
    for n in nets:
        fr = set(free.get(n, ()))
        cands[n] = sorted(((t, tuple(sorted(set(t.vertices) - fr))) for t in distributions[n].trees),
                          key=lambda x: (x[0].size, x[0].edges))
    mins = [min(t.size for t, _ in cands[n]) for n in nets]
    suffix = np.concatenate((np.cumsum(mins[::-1])[::-1], [0]))
    load: Counter = Counter()
    full = {int(v) for v in np.flatnonzero(cap <= 0)}
    best = [math.inf, None]
    nodes = [0]

    def add(use):
        for v in use:
            load[v] += 1
            if load[v] >= cap[v]:
                full.add(v)

    def remove(use):
        for v in use:
            load[v] -= 1
            full.discard(v)

    # greedy warm start: most frequent tree that fits
    g_choice, total = {}, 0
    for n in nets:
        fr = set(free.get(n, ()))
        ordered = sorted(zip(distributions[n].trees, distributions[n].counts), key=lambda x: (-x[1], x[0].size))
        for t, _ in ordered:
            use = [v for v in t.vertices if v not in fr]
            if full.isdisjoint(use):
                add(use)
                g_choice[n] = (t, use)
                total += t.size
                break
        else:
            break
    for t, use in g_choice.values():
        remove(use)
    if len(g_choice) == len(nets):
        best = [total, {n: t for n, (t, _) in g_choice.items()}]

    choice = {}

    def dfs(k, cost):
        nodes[0] += 1
        if nodes[0] > node_budget:
            return
        if cost + suffix[k] >= best[0]:
            return
        if k == len(nets):
            best[0], best[1] = cost, dict(choice)
            return
        n = nets[k]
        for t, use in cands[n]:
            if full.isdisjoint(use):
                add(use)
                choice[n] = t
                dfs(k + 1, cost + t.size)
                remove(use)
                if nodes[0] > node_budget:
                    return
        choice.pop(n, None)

    dfs(0, 0)
    if best[1] is None:
        return None, False
    return best[1], nodes[0] <= node_budget


# ---------------------------------------------------------------------------
# full routing


@dataclass
class RoutingSolution:
    chains: dict  # variable -> sorted list of qubits
    chain_edges: dict  # variable -> list of (u, v) qubit pairs
    polarity: dict = field(default_factory=dict)  # qubit -> +1/-1 relative to its variable
    stats: dict = field(default_factory=dict)

    def chain_lengths(self) -> dict:
        return {v: len(q) for v, q in self.chains.items()}


def net_terminals(netlist: Netlist, placement: Placement) -> dict:
    """variable -> list of pin qubits."""
    out: dict = {}
    for i, c in enumerate(netlist.cells):
        m = placement.cell_map(netlist, i)
        for pin, v in enumerate(c.variables):
            out.setdefault(v, []).append(m[c.penalty.inputs[pin]])
    return out


def _tile_mask(rg: RoutingGraph, tiles) -> np.ndarray:
    tiles = set(tiles)
    return np.array([tuple(t) in tiles for t in rg.tile.tolist()], dtype=bool)


def _expand(tiles, margin, rows, cols):
    out = set()
    for r, c in tiles:
        for dr in range(-margin, margin + 1):
            for dc in range(-margin, margin + 1):
                if 0 <= r + dr < rows and 0 <= c + dc < cols:
                    out.add((r + dr, c + dc))
    return out


def _bbox_tiles(tiles, margin, rows, cols):
    rs = [t[0] for t in tiles]
    cs = [t[1] for t in tiles]
    return {(r, c) for r in range(max(0, min(rs) - margin), min(rows, max(rs) + margin + 1))
            for c in range(max(0, min(cs) - margin), min(cols, max(cs) + margin + 1))}


def route_netlist(netlist: Netlist, placement: Placement, iterations: int = 64, alpha: float = 2.0,
                  detail_iterations: int = 8, seed: int = 0, rip_up_rounds: int = 20) -> RoutingSolution:
    graph = placement.graph
    occ = placement.occupancy(netlist)
    terms = net_terminals(netlist, placement)
    multi = {v: ts for v, ts in terms.items() if len(set(ts)) > 1}
    chains = {v: sorted(set(ts)) for v, ts in terms.items()}
    chain_edges = {v: [] for v in terms}
    stats = {"nets": len(terms), "routed_nets": len(multi)}
    if not multi:
        return RoutingSolution(chains, chain_edges, {q: 1 for qs in chains.values() for q in qs}, stats)

    # global pass on the reduced graph
    rg = reduce_graph(graph, placement, netlist)
    gnets = {v: sorted({rg.index[graph.coords(q)[:3]] for q in ts}) for v, ts in multi.items()}
    gdist = route(rg, gnets, iterations, alpha)
    gsel, gopt = select_trees(gdist, rg.capacity, free=gnets)
    if gsel is None:
        gsel = {v: d.trees[0] for v, d in gdist.items()}
    stats["global_optimal"] = bool(gopt)
    corridor = {v: {tuple(rg.tile[i]) for i in gsel[v].vertices} for v in multi}

    # detailed pass on qubits inside the corridors
    qg = qubit_routing_graph(graph)
    pins = {qg.index[q]: v for v, ts in terms.items() for q in ts}
    blocked = np.zeros(qg.size, dtype=bool)
    for q in occ:
        blocked[qg.index[q]] = True
    qnets = {v: sorted({qg.index[q] for q in ts}) for v, ts in multi.items()}

    def mask_for(v, tiles):
        m = _tile_mask(qg, tiles) & ~blocked
        m[qnets[v]] = True
        return m

    dsel, dopt = None, False
    for margin in (1, 2):
        masks = {v: mask_for(v, corridor[v] | _bbox_tiles(corridor[v], margin, graph.rows, graph.cols))
                 for v in multi}
        try:
            ddist = route(qg, qnets, detail_iterations, alpha, masks)
        except RoutingError:
            continue
        dsel, dopt = select_trees(ddist, qg.capacity)
        if dsel is not None:
            stats["detail_margin"] = margin
            break
    stats["detail_optimal"] = bool(dopt)
    if dsel is None:
        dsel = _rip_up_reroute(qg, qnets, blocked, corridor, graph, random.Random(seed), rip_up_rounds)
        stats["rip_up"] = True
    for v, tree in dsel.items():
        chains[v] = sorted(qg.vertices[i] for i in tree.vertices)
        chain_edges[v] = [edge_key(qg.vertices[a], qg.vertices[b]) for a, b in tree.edges]
    polarity = {q: 1 for qs in chains.values() for q in qs}
    stats["max_chain"] = max(len(c) for c in chains.values())
    stats["total_chain_qubits"] = sum(len(c) for c in chains.values())
    return RoutingSolution(chains, chain_edges, polarity, stats)


def _rip_up_reroute(qg, qnets, blocked, corridor, graph, rng, rounds):
    """Negotiated rip-up and reroute.

    Every net is rerouted in turn against the current usage of the others.
    A qubit shared by several nets costs more the more it is shared, and its
    history cost grows each round it stays shared, so nets gradually move
    off contested qubits.  Windows of nets on shared qubits widen by one tile
    per round.
    """
    order = sorted(qnets, key=lambda v: (-len(qnets[v]), str(v)))
    margin = {v: 1 for v in qnets}
    hist = np.zeros(qg.size)
    usage = np.zeros(qg.size, dtype=int)
    result: dict = {}
    pres = 0.5
    failed: list = []
    for _ in range(rounds):
        for v in order:
            if v in result:
                usage[list(result[v].vertices)] -= 1
            tiles = _bbox_tiles(corridor[v], margin[v], graph.rows, graph.cols)
            m = _tile_mask(qg, tiles) & ~blocked
            m[qnets[v]] = True
            cost = (1.0 + hist) * (1.0 + pres * usage)
            try:
                tree = steiner_tree(qg, qnets[v], cost, m)
            except RoutingError:
                margin[v] += 1
                result.pop(v, None)
                continue
            result[v] = tree
            usage[list(tree.vertices)] += 1
        shared = usage > 1
        failed = [v for v in order if v not in result or shared[list(result[v].vertices)].any()]
        if not failed:
            return result
        hist[shared] += 1.0
        pres *= 1.6
        for v in failed:
            margin[v] += 1
        rest = [v for v in order if v not in failed]
        rng.shuffle(rest)
        order = failed + rest
    raise RoutingError(f"could not route nets {failed[:5]} after {rounds} rip-up rounds", failed[0])


# ---------------------------------------------------------------------------
# embedding checks


@dataclass
class EmbeddingReport:
    passed: bool
    violations: list
    max_chain: int
    histogram: dict


def cell_records(netlist: Netlist, placement: Placement) -> list:
    """Per placed cell: pins as (qubit, variable), ancilla qubits and coupled qubit pairs."""
    out = []
    for i, c in enumerate(netlist.cells):
        m = placement.cell_map(netlist, i)
        out.append({
            "name": c.name,
            "tt": c.tt.literal(),
            "variables": list(c.variables),
            "pins": [m[c.penalty.inputs[pin]] for pin in range(len(c.variables))],
            "ancillas": [m[a] for a in c.penalty.ancillas],
            "couplings": [list(edge_key(m[a], m[b])) for a, b in sorted(c.penalty.model.couplings)],
        })
    return out


def check_embedding(chains: dict, chain_edges: dict, cells: list, graph) -> EmbeddingReport:
    """Minor-embedding conditions: chains connected, chains disjoint (from each
    other and from cell ancillas), and every coupling of a cell realized by a
    hardware edge between the qubits of its endpoints."""
    violations = []
    owner: dict = {}
    for v, qs in chains.items():
        for q in qs:
            if q not in graph.nodes:
                violations.append(f"chain {v} uses disabled or missing qubit {q}")
            if q in owner:
                violations.append(f"qubit {q} shared by chains {owner[q]} and {v}")
            owner[q] = v
        if not _connected(qs, graph):
            violations.append(f"chain {v} is not connected")
        for a, b in chain_edges.get(v, []):
            if a not in qs or b not in qs or not graph.has_edge(a, b):
                violations.append(f"chain edge ({a},{b}) of {v} is invalid")
    for c in cells:
        for q, v in zip(c["pins"], c["variables"]):
            if q not in chains.get(v, ()):
                violations.append(f"cell {c['name']}: pin qubit {q} is not in the chain of {v}")
        for q in c["ancillas"]:
            if q in owner:
                violations.append(f"cell {c['name']}: ancilla qubit {q} is also in chain {owner[q]}")
        for u, w in c["couplings"]:
            if not graph.has_edge(u, w):
                violations.append(f"cell {c['name']}: coupling ({u},{w}) is not a hardware edge")
    hist = Counter(len(qs) for qs in chains.values())
    return EmbeddingReport(not violations, violations, max(hist, default=0), dict(sorted(hist.items())))


def verify_embedding(routing: RoutingSolution, netlist: Netlist, graph, placement: Placement | None = None):
    cells = cell_records(netlist, placement) if placement is not None else []
    return check_embedding(routing.chains, routing.chain_edges, cells, graph)


def verify_embedding_dict(d: dict) -> EmbeddingReport:
    """Same checks on a saved embedding file."""
    graph = graph_from_dict(d["graph"])
    chains = {v: [int(q) for q in qs] for v, qs in d["chains"].items()}
    edges = {v: [tuple(e) for e in es] for v, es in d.get("chain_edges", {}).items()}
    return check_embedding(chains, edges, d.get("cells", []), graph)


def _connected(qs, graph) -> bool:
    qs = set(qs)
    if len(qs) <= 1:
        return True
    start = next(iter(qs))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in graph.neighbors(u):
            if w in qs and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == qs


# ---------------------------------------------------------------------------
# assembly


@dataclass
class DecodeMap:
    chains: dict  # variable -> list of qubits
    polarity: dict  # qubit -> +1/-1
    ancillas: list
    source_vars: dict  # CNF variable -> logical variable
    scale: Fraction = Fraction(1)  # normalization factor applied to the summed model
    cells: list = field(default_factory=list)  # per cell: (weight factor, {local: global})

    def to_dict(self) -> dict:
        return {
            "chains": {str(v): qs for v, qs in self.chains.items()},
            "polarity": {str(q): p for q, p in self.polarity.items()},
            "ancillas": list(self.ancillas),
            "source_vars": {str(k): v for k, v in self.source_vars.items()},
            "scale": fraction_str(self.scale),
            "cells": [[fraction_str(f), {str(k): v for k, v in m.items()}] for f, m in self.cells],
        }

    @classmethod
    def from_dict(cls, d) -> "DecodeMap":
        return cls({v: [int(q) for q in qs] for v, qs in d["chains"].items()},
                   {int(q): int(p) for q, p in d["polarity"].items()},
                   [int(q) for q in d["ancillas"]],
                   {int(k): v for k, v in d["source_vars"].items()},
                   as_fraction(d.get("scale", "1")),
                   [(as_fraction(f), {int(k): int(v) for k, v in m.items()}) for f, m in d.get("cells", [])])


def assemble(netlist: Netlist, placement: Placement, routing: RoutingSolution, chain_weight=1,
             weighted: bool = False, normalize_model: bool = True):
    """Sum of the placed cell penalties and the chain penalties.

    Unweighted: cells at their own scale and chain_weight*(1 - z z') per chain
    edge.  Weighted (MaxSAT): cell k is scaled by weight_k / gap_k so a violated
    exact cell costs its weight; chains cost chain_weight per unit as well.
    Cells and chains touch disjoint coefficients, which is asserted, except
    that a one-qubit cell sharing a pin adds its bias to the pin's.
    """
    graph = placement.graph
    chain_weight = as_fraction(chain_weight)
    offset = Fraction(0)
    biases: dict = {}
    couplings: dict = {}
    ancillas = []
    cells = []

    def put(table, key, value, what):
        if key in table:
            raise DomainError(f"coefficient collision on {key} ({what})")
        table[key] = value

    for i, c in enumerate(netlist.cells):
        m = placement.cell_map(netlist, i)
        factor = c.weight / c.penalty.gap if weighted else c.weight
        pm = c.penalty.model
        offset += factor * pm.offset
        for q, v in pm.biases.items():
            if _is_unit_cell(c) and m[q] in biases:
                biases[m[q]] += factor * v
            else:
                put(biases, m[q], factor * v, f"cell {c.name}")
        for (a, b), v in pm.couplings.items():
            put(couplings, edge_key(m[a], m[b]), factor * v, f"cell {c.name}")
        ancillas += [m[a] for a in c.penalty.ancillas]
        cells.append((factor, m))
    lam = chain_weight / 2 if weighted else chain_weight
    for v, edges in routing.chain_edges.items():
        for a, b in edges:
            sign = routing.polarity.get(a, 1) * routing.polarity.get(b, 1)
            offset += lam
            put(couplings, edge_key(a, b), -sign * lam, f"chain {v}")
    model = IsingModel(graph, offset, biases, couplings)
    scale = Fraction(1)
    if normalize_model and not model.is_zero():
        model, scale = normalize(model)
    dm = DecodeMap({v: list(qs) for v, qs in routing.chains.items()}, dict(routing.polarity), sorted(ancillas),
                   dict(netlist.source_vars), scale, cells)
    return model, dm


# ---------------------------------------------------------------------------
# driver and files


@dataclass
class Embedding:
    netlist: Netlist
    placement: Placement
    routing: RoutingSolution
    report: EmbeddingReport
    rounds: int = 1

    def to_dict(self) -> dict:
        return {
            "graph": self.placement.graph.to_dict(),
            "placement": self.placement.to_dict(self.netlist),
            "chains": {str(v): qs for v, qs in self.routing.chains.items()},
            "chain_edges": {str(v): [list(e) for e in es] for v, es in self.routing.chain_edges.items()},
            "chain_signs": {str(v): [self.routing.polarity.get(q, 1) for q in qs]
                            for v, qs in self.routing.chains.items()},
            "cells": cell_records(self.netlist, self.placement),
            "hpwl": self.placement.hpwl,
            "stats": self.routing.stats,
            "report": {"passed": self.report.passed, "violations": self.report.violations,
                       "max_chain": self.report.max_chain,
                       "histogram": {str(k): v for k, v in self.report.histogram.items()}},
        }


def place_and_route(netlist: Netlist, graph, seed: int = 0, rounds: int = 3, pattern: str = "grid",
                    place_budget: int | None = None, iterations: int = 64, alpha: float = 2.0,
                    detail_iterations: int = 8) -> Embedding:
    """Placement followed by routing.  A routing failure re-places with a new
    seed, up to `rounds` attempts.  When the pattern has too few sites the
    next denser pattern is used."""
    if pattern not in PATTERNS:
        raise DomainError(f"unknown placement pattern {pattern!r}")
    patterns = list(PATTERNS[PATTERNS.index(pattern):])
    last = None
    r = 0
    while r < rounds:
        try:
            pl = place(netlist, graph, seed + 7919 * r, place_budget, patterns[0])
        except PlacementError:
            if len(patterns) == 1:
                raise
            patterns.pop(0)
            continue
        try:
            rs = route_netlist(netlist, pl, iterations, alpha, detail_iterations, seed + r)
        except RoutingError as exc:
            last = exc
            r += 1
            continue
        rep = verify_embedding(rs, netlist, graph, pl)
        return Embedding(netlist, pl, rs, rep, r + 1)
    raise RoutingError(f"place and route failed after {rounds} rounds: {last}")


def save_embedding(emb: Embedding, decode_map: DecodeMap, path, problem: dict | None = None):
    d = emb.to_dict()
    d["decode"] = decode_map.to_dict()
    if problem is not None:
        d["problem"] = problem
    with open(path, "w") as fh:
        json.dump(d, fh, indent=1)


def load_embedding(path) -> dict:
    with open(path) as fh:
        d = json.load(fh)
    d["decode_map"] = DecodeMap.from_dict(d["decode"])
    return d
