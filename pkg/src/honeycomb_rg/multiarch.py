"""Multi-arch expansion: packets, arch systems, flyover weights, irreducibility, rings.

Graphs are multigraphs given as lists of edges ``(eid, u, v)``; parallel
edges are distinguished by id. Vertices carry four fields (quartic
vertices); the two external vertices y and z each spend one field on
their external half-line.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .forest import StructuralError

FIELDS_PER_VERTEX = 4


# --- decorated trees and packets ---------------------------------------------

@dataclass
class DecoratedTree:
    n_vertices: int
    edges: list
    y: int
    z: int
    budget: dict = None

    def __post_init__(self):
        if self.y == self.z:
            raise StructuralError("external vertices coincide")
        vs = range(self.n_vertices)
        if self.y not in vs or self.z not in vs:
            raise StructuralError("external vertex out of range")
        if len(self.edges) != self.n_vertices - 1 or not _connected(self.n_vertices, self.edges):
            raise StructuralError("not a tree")
        if self.budget is None:
            self.budget = {v: FIELDS_PER_VERTEX for v in vs}
        for v in vs:
            if self.free_fields(v) < 0:
                raise StructuralError("vertex %d exceeds its field budget" % v)

    def degree(self, v):
        return sum((a == v) + (b == v) for a, b in self.edges)

    def free_fields(self, v):
        return self.budget[v] - self.degree(v) - (v in (self.y, self.z))

    def path(self):
        """Vertices of the tree path from y to z."""
        adj = _adjacency(self.n_vertices, self.edges)
        prev = {self.y: None}
        q = deque([self.y])
        while q:
            a = q.popleft()
            for b in adj[a]:
                if b not in prev:
                    prev[b] = a
                    q.append(b)
        out = [self.z]
        while out[-1] != self.y:
            out.append(prev[out[-1]])
        return out[::-1]

    def tree_graph(self):
        return [(i, a, b) for i, (a, b) in enumerate(self.edges)]


def _adjacency(n, edges):
    adj = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    return adj


def _connected(n, edges):
    if n == 0:
        return True
    adj = _adjacency(n, edges)
    seen = {0}
    stack = [0]
    while stack:
        for b in adj[stack.pop()]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return len(seen) == n


def branches(tree: DecoratedTree):
    """Vertex sets of the branches hanging at each path vertex, in path order."""
    path = tree.path()
    on_path = set(path)
    adj = _adjacency(tree.n_vertices, tree.edges)
    out = []
    for x in path:
        seen = {x}
        stack = [x]
        while stack:
            for b in adj[stack.pop()]:
                if b not in seen and b not in on_path:
                    seen.add(b)
                    stack.append(b)
        out.append(sorted(seen))
    return out


def packets(tree: DecoratedTree):
    """Packets F_0..F_p: remaining fields (vertex, slot) of each branch."""
    out = []
    for br in branches(tree):
        pk = []
        for v in br:
            used = tree.budget[v] - tree.free_fields(v)
            pk.extend((v, s) for s in range(used, tree.budget[v]))
        out.append(pk)
    return out


# --- arch systems ------------------------------------------------------------

@dataclass
class ArchSystem:
    """Arches as (start packet, arrival packet, start vertex, arrival vertex)."""
    arches: list
    p: int
    multiplicity: int = 1

    @property
    def starts(self):
        return [a[0] for a in self.arches]

    @property
    def arrivals(self):
        return [a[1] for a in self.arches]

    def flyover(self):
        return flyover_weights(self.starts, self.arrivals)

    @property
    def useless(self):
        q, _ = self.flyover()
        return [x > 0 for x in q]

    @property
    def minimal(self):
        return not any(self.useless)

    def edges(self, offset):
        return [(offset + i, a[2], a[3]) for i, a in enumerate(self.arches)]


def flyover_weights(starts, arrivals):
    """q_u = #arches v != u with start_v <= start_u and arrival_v > arrival_u.

    Returns (q list, weight prod 1/(q_u + 1)) with the weight as a Fraction.
    """
    m = len(starts)
    q = [sum(1 for v in range(m) if v != u and starts[v] <= starts[u]
             and arrivals[v] > arrivals[u]) for u in range(m)]
    w = Fraction(1)
    for x in q:
        w /= x + 1
    return q, w


def packet_sequences(p, minimal=False):
    """All (starts, arrivals) with s_1 = 0, s_u <= k_{u-1}, k strictly increasing to p.

    With ``minimal`` the starts are strictly increasing as well, which is
    exactly the absence of nested (useless) arches.
    """
    out = []

    def rec(starts, arrivals):
        last = arrivals[-1] if arrivals else 0
        if last == p:
            out.append((tuple(starts), tuple(arrivals)))
            return
        lo = starts[-1] + 1 if (minimal and starts) else 0
        s_range = [0] if not starts else range(lo, last + 1)
        for s in s_range:
            for k in range(last + 1, p + 1):
                rec(starts + [s], arrivals + [k])

    rec([], [])
    return out


def _field_choices(tree, pk_vertices, free, seq):
    """Vertex-level realizations of a packet sequence respecting field budgets.

    Yields (arches, multiplicity) where multiplicity counts field choices.
    """
    starts, arrivals = seq

    def rec(u, free, acc, mult):
        if u == len(starts):
            yield list(acc), mult
            return
        for a in pk_vertices[starts[u]]:
            if free[a] == 0:
                continue
            fa = free[a]
            free[a] -= 1
            for b in pk_vertices[arrivals[u]]:
                if free[b] == 0:
                    continue
                fb = free[b]
                free[b] -= 1
                acc.append((starts[u], arrivals[u], a, b))
                yield from rec(u + 1, free, acc, mult * fa * fb)
                acc.pop()
                free[b] += 1
            free[a] += 1

    yield from rec(0, dict(free), [], 1)


def enumerate_arch_systems(tree: DecoratedTree, minimal=True):
    """Arch systems of a tree at vertex level.

    Field choices at the same vertex give the same graph and are folded
    into ``multiplicity``.
    """
    br = branches(tree)
    p = len(br) - 1
    if p < 1:
        raise StructuralError("need p >= 1")
    free = {v: tree.free_fields(v) for v in range(tree.n_vertices)}
    pk_vertices = [[v for v in b if free[v] > 0] for b in br]
    out = []
    for seq in packet_sequences(p, minimal):
        for arches, mult in _field_choices(tree, pk_vertices, free, seq):
            out.append(ArchSystem(arches, p, mult))
    return out


def flyover_total(tree: DecoratedTree):
    """Sum over all (not only minimal) arch systems of multiplicity * weight.

    Computed at packet level with field counts; exact Fraction.
    """
    pk = packets(tree)
    p = len(pk) - 1
    sizes = [len(x) for x in pk]
    total = Fraction(0)
    count = 0
    for starts, arrivals in packet_sequences(p, minimal=False):
        left = list(sizes)
        mult = 1
        for s, k in zip(starts, arrivals):
            mult *= left[s]
            left[s] -= 1
            mult *= left[k]
            left[k] -= 1
            if mult == 0:
                break
        if mult == 0:
            continue
        count += mult
        total += mult * flyover_weights(starts, arrivals)[1]
    return total, count


def chain_tree(n):
    """Path tree y = 0 - 1 - ... - (n+1) = z with n internal vertices."""
    N = n + 2
    return DecoratedTree(N, [(i, i + 1) for i in range(N - 1)], 0, N - 1)


def loglinear_fit(ns, values):
    """Fit log value = a + n log K; returns (c, K, R^2)."""
    x = np.asarray(ns, float)
    y = np.log(np.asarray(values, float))
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss if ss > 0 else 1.0
    return float(math.exp(a)), float(math.exp(b)), r2


# --- brute-force irreducibility oracles --------------------------------------

def _reach(edges, y, z, skip_edges=(), skip_vertex=None):
    adj = {}
    for eid, a, b in edges:
        if eid in skip_edges or a == skip_vertex or b == skip_vertex:
            continue
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = {y}
    stack = [y]
    while stack:
        for b in adj.get(stack.pop(), ()):
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return z in seen


def is_1pi(edges, y, z):
    """y and z stay connected after deleting any single edge."""
    if not _reach(edges, y, z):
        return False
    return all(_reach(edges, y, z, (e[0],)) for e in edges)


def is_2pi(edges, y, z):
    """y and z stay connected after deleting any two edges."""
    if not is_1pi(edges, y, z):
        return False
    ids = [e[0] for e in edges]
    return all(_reach(edges, y, z, pair) for pair in itertools.combinations(ids, 2))


def is_one_vertex_irreducible(edges, y, z):
    """No vertex other than y, z separates y from z."""
    if not _reach(edges, y, z):
        return False
    verts = {a for _, a, _ in edges} | {b for _, _, b in edges}
    return all(_reach(edges, y, z, skip_vertex=v) for v in verts - {y, z})


# --- flow-based connectivity (infrastructure: networkx) ----------------------

def _flow_graph(edges, split_vertices=False, y=None, z=None):
    """Residual capacities {u: {v: c}} of the y-z flow network.

    Each undirected edge becomes two unit arcs; with ``split_vertices``
    every vertex other than y, z becomes an in/out pair joined by a unit arc.
    """
    cap = {}

    def add(u, v, c):
        cap.setdefault(u, {}).setdefault(v, 0)
        cap.setdefault(v, {}).setdefault(u, 0)
        cap[u][v] += c

    def node(v, side):
        if split_vertices and v not in (y, z):
            return (v, side)
        return v

    if split_vertices:
        verts = {a for _, a, _ in edges} | {b for _, _, b in edges}
        for v in sorted(verts - {y, z}):
            add((v, "in"), (v, "out"), 1)
    for _, a, b in edges:
        add(node(a, "out"), node(b, "in"), 1)
        add(node(b, "out"), node(a, "in"), 1)
    return cap


def _max_flow(cap, s, t):
    """Edmonds-Karp on a residual dict; returns (value, source side of a min cut)."""
    flow = 0
    if s not in cap or t not in cap:
        return 0, {s}
    while True:
        prev = {s: None}
        q = deque([s])
        while q and t not in prev:
            u = q.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in prev:
                    prev[v] = u
                    q.append(v)
        if t not in prev:
            return flow, set(prev)
        v = t
        while prev[v] is not None:
            u = prev[v]
            cap[u][v] -= 1
            cap[v][u] += 1
            v = u
        flow += 1


def edge_flow(edges, y, z):
    """Maximum number of edge-disjoint y-z paths."""
    return _max_flow(_flow_graph(edges), y, z)[0]


def vertex_flow(edges, y, z):
    """Maximum number of internally vertex-disjoint, edge-disjoint y-z paths."""
    return _max_flow(_flow_graph(edges, True, y, z), y, z)[0]


def menger_consistent(edges, y, z):
    """is_2pi <=> edge flow >= 3, and one-vertex irreducibility <=> vertex flow >= 2.

    Menger's vertex form needs y and z non-adjacent: a direct y-z edge
    survives every vertex deletion, so such graphs are irreducible as soon
    as y reaches z.
    """
    a = is_2pi(edges, y, z) == (edge_flow(edges, y, z) >= 3)
    direct = any({u, v} == {y, z} for _, u, v in edges)
    b = is_one_vertex_irreducible(edges, y, z) == (direct or vertex_flow(edges, y, z) >= 2)
    return a and b


def _violation(edges, y, z):
    """Closest violation of 2PI or one-vertex irreducibility, via min cuts.

    Returns None, or (left, right): the vertex sets an extra arch must join.
    """
    cands = []
    val, S = _max_flow(_flow_graph(edges), y, z)
    if val < 3:
        verts = {a for _, a, _ in edges} | {b for _, _, b in edges}
        cands.append((len(S), 0, frozenset(S), frozenset(verts - set(S))))
    # a direct y-z edge survives every vertex deletion; such graphs are
    # one-vertex irreducible as soon as they are 1PI
    direct = any({a, b} == {y, z} for _, a, b in edges)
    val, S = _max_flow(_flow_graph(edges, True, y, z), y, z)
    if val < 2 and not direct:
        # the cut vertex is the one whose in-copy is on the source side only
        cut = {v[0] for v in S if isinstance(v, tuple) and v[1] == "in"} - \
            {v[0] for v in S if isinstance(v, tuple) and v[1] == "out"}
        left = {v if not isinstance(v, tuple) else v[0] for v in S} - cut
        verts = {a for _, a, _ in edges} | {b for _, _, b in edges}
        cands.append((len(left), 1, frozenset(left), frozenset(verts - left - cut)))
    if not cands:
        return None
    cands.sort(key=lambda c: (c[0], c[1], sorted(c[2])))
    return cands[0][2], cands[0][3]


def second_level_systems(edges, y, z, free, max_systems=None):
    """Second-level arch systems completing a 1PI graph to 2PI + one-vertex irreducible.

    Each step locates the violation closest to y by a minimum cut and adds
    an arch joining its two sides, using one free field at each end.
    Returns a sorted list of added-edge tuples (vertex pairs), deduplicated
    as graphs; dead ends (no free fields) are dropped.
    """
    results = set()
    seen = set()
    next_id = max(e[0] for e in edges) + 1

    def key(added):
        return tuple(sorted(tuple(sorted(p)) for p in added))

    def rec(added, free):
        if max_systems is not None and len(results) >= max_systems:
            return
        k = key(added)
        if k in seen:
            return
        seen.add(k)
        cur = edges + [(next_id + i, a, b) for i, (a, b) in enumerate(added)]
        viol = _violation(cur, y, z)
        if viol is None:
            results.add(k)
            return
        left, right = viol
        for a in sorted(left):
            if free.get(a, 0) == 0:
                continue
            for b in sorted(right):
                if free.get(b, 0) == 0:
                    continue
                free[a] -= 1
                free[b] -= 1
                rec(added + [(a, b)], free)
                free[a] += 1
                free[b] += 1

    rec([], dict(free))
    return sorted(results)


# --- rings -------------------------------------------------------------------

@dataclass
class Ring:
    paths: tuple
    edge_ids: tuple
    r_R: int
    ring_max: int
    s_plus: int | None = None
    s_minus: int | None = None
    j_RT: int | None = None
    r_RT: Fraction | None = None


def simple_paths(edges, y, z, allowed=None):
    """All simple y-z paths as tuples of edge ids (parallel edges distinct)."""
    adj = {}
    for eid, a, b in edges:
        if allowed is not None and eid not in allowed:
            continue
        adj.setdefault(a, []).append((b, eid))
        adj.setdefault(b, []).append((a, eid))
    out = []

    def rec(v, visited, path):
        if v == z:
            out.append(tuple(path))
            return
        for b, eid in sorted(adj.get(v, ()), key=lambda t: t[1]):
            if b not in visited:
                visited.add(b)
                path.append(eid)
                rec(b, visited, path)
                path.pop()
                visited.discard(b)

    rec(y, {y}, [])
    return out


def _path_vertices(edges_by_id, path, y):
    vs = [y]
    for eid in path:
        _, a, b = edges_by_id[eid]
        vs.append(b if vs[-1] == a else a)
    return vs


def _biped_ok(edges, ring_ids, biped_nodes, y, z):
    for b in biped_nodes:
        b = set(b)
        ext = [e[0] for e in edges if (e[1] in b) != (e[2] in b)]
        ext_off = sum(1 for e in ext if e not in ring_ids)
        ext_off += sum(1 for v in (y, z) if v in b)
        if ext_off < 2:
            return False
    return True


def _ring_key(p1, p2, label):
    m1 = max(label(e) for e in p1)
    m2 = max(label(e) for e in p2)
    ids = tuple(sorted(p1 + p2))
    return (max(m1, m2), min(m1, m2), ids)


def _make_ring(edges, p1, p2, labels, y, tree_path=None):
    by_id = {e[0]: e for e in edges}
    if (tuple(sorted(p1)), p1) > (tuple(sorted(p2)), p2):
        p1, p2 = p2, p1

    def lab(key, e):
        return labels[e][key] if labels and key in labels.get(e, {}) else e

    def minmax(key):
        return min(max(lab(key, e) for e in p) for p in (p1, p2))

    ring = Ring((tuple(_path_vertices(by_id, p1, y)), tuple(_path_vertices(by_id, p2, y))),
                tuple(sorted(p1 + p2)), minmax("r"),
                max(lab("r", e) for e in p1 + p2))
    if labels and all("s+" in labels.get(e, {}) for e in p1 + p2):
        ring.s_plus = minmax("s+")
        ring.s_minus = minmax("s-")
        j_R = minmax("j")
        j_T = max(labels[e]["j"] for e in tree_path) if tree_path else j_R
        ring.j_RT = min(j_R, j_T)
        ring.r_RT = Fraction(ring.j_RT + ring.s_plus + ring.s_minus, 2)
    return ring


class NoRing(RuntimeError):
    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


def find_ring_bruteforce(edges, y, z, labels=None, biped_nodes=(), tree_path=None):
    """Exhaustive search over pairs of internally vertex-disjoint simple paths.

    Rings are ranked by their largest edge scale, then by the scale
    min_j max_{k in P_j} r(k), then by sorted edge ids.
    """
    by_id = {e[0]: e for e in edges}
    lab = (lambda e: labels[e]["r"]) if labels else (lambda e: e)
    paths = simple_paths(edges, y, z)
    best = None
    for p1, p2 in itertools.combinations(paths, 2):
        inner1 = set(_path_vertices(by_id, p1, y)[1:-1])
        inner2 = set(_path_vertices(by_id, p2, y)[1:-1])
        if inner1 & inner2 or set(p1) & set(p2):
            continue
        if not _biped_ok(edges, set(p1) | set(p2), biped_nodes, y, z):
            continue
        k = _ring_key(p1, p2, lab)
        if best is None or k < best[0]:
            best = (k, p1, p2)
    if best is None:
        raise NoRing("no admissible ring", {"paths": len(paths)})
    return _make_ring(edges, best[1], best[2], labels, y, tree_path)


def find_ring(edges, y, z, labels=None, biped_nodes=(), tree_path=None):
    """Ring via unit vertex-capacity max-flow.

    The smallest edge-scale threshold admitting two vertex-disjoint paths
    is found by max-flow on thresholded subgraphs; rings are then searched
    only inside that subgraph, first path by first path, with a max-flow
    feasibility test for the second path before it is enumerated.
    """
    lab = (lambda e: labels[e]["r"]) if labels else (lambda e: e)
    by_id = {e[0]: e for e in edges}
    if vertex_flow(edges, y, z) < 2:
        raise NoRing("fewer than two vertex-disjoint paths", {"flow": vertex_flow(edges, y, z)})
    thresholds = sorted({lab(e[0]) for e in edges})
    best = None
    for t in thresholds:
        sub = [e for e in edges if lab(e[0]) <= t]
        if vertex_flow(sub, y, z) < 2:
            continue
        for p1 in simple_paths(sub, y, z):
            inner = set(_path_vertices(by_id, p1, y)[1:-1])
            rest = [e for e in sub if e[0] not in p1 and not ({e[1], e[2]} & inner)]
            if not rest or vertex_flow(rest, y, z) < 1:
                continue
            for p2 in simple_paths(rest, y, z):
                if not _biped_ok(edges, set(p1) | set(p2), biped_nodes, y, z):
                    continue
                k = _ring_key(p1, p2, lab)
                if best is None or k < best[0]:
                    best = (k, p1, p2)
        if best is not None:
            break
    if best is None:
        raise NoRing("no ring respects the biped condition", {"biped_nodes": list(biped_nodes)})
    return _make_ring(edges, best[1], best[2], labels, y, tree_path)


# --- tree catalogs -----------------------------------------------------------

def marked_trees(n):
    """Trees on n + 2 vertices with marked y != z, up to isomorphism.

    Vertex degrees respect the field budget (y and z at most 3, others 4).
    Uses networkx for the nonisomorphic tree generator and isomorphism tests.
    """
    import networkx as nx
    from networkx.algorithms.isomorphism import categorical_node_match
    N = n + 2
    out = []
    gens = [nx.path_graph(2)] if N == 2 else nx.nonisomorphic_trees(N)
    match = categorical_node_match("mark", 0)
    for T in gens:
        if max(d for _, d in T.degree()) > FIELDS_PER_VERTEX:
            continue
        reps = []
        for y, z in itertools.permutations(sorted(T.nodes()), 2):
            if T.degree(y) > 3 or T.degree(z) > 3:
                continue
            H = T.copy()
            nx.set_node_attributes(H, 0, "mark")
            H.nodes[y]["mark"] = 1
            H.nodes[z]["mark"] = 2
            if any(nx.is_isomorphic(H, R, node_match=match) for R in reps):
                continue
            reps.append(H)
            out.append(DecoratedTree(N, sorted(tuple(sorted(e)) for e in T.edges()), y, z))
    return out


def first_level_graph(tree: DecoratedTree, system: ArchSystem):
    """Tree edges plus the system's arches as one multigraph."""
    base = tree.tree_graph()
    return base + system.edges(len(base))


def free_after(tree: DecoratedTree, system: ArchSystem):
    free = {v: tree.free_fields(v) for v in range(tree.n_vertices)}
    for _, _, a, b in system.arches:
        free[a] -= 1
        free[b] -= 1
    return free


def second_level_graph(graph, added):
    """First-level multigraph plus the arches of a second-level system."""
    return graph + [(len(graph) + i, a, b) for i, (a, b) in enumerate(added)]


_TREE_POOL = {}


def random_2pi_graph(rng, n_max=6, max_systems=3):
    """A random two-level graph with random scale labels.

    Draws a marked tree with 2..n_max internal vertices, a minimal arch
    system and one of the first ``max_systems`` second-level completions.
    Returns (edges, y, z, labels) with labels {"r", "j", "s+", "s-"}.
    """
    if n_max not in _TREE_POOL:
        _TREE_POOL[n_max] = [t for n in range(2, n_max + 1) for t in marked_trees(n)]
    trees = _TREE_POOL[n_max]
    while True:
        tr = rng.choice(trees)
        s = rng.choice(enumerate_arch_systems(tr))
        g = first_level_graph(tr, s)
        sec = second_level_systems(g, tr.y, tr.z, free_after(tr, s), max_systems=max_systems)
        if not sec:
            continue
        G = second_level_graph(g, rng.choice(sec))
        labels = {e[0]: {"r": rng.randint(1, 6), "j": rng.randint(0, 4),
                         "s+": rng.randint(0, 4), "s-": rng.randint(0, 4)} for e in G}
        return G, tr.y, tr.z, labels
