"""Forests, layered jungles, interpolation matrices and Gallavotti-Nicolo trees.

A jungle on vertices 1..n is stored as its final forest together with a
layer label 1..m per edge; layer k of the jungle is the subforest of
edges with label <= k. Every labeling of a forest is a valid jungle.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

import numpy as np

MAX_FOREST_N = 7


class SizeRefusal(ValueError):
    """Enumeration refused because the output would be too large."""

    def __init__(self, n, count):
        super().__init__("refusing n=%d: would produce %d forests" % (n, count))
        self.n = n
        self.count = count


class StructuralError(ValueError):
    """Inconsistent combinatorial input."""


class _DSU:
    def __init__(self, n):
        self.p = list(range(n + 1))

    def find(self, a):
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.p[max(ra, rb)] = min(ra, rb)
        return True


@dataclass(frozen=True)
class Forest:
    n: int
    edges: tuple

    def __post_init__(self):
        d = _DSU(self.n)
        for u, v in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n) or u == v:
                raise StructuralError("edge %r out of range" % ((u, v),))
            if not d.union(u, v):
                raise StructuralError("edge %r closes a cycle" % ((u, v),))

    @property
    def is_spanning_tree(self):
        return len(self.edges) == self.n - 1

    def components(self):
        return components(self.n, self.edges)


def components(n, edges):
    """Connected components as sorted tuples, ordered by smallest vertex."""
    d = _DSU(n)
    for u, v in edges:
        d.union(u, v)
    groups = {}
    for i in range(1, n + 1):
        groups.setdefault(d.find(i), []).append(i)
    return sorted(tuple(g) for g in groups.values())


def forest_count(n):
    """Number of labeled forests on n vertices by the root-component recurrence."""
    a = [1]
    for m in range(1, n + 1):
        a.append(sum(math.comb(m - 1, k - 1) * k ** max(k - 2, 0) * a[m - k]
                     for k in range(1, m + 1)))
    return a[n]


def all_pairs(n):
    return [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]


def enumerate_forests(n):
    """All forests on vertices 1..n, edges in lexicographic order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_FOREST_N:
        raise SizeRefusal(n, forest_count(n))
    pairs = all_pairs(n)
    out = []

    def rec(start, chosen, parent):
        out.append(Forest(n, tuple(chosen)))
        for i in range(start, len(pairs)):
            u, v = pairs[i]
            ru, rv = _find(parent, u), _find(parent, v)
            if ru == rv:
                continue
            p2 = list(parent)
            p2[max(ru, rv)] = min(ru, rv)
            chosen.append(pairs[i])
            rec(i + 1, chosen, p2)
            chosen.pop()

    rec(0, [], list(range(n + 1)))
    return out


def _find(parent, a):
    while parent[a] != a:
        a = parent[a]
    return a


def spanning_trees(n):
    return [f for f in enumerate_forests(n) if f.is_spanning_tree]


@dataclass(frozen=True)
class Jungle:
    """Final forest with a layer label per edge; layers are 1..m."""
    forest: Forest
    layers: tuple
    m: int

    def __post_init__(self):
        if len(self.layers) != len(self.forest.edges):
            raise StructuralError("one layer label per edge")
        if any(not 1 <= k <= self.m for k in self.layers):
            raise StructuralError("layer labels must lie in 1..m")

    @property
    def n(self):
        return self.forest.n

    @property
    def connected(self):
        return self.forest.is_spanning_tree

    def layer_edges(self, k):
        """Edges of the forest F_k (labels <= k); F_0 is empty."""
        return tuple(e for e, l in zip(self.forest.edges, self.layers) if l <= k)

    def layer_forests(self):
        return [self.layer_edges(k) for k in range(self.m + 1)]

    def to_json(self):
        return {"n": self.n, "m": self.m,
                "edges": [list(e) for e in self.forest.edges],
                "layers": list(self.layers)}


def enumerate_jungles(n, m, connected=False):
    """All m-layer jungles on n vertices: forests outermost, labels inner."""
    forests = spanning_trees(n) if connected else enumerate_forests(n)
    for f in forests:
        for labels in itertools.product(range(1, m + 1), repeat=len(f.edges)):
            yield Jungle(f, labels, m)


def random_jungle(n, m, rng: random.Random, connected=True):
    """Random jungle: random spanning tree (or forest), random layer labels."""
    if connected:
        edges = _random_tree(n, rng)
    else:
        edges = [e for e in _random_tree(n, rng) if rng.random() < 0.7]
    edges = tuple(sorted(edges))
    return Jungle(Forest(n, edges), tuple(rng.randint(1, m) for _ in edges), m)


def _random_tree(n, rng):
    if n < 2:
        return []
    if n == 2:
        return [(1, 2)]
    prufer = [rng.randint(1, n) for _ in range(n - 2)]
    degree = [1] * (n + 1)
    for x in prufer:
        degree[x] += 1
    edges = []
    for x in prufer:
        leaf = min(i for i in range(1, n + 1) if degree[i] == 1)
        edges.append(tuple(sorted((leaf, x))))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(1, n + 1) if degree[i] == 1]
    edges.append((u, v))
    return edges


def _tree_path(n, edges, i, j):
    """Edge indices on the path from i to j in a forest, or None."""
    adj = {v: [] for v in range(1, n + 1)}
    for idx, (u, v) in enumerate(edges):
        adj[u].append((v, idx))
        adj[v].append((u, idx))
    prev = {i: None}
    stack = [i]
    while stack:
        a = stack.pop()
        for b, idx in adj[a]:
            if b not in prev:
                prev[b] = (a, idx)
                stack.append(b)
    if j not in prev:
        return None
    path = []
    while prev[j] is not None:
        j, idx = prev[j]
        path.append(idx)
    return path


def interpolation_matrix(jungle: Jungle, w, layer=None):
    """BKAR interpolation matrix of one layer of a jungle.

    Entries: 1 on the diagonal and for pairs already joined by the
    previous layer; the infimum of w over this layer's edges on the
    connecting path for pairs first joined in this layer; 0 otherwise.

    Parameters
    ----------
    jungle : Jungle
    w : sequence of edge weights in [0, 1], aligned with jungle.forest.edges
    layer : int, default the last layer m
    """
    k = jungle.m if layer is None else layer
    w = np.asarray(w, float)
    if w.shape != (len(jungle.forest.edges),):
        raise StructuralError("one weight per edge")
    if np.any((w < 0) | (w > 1)):
        raise ValueError("weights must lie in [0, 1]")
    n = jungle.n
    edges = jungle.forest.edges
    prev = components(n, jungle.layer_edges(k - 1))
    comp = {v: c for c, g in enumerate(prev) for v in g}
    cur_idx = [i for i, l in enumerate(jungle.layers) if l <= k]
    cur = [edges[i] for i in cur_idx]
    X = np.eye(n)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if comp[i] == comp[j]:
                x = 1.0
            else:
                path = _tree_path(n, cur, i, j)
                if path is None:
                    x = 0.0
                else:
                    x = min(w[cur_idx[p]] for p in path if jungle.layers[cur_idx[p]] == k)
            X[i - 1, j - 1] = X[j - 1, i - 1] = x
    return X


def psd_check(X, tol=1e-10):
    """(passes, min eigenvalue) for a symmetric matrix."""
    X = np.asarray(X, float)
    if not np.allclose(X, X.T):
        return False, -math.inf
    lam = float(np.linalg.eigvalsh(X).min())
    return lam >= -tol, lam


def psd_sweep(n, draws=1000, m=3, seed=0):
    """Random (jungle, w) draws; returns (passes, min eigenvalue, witness)."""
    rng = random.Random(seed)
    worst = math.inf
    witness = None
    for _ in range(draws):
        jg = random_jungle(n, m, rng, connected=rng.random() < 0.5)
        w = [rng.random() for _ in jg.forest.edges]
        for k in range(1, m + 1):
            ok, lam = psd_check(interpolation_matrix(jg, w, k))
            if lam < worst:
                worst = lam
                if not ok:
                    witness = (jg, w, k)
    return worst >= -1e-10, worst, witness


# --- Gallavotti-Nicolo trees -------------------------------------------------

@dataclass
class GNNode:
    r: int
    vertices: tuple
    external: int
    children: list = field(default_factory=list)
    parent: tuple | None = None


@dataclass
class GNTree:
    jungle: Jungle
    r_max: int
    nodes: dict
    field_scale: dict
    counts: list

    def roots(self):
        return [key for key, nd in self.nodes.items() if nd.r == self.r_max]


def default_field_assignment(jungle: Jungle, degrees=None):
    """Assign each edge the lowest free field slot at both endpoints."""
    n = jungle.n
    if degrees is None:
        deg = {v: 0 for v in range(1, n + 1)}
        for u, v in jungle.forest.edges:
            deg[u] += 1
            deg[v] += 1
        # quartic vertices; trees with a vertex of degree > 4 get an even field count
        degrees = {v: max(4, d + d % 2) for v, d in deg.items()}
    used = {v: 0 for v in range(1, n + 1)}
    out = []
    for u, v in jungle.forest.edges:
        out.append(((u, used[u]), (v, used[v])))
        used[u] += 1
        used[v] += 1
    return out, degrees


def build_gn_tree(jungle: Jungle, field_assignment=None, degrees=None):
    """GN tree of a jungle with explicit fields.

    Parameters
    ----------
    field_assignment : list of ((u, slot), (v, slot)) per edge
        the two fields contracted by each edge.
    degrees : dict vertex -> number of fields (4 quartic, 2 counter-term)

    A field contracted by an edge of layer r has scale r_f = r; fields
    left uncontracted are external with r_f = r_max + 1, r_max = m.
    """
    if field_assignment is None:
        field_assignment, degrees = default_field_assignment(jungle, degrees)
    degrees = degrees or {v: 4 for v in range(1, jungle.n + 1)}
    r_max = jungle.m
    all_fields = [(v, s) for v in range(1, jungle.n + 1) for s in range(degrees[v])]
    scale = {f: r_max + 1 for f in all_fields}
    if len(field_assignment) != len(jungle.forest.edges):
        raise StructuralError("one field pair per edge")
    seen = set()
    for (u, v), l, pair in zip(jungle.forest.edges, jungle.layers, field_assignment):
        for f, end in zip(pair, (u, v)):
            f = tuple(f)
            if f not in scale:
                raise StructuralError("field %r does not exist" % (f,))
            if f[0] != end:
                raise StructuralError("field %r is not attached to vertex %d" % (f, end))
            if f in seen:
                raise StructuralError("field %r contracted twice" % (f,))
            seen.add(f)
            scale[f] = l
    nodes = {}
    counts = []
    for r in range(0, r_max + 1):
        comps = components(jungle.n, jungle.layer_edges(r))
        counts.append(len(comps))
        for k, g in enumerate(comps):
            ext = sum(1 for f in all_fields if f[0] in g and scale[f] > r)
            nodes[(r, k)] = GNNode(r, g, ext)
    for (r, k), nd in nodes.items():
        if r == 0:
            continue
        for (r2, k2), ch in nodes.items():
            if r2 == r - 1 and set(ch.vertices) <= set(nd.vertices):
                if ch.parent is not None:
                    raise StructuralError("node %r has two parents" % ((r2, k2),))
                ch.parent = (r, k)
                nd.children.append((r2, k2))
    return GNTree(jungle, r_max, nodes, scale, counts)


def verify_induction(tree: GNTree):
    """Both scale-bookkeeping identities on integer exponents (units of 1/4).

    First: sum_f (-2 r_f) == sum_{r=0}^{r_max} sum_k (-2 e(G_r^k)),
    the exponents of prod_f gamma^{-r_f/2} and prod gamma^{-e/2}.
    Second: sum_l 8 r_l == sum_{r=0}^{r_max} 8 (c(r) - c(r_max)),
    the exponents of prod_l gamma^{2 r_l} and gamma^{2 sum (c(r)-1)} for
    connected jungles.
    Returns a dict of the four integers and the pass flags.
    """
    lhs1 = sum(-2 * rf for rf in tree.field_scale.values())
    rhs1 = sum(-2 * nd.external for nd in tree.nodes.values())
    lhs2 = sum(8 * l for l in tree.jungle.layers)
    c_top = tree.counts[-1]
    rhs2 = sum(8 * (c - c_top) for c in tree.counts)
    parents_ok = all(nd.parent is not None for nd in tree.nodes.values() if nd.r < tree.r_max)
    return {"induc1": (lhs1, rhs1), "induc2": (lhs2, rhs2),
            "pass1": lhs1 == rhs1, "pass2": lhs2 == rhs2,
            "tree": parents_ok, "pass": lhs1 == rhs1 and lhs2 == rhs2 and parents_ok}


def power_count(external):
    """Scaling exponent 2 - e/2 and the relevance tag of a node with e fields."""
    if external % 2 or external < 2:
        raise StructuralError("external field count must be even and >= 2")
    exponent = 2 - external // 2
    tag = {2: "relevant", 4: "marginal"}.get(external, "irrelevant")
    return exponent, tag
