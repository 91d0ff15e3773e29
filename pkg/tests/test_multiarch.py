import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeycomb_rg import multiarch
from honeycomb_rg.forest import StructuralError
from honeycomb_rg.multiarch import DecoratedTree


def test_flyover_nested_pair():
    q, w = multiarch.flyover_weights((0, 0), (1, 2))
    assert q == [1, 0] and w == Fraction(1, 2)


def _sequences_brute(p, minimal):
    out = set()
    for m in range(1, p + 1):
        for arr in itertools.combinations(range(1, p + 1), m):
            if arr[-1] != p:
                continue
            for st_ in itertools.product(range(p + 1), repeat=m):
                if st_[0] != 0 or any(st_[u] > arr[u - 1] for u in range(1, m)):
                    continue
                if minimal and any(b <= a for a, b in zip(st_, st_[1:])):
                    continue
                out.add((st_, arr))
    return out


@pytest.mark.parametrize("p", range(1, 5))
def test_packet_sequences_brute_force(p):
    for minimal in (False, True):
        assert set(multiarch.packet_sequences(p, minimal)) == _sequences_brute(p, minimal)


@pytest.mark.parametrize("p", range(1, 6))
def test_minimal_means_no_useless_arch(p):
    allseq = multiarch.packet_sequences(p)
    useless_free = {s for s in allseq if not any(multiarch.flyover_weights(*s)[0])}
    assert useless_free == set(multiarch.packet_sequences(p, minimal=True))


def _canon(N, edges, y, z):
    best = None
    for perm in itertools.permutations(range(N)):
        key = (perm[y], perm[z], tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges)))
        if best is None or key < best:
            best = key
    return best


@pytest.mark.parametrize("n", range(0, 4))
def test_marked_trees_brute_force(n):
    N = n + 2
    # labeled trees from Pruefer-free brute force over edge subsets
    pairs = list(itertools.combinations(range(N), 2))
    classes = set()
    for sub in itertools.combinations(pairs, N - 1):
        if not nx.is_tree(nx.Graph(list(sub))) or len({v for e in sub for v in e}) != N:
            continue
        deg = [sum(v in e for e in sub) for v in range(N)]
        if max(deg) > 4:
            continue
        for y, z in itertools.permutations(range(N), 2):
            if deg[y] <= 3 and deg[z] <= 3:
                classes.add(_canon(N, sub, y, z))
    assert len(multiarch.marked_trees(n)) == len(classes)


def test_tree_validation():
    with pytest.raises(StructuralError):
        DecoratedTree(3, [(0, 1)], 0, 2)
    with pytest.raises(StructuralError):
        DecoratedTree(2, [(0, 1)], 1, 1)
    star = [(0, i) for i in range(1, 6)]
    with pytest.raises(StructuralError):
        DecoratedTree(6, star, 1, 2)


@pytest.mark.parametrize("n", range(0, 5))
def test_minimal_first_level_is_1pi(n):
    for tree in multiarch.marked_trees(n):
        if len(tree.path()) < 2:
            continue
        for s in multiarch.enumerate_arch_systems(tree, minimal=True):
            assert multiarch.is_1pi(multiarch.first_level_graph(tree, s), tree.y, tree.z)


def test_non_minimal_systems_include_useless_arches():
    tree = multiarch.chain_tree(2)
    allsys = multiarch.enumerate_arch_systems(tree, minimal=False)
    assert any(not s.minimal for s in allsys)
    assert all(s.minimal for s in multiarch.enumerate_arch_systems(tree, minimal=True))


@pytest.mark.parametrize("n", range(1, 4))
def test_second_level_is_2pi(n):
    for tree in multiarch.marked_trees(n):
        if len(tree.path()) < 2:
            continue
        for s in multiarch.enumerate_arch_systems(tree):
            g = multiarch.first_level_graph(tree, s)
            for add in multiarch.second_level_systems(g, tree.y, tree.z,
                                                      multiarch.free_after(tree, s)):
                g2 = multiarch.second_level_graph(g, add)
                assert multiarch.is_2pi(g2, tree.y, tree.z)
                assert multiarch.is_one_vertex_irreducible(g2, tree.y, tree.z)


def _random_multigraph(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    edges = [(i, rng.randrange(n), rng.randrange(n)) for i in range(rng.randint(1, 12))]
    return [e for e in edges if e[1] != e[2]], 0, n - 1


@given(st.integers(0, 10 ** 6))
def test_edge_flow_matches_networkx(seed):
    edges, y, z = _random_multigraph(seed)
    G = nx.DiGraph()
    G.add_nodes_from([y, z])
    for _, a, b in edges:
        for u, v in ((a, b), (b, a)):
            c = G[u][v]["capacity"] + 1 if G.has_edge(u, v) else 1
            G.add_edge(u, v, capacity=c)
    assert multiarch.edge_flow(edges, y, z) == nx.maximum_flow_value(G, y, z)


@given(st.integers(0, 10 ** 6))
def test_menger_consistency(seed):
    edges, y, z = _random_multigraph(seed)
    assert multiarch.menger_consistent(edges, y, z)


def test_ring_matches_bruteforce():
    rng = random.Random(5)
    for _ in range(15):
        edges, y, z, labels = multiarch.random_2pi_graph(rng, n_max=4)
        a = multiarch.find_ring(edges, y, z, labels)
        b = multiarch.find_ring_bruteforce(edges, y, z, labels)
        assert a == b
        assert multiarch.vertex_flow(edges, y, z) >= 2


def test_no_ring_certificate():
    with pytest.raises(multiarch.NoRing):
        multiarch.find_ring([(0, 0, 1), (1, 1, 2)], 0, 2)


def test_flyover_total_grows_exponentially():
    vals = [float(multiarch.flyover_total(multiarch.chain_tree(n))[0]) for n in range(3, 7)]
    c, K, r2 = multiarch.loglinear_fit(range(3, 7), vals)
    assert r2 >= 0.95 and K > 1
