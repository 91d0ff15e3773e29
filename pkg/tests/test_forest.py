import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeycomb_rg import forest
from honeycomb_rg.forest import Forest, Jungle, SizeRefusal, StructuralError

#: labeled forests on n vertices, n = 0..7
KNOWN_FORESTS = [1, 1, 2, 7, 38, 291, 2932, 36961]


def _acyclic(n, edges):
    # union-find free cycle test: a forest has n - (#components) edges
    adj = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, comps = set(), 0
    for s in adj:
        if s in seen:
            continue
        comps += 1
        stack = [s]
        seen.add(s)
        while stack:
            for b in adj[stack.pop()]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    return len(edges) == n - comps


@pytest.mark.parametrize("n", range(0, 6))
def test_forest_count_brute_force(n):
    pairs = forest.all_pairs(n)
    brute = sum(1 for k in range(len(pairs) + 1) for sub in itertools.combinations(pairs, k)
                if _acyclic(n, sub))
    assert brute == forest.forest_count(n) == len(forest.enumerate_forests(n))


def test_forest_count_known_values():
    assert [forest.forest_count(n) for n in range(8)] == KNOWN_FORESTS
    assert len(forest.enumerate_forests(7)) == KNOWN_FORESTS[7]


@pytest.mark.parametrize("n", range(2, 8))
def test_cayley_matrix_tree(n):
    # Kirchhoff: any cofactor of the Laplacian of K_n
    L = n * np.eye(n) - np.ones((n, n))
    kirchhoff = round(np.linalg.det(L[1:, 1:]))
    assert len(forest.spanning_trees(n)) == kirchhoff == n ** (n - 2)


def test_size_refusal():
    with pytest.raises(SizeRefusal) as exc:
        forest.enumerate_forests(8)
    assert exc.value.count == forest.forest_count(8)


def test_forest_rejects_cycles():
    with pytest.raises(StructuralError):
        Forest(3, ((1, 2), (2, 3), (1, 3)))
    with pytest.raises(StructuralError):
        Jungle(Forest(2, ((1, 2),)), (3,), 2)


def test_jungle_count():
    n, m = 3, 2
    expect = sum(m ** len(f.edges) for f in forest.enumerate_forests(n))
    assert len(list(forest.enumerate_jungles(n, m))) == expect


def test_two_vertex_interpolation():
    jg = Jungle(Forest(2, ((1, 2),)), (1,), 1)
    X = forest.interpolation_matrix(jg, [0.3])
    assert np.allclose(X, [[1, 0.3], [0.3, 1]])


def test_interpolation_path_infimum():
    jg = Jungle(Forest(3, ((1, 2), (2, 3))), (1, 1), 1)
    X = forest.interpolation_matrix(jg, [0.8, 0.4])
    assert X[0, 2] == 0.4 and X[0, 1] == 0.8 and X[1, 2] == 0.4


def test_interpolation_previous_layer_is_one():
    jg = Jungle(Forest(3, ((1, 2), (2, 3))), (1, 2), 2)
    X = forest.interpolation_matrix(jg, [0.5, 0.2], layer=2)
    assert X[0, 1] == 1.0 and X[0, 2] == 0.2
    X1 = forest.interpolation_matrix(jg, [0.5, 0.2], layer=1)
    assert X1[0, 2] == 0.0


@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_interpolation_psd(n, seed):
    rng = random.Random(seed)
    jg = forest.random_jungle(n, 3, rng, connected=bool(seed % 2))
    w = [rng.random() for _ in jg.forest.edges]
    for k in range(1, 4):
        ok, lam = forest.psd_check(forest.interpolation_matrix(jg, w, k))
        assert ok, lam


def test_hand_tallied_gn_exponents():
    # two quartic vertices joined at scale 1: 2 fields at r = 1, 6 external at r = 2
    jg = Jungle(Forest(2, ((1, 2),)), (1,), 1)
    rep = forest.verify_induction(forest.build_gn_tree(jg))
    assert rep["induc1"] == (-2 * (1 + 1) - 2 * 6 * 2, -2 * 8 - 2 * 6)
    assert rep["induc2"] == (8, 8) and rep["pass"]


def test_three_components_then_one():
    # eight vertices: three clusters at scale 1, merged at scale 2
    edges = ((1, 2), (1, 3), (3, 4), (5, 6), (6, 7), (2, 5), (4, 8))
    layers = (1, 1, 1, 1, 1, 2, 2)
    jg = Jungle(Forest(8, edges), layers, 2)
    tree = forest.build_gn_tree(jg)
    assert tree.counts == [8, 3, 1]
    assert len(tree.roots()) == 1
    rep = forest.verify_induction(tree)
    assert rep["pass"]
    # direct tally: 7 contracted pairs, 32 - 14 = 18 external fields at scale 3
    assert rep["induc1"][0] == -2 * (2 * 5 * 1 + 2 * 2 * 2) - 2 * 18 * 3


@pytest.mark.parametrize("n", range(1, 5))
def test_induction_all_jungles(n):
    for jg in forest.enumerate_jungles(n, 3, connected=True):
        assert forest.verify_induction(forest.build_gn_tree(jg))["pass"]


def test_induction_random_six():
    rng = random.Random(11)
    for _ in range(100):
        jg = forest.random_jungle(6, 3, rng)
        assert forest.verify_induction(forest.build_gn_tree(jg))["pass"]


def test_field_reuse_rejected():
    jg = Jungle(Forest(3, ((1, 2), (2, 3))), (1, 1), 1)
    bad = [((1, 0), (2, 0)), ((2, 0), (3, 0))]
    with pytest.raises(StructuralError):
        forest.build_gn_tree(jg, bad, {1: 4, 2: 4, 3: 4})


def test_power_counting():
    assert forest.power_count(2) == (1, "relevant")
    assert forest.power_count(4) == (0, "marginal")
    assert forest.power_count(6) == (-1, "irrelevant")
    with pytest.raises(StructuralError):
        forest.power_count(3)
