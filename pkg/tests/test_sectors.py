import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeycomb_rg import sectors
from honeycomb_rg.cutoffs import SectorTriple


@pytest.mark.parametrize("j", range(0, 21))
def test_sector_count_formula(j):
    brute = sum(1 for a in range(j + 1) for b in range(j + 1) if a + b >= j - 2)
    assert sectors.sector_count(j) == brute == len(sectors.enumerate_sectors(j))


def test_catalog_classes():
    cat = sectors.enumerate_sectors(5)
    by = cat.by_class()
    assert by["corner"] == [SectorTriple(5, 5, 5)]
    assert all(s.s_a == s.s_b for s in by["diagonal"])
    assert sum(len(v) for v in by.values()) == len(cat)
    with pytest.raises(ValueError):
        sectors.enumerate_sectors(-1)


idx = st.integers(0, 8)
leg = st.tuples(idx, idx, idx)


@given(st.lists(leg, min_size=4, max_size=4), st.permutations(range(4)))
def test_vertex_indicator_symmetric(legs, perm):
    pairs = [(a, b) for _, a, b in legs]
    js = [j for j, _, _ in legs]
    v = sectors.vertex_indicator(pairs, js)
    w = sectors.vertex_indicator([pairs[i] for i in perm], [js[i] for i in perm])
    assert v == w


@given(st.lists(st.lists(leg, min_size=4, max_size=4), min_size=1, max_size=30))
def test_vectorized_indicator_matches_scalar(rows):
    A = np.array(rows, dtype=np.int64)
    vec = sectors._indicator_vec(A[:, :, 0], A[:, :, 1], A[:, :, 2])
    ref = [sectors.vertex_indicator([(a, b) for _, a, b in r], [j for j, _, _ in r])
           for r in rows]
    assert list(vec) == [bool(x) for x in ref]


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_vertex_sum_brute_force(r):
    g = 10.0
    secs = sectors.sectors_at_r(r)
    root = sectors.default_root(r)
    ref = math.fsum(
        g ** (-(sum(b + c - a + 2 for a, b, c in t)) / 4)
        for t in itertools.product(secs, repeat=3)
        if sectors.vertex_indicator([(s[1], s[2]) for s in t] + [root[1:]],
                                    [s[0] for s in t] + [root[0]]))
    assert sectors.counting_sum_vertex(r) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("r", [3, 6])
def test_vertex_sum_order_independent(r):
    assert sectors.counting_sum_vertex(r, order="lex") == sectors.counting_sum_vertex(r,
                                                                                      order="rev")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_chain_sum_brute_force(n):
    r, g = 3, 10.0
    secs = sectors.sectors_at_r(r)
    ext = sectors.default_root(r)
    w = {s: g ** (-(s[1] + s[2] - s[0] + 2) / 4) for s in secs}
    tot = []
    for chain in itertools.product(secs, repeat=n):
        ok = all(sectors.vertex_indicator([p[1:], q[1:], ext[1:], ext[1:]],
                                          [p[0], q[0], ext[0], ext[0]])
                 for p, q in zip(chain, chain[1:]))
        if ok:
            tot.append(math.prod(w[s] for s in chain))
    assert sectors.chain_sum(r, n) == pytest.approx(math.fsum(tot), rel=1e-13)


def test_sectors_at_r_scale():
    for r in range(1, 8):
        for j, a, b in sectors.sectors_at_r(r):
            assert SectorTriple(j, a, b).r == r


def test_counting_sums_monotone():
    vals, _ = sectors.counting_sweep("vertex", None, list(range(2, 10)))
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    for n in (0, 1):
        v, _ = sectors.counting_sweep("biped", n, list(range(2, 10)))
        assert all(b >= a for a, b in zip(v, v[1:]))


def test_quadruped_single_is_constant():
    v, ex = sectors.counting_sweep("quadruped", 1, list(range(2, 10)))
    assert v == [1.0] * 8 and ex == 0.0


def test_fit_exponent_recovers_power():
    rs = np.arange(2, 19)
    assert sectors.fit_exponent(rs, 3.0 * rs ** 2.5) == pytest.approx(2.5)


@pytest.mark.parametrize("j", [4, 6])
def test_emptiness_audit(j):
    rep = sectors.empty_sector_audit(j)
    assert rep.passed and rep.witness is None
    assert any(r[0] == "excluded" for r in rep.rows)


def test_momentum_sum():
    worst, ok = sectors.momentum_sum_check(2000, 6, seed=2)
    assert ok and worst < 2
