import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeycomb_rg import cutoffs
from honeycomb_rg.cutoffs import SectorTriple


def test_chi_plateaus_and_midpoint():
    assert cutoffs.chi(0.0) == 1.0 and cutoffs.chi(1.0) == 1.0
    assert cutoffs.chi(2.0) == 0.0 and cutoffs.chi(-3.0) == 0.0
    # f(u)/(f(u)+f(1-u)) is 1/2 at u = 1/2
    assert cutoffs.chi(1.5) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("h", [1.5, 2.0, 3.0])
def test_chi_monotone_and_symmetric(h):
    t = np.linspace(1.0, 2.0, 4001)
    v = cutoffs.chi(t, h)
    assert np.all(np.diff(v) <= 0)
    assert np.allclose(v + v[::-1], 1.0, atol=1e-12)


@given(st.floats(0.0, 5.0), st.integers(2, 12))
def test_scale_partition(t, jm):
    g = cutoffs.DEFAULT_GAMMA
    x = t * g ** (-2 * jm)
    s = sum(cutoffs.chi_j(x, j) for j in range(jm + 1))
    assert abs(s - 1) < 1e-12 or x < 2 * g ** (-2 * jm)


@given(st.floats(0.0, 1.0), st.integers(0, 14))
def test_sector_partition(t, j):
    s = sum(cutoffs.v_s(t, k, j) for k in range(j + 1))
    assert abs(s - 1) < 1e-12


@given(st.floats(1e-12, 3.0), st.integers(1, 8))
def test_slice_support(x, j):
    lo, hi = cutoffs.slice_support(j)
    v = cutoffs.slice_cutoff(x, j)
    if v > 0:
        assert lo <= x <= hi
    assert 0.0 <= v <= 1.0


@pytest.mark.parametrize("T,expect", [(1 / (math.sqrt(2) * math.pi * 100), 3),
                                      (1 / (math.sqrt(2) * math.pi), 1),
                                      (1e-2, 2), (1e-3, 3)])
def test_j_max(T, expect):
    assert cutoffs.j_max(T) == expect


def test_r_max_formula():
    for T in (1e-2, 1e-3, 1e-4):
        jm = cutoffs.j_max(T)
        assert cutoffs.r_max(T) == math.floor(1 + 1.5 * jm)


def test_scale_system_validation():
    with pytest.raises(ValueError):
        cutoffs.ScaleSystem(gamma=5)
    with pytest.raises(ValueError):
        cutoffs.ScaleSystem(h=1.0)
    s = cutoffs.ScaleSystem(T=1e-3)
    assert s.j_max == 3 and s.alpha == 0.5


@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
def test_sector_triple_indices(j, a, b):
    if a <= j and b <= j and a + b >= j - 2:
        s = SectorTriple(j, a, b)
        assert s.l == a + b - j + 2
        assert s.r_exact == Fraction(j + a + b, 2) + 1
        assert s.r == math.floor(s.r_exact)
        assert 0 <= s.l <= j + 2
    else:
        with pytest.raises(ValueError):
            SectorTriple(j, a, b)


def test_derivative_sup_matches_finite_difference():
    # extended-precision derivative against an independent float difference quotient
    sups = cutoffs.chi_derivative_sups(2, n_grid=400)
    assert sups[1] == pytest.approx(cutoffs.chi_fd_slope(), rel=1e-3)


def test_gevrey_exponent_near_h():
    rep = cutoffs.gevrey_check(6, 2.0)
    assert rep["pass"]
    assert rep["A"] > 0 and rep["gamma_c"] > 0
    with pytest.raises(ValueError):
        cutoffs.gevrey_check(9)


def test_windows_are_ordered():
    for j in range(1, 8):
        lo, hi = cutoffs.k0_window(j)
        assert 0 < lo < hi
        for s in range(j + 1):
            a, b = cutoffs.v_support_window(s, j)
            assert a < b
