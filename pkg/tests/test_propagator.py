import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeycomb_rg import cutoffs, lattice, propagator
from honeycomb_rg.cutoffs import SectorTriple
from honeycomb_rg.quadrature import ResolutionError

coord = st.floats(-6.0, 6.0, allow_nan=False)
freq = st.floats(0.01, 5.0).flatmap(lambda x: st.sampled_from([x, -x]))


@given(freq, coord, coord, st.floats(0.5, 1.5))
def test_c_full_is_matrix_inverse(k0, k1, k2, mu):
    # oracle: (E(k, mu) - i k0)^{-1} by dense inversion
    E = propagator.e_matrix(k1, k2, mu)
    ref = np.linalg.inv(E - 1j * k0 * np.eye(2))
    val = propagator.c_full(k0, k1, k2, mu)
    assert np.allclose(val.full, ref, rtol=1e-9, atol=1e-12)


def test_c_full_rejects_zero_frequency():
    with pytest.raises(ValueError):
        propagator.c_full(0.0, 0.1, 0.2)


@given(coord, coord)
def test_ctilde_matches_scalar_factor(k1, k2):
    val = propagator.c_full(0.3, k1, k2)
    e = lattice.band_e(k1, k2)
    assert val.ctilde == pytest.approx(complex(propagator.ctilde(0.3, e)), rel=1e-12)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_chart_weights_partition(t1, t2, t3):
    if max(t1, t2, t3) <= propagator.DELTA:
        return
    w = propagator.chart_weights(t1, t2, t3)
    assert abs(sum(float(x) for x in w) - 1) < 1e-14
    for t, wc in zip((t1, t2, t3), w):
        if t <= propagator.DELTA:
            assert wc == 0.0


def test_three_factors_never_all_small():
    # the chart partition is well defined: some factor exceeds DELTA everywhere
    kp, km = np.meshgrid(np.linspace(-1, 1, 801), np.linspace(-1, 1, 801))
    t = np.stack(lattice.three_factors(kp, km, quasi=True))
    assert t.max(axis=0).min() > propagator.DELTA


@pytest.mark.parametrize("j", [1, 2, 4])
def test_sector_weights_reassemble(j):
    # excluded sector pairs vanish only where the slice cutoff can be nonzero
    rng = np.random.default_rng(j)
    u = rng.uniform(-(j + 2) * math.log(10), 0, (2, 20000))
    qp, qm = rng.choice([-1, 1], (2, 20000)) * np.exp(u)
    e = lattice.band_e_oblique(qp, qm, quasi=True)
    on = e ** 2 <= cutoffs.slice_support(j)[1]
    t = lattice.three_factors(qp[on], qm[on], quasi=True)
    tot = sum(propagator.sector_weight(s, *t) for s in propagator.sectors_at(j))
    assert on.sum() > 1000
    assert np.max(np.abs(tot - 1)) < 1e-12


@pytest.mark.parametrize("pair", propagator.PAIRS)
def test_chart_maps_are_unimodular(pair):
    x, y = 0.3, -0.2
    h = 1e-6
    a = np.array(propagator.chart_to_quasi(pair, x + h, y)) - np.array(
        propagator.chart_to_quasi(pair, x - h, y))
    b = np.array(propagator.chart_to_quasi(pair, x, y + h)) - np.array(
        propagator.chart_to_quasi(pair, x, y - h))
    assert abs(np.linalg.det(np.column_stack([a, b]) / (2 * h))) == pytest.approx(1.0)


@pytest.mark.parametrize("pair", propagator.PAIRS)
def test_dual_chart_preserves_phase(pair):
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y, xp, xm = rng.normal(size=4)
        qp, qm = propagator.chart_to_quasi(pair, x, y)
        Xa, Xb = propagator.dual_chart(pair, xp, xm)
        qp2, qm2 = propagator.chart_to_quasi(pair, x + 0.1, y - 0.3)
        lhs = (qp2 - qp) * xp + (qm2 - qm) * xm
        rhs = 0.1 * Xa - 0.3 * Xb
        assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize("j,T", [(1, 1e-2), (2, 1e-3), (3, 1e-4)])
def test_matsubara_modes_window(j, T):
    k0 = propagator.matsubara_modes(j, T)
    lo, hi = cutoffs.k0_window(j)
    assert np.all((np.abs(k0) >= lo) & (np.abs(k0) <= hi))
    n = np.round((np.abs(k0) / (math.pi * T) - 1) / 2)
    assert np.allclose(np.abs(k0), (2 * n + 1) * math.pi * T)
    assert k0.size / 2 <= propagator.mode_count_bound(j, T)


def test_zero_temperature_frequency_rule():
    x, w = propagator.frequency_rule(2, None)
    hi = cutoffs.k0_window(2)[1]
    assert np.all(np.abs(x) <= hi)
    assert w.sum() == pytest.approx(2 * hi / (2 * math.pi), rel=1e-13)
    assert np.sum(w * x ** 2) == pytest.approx(2 * hi ** 3 / 3 / (2 * math.pi), rel=1e-12)


def test_a_bounds():
    rows = propagator.verify_a_bounds(range(1, 4), 1e-3, n_samples=2000)
    assert all(r["pass"] for r in rows)
    assert rows[0]["n"] > 0 and rows[1]["n"] > 0
    # slice j_max carries no Matsubara mode at this temperature
    assert rows[2]["empty"] and propagator.matsubara_modes(3, 1e-3).size == 0


def test_sector_grid_matches_riemann_sum():
    # oracle: midpoint rule over the cell for the full slice j = 1 at T = 1e-2
    T, j = 1e-2, 1
    quad = sum(propagator.sector_grid(s, T, 16).integral() for s in propagator.sectors_at(j))
    n = 1024
    q = (np.arange(n) + 0.5) / n * 2 - 1
    QP, QM = np.meshgrid(q, q, indexing="ij")
    e = lattice.band_e_oblique(QP, QM, quasi=True)
    tot = 0j
    for k0 in propagator.matsubara_modes(j, T):
        tot += np.sum(propagator.ctilde(k0, e) * cutoffs.slice_cutoff(4 * k0 ** 2 + e ** 2, j))
    ref = T * tot * (2.0 / n) ** 2 / 4.0
    assert abs(quad - ref) <= 0.02 * abs(ref)


def test_direct_space_origin_is_integral():
    s = SectorTriple(1, 1, 1)
    g = propagator.sector_grid(s, 1e-2, 8)
    assert complex(propagator.direct_space(s, 0.0, 0.0, 0.0, grid=g)[0]) == pytest.approx(
        g.integral(), rel=1e-12)
    with pytest.raises(ResolutionError) as exc:
        propagator.direct_space(s, 0.0, 1e6, 0.0, grid=g)
    assert exc.value.required > len(g.x)


def test_direct_space_grid_agrees_with_pointwise():
    s = SectorTriple(2, 1, 2)
    g = propagator.sector_grid(s, None, 8)
    x0 = np.array([0.0, 30.0])
    Xa = np.array([0.0, 2.0])
    Xb = np.array([1.0])
    full = propagator.direct_space_grid(g, x0, Xa, Xb)
    for a, t in enumerate(x0):
        for b, u in enumerate(Xa):
            pt = propagator.direct_space(s, t, u, Xb[0], grid=g, max_phase=10.0)[0]
            assert full[a, b, 0] == pytest.approx(pt, rel=1e-10, abs=1e-14)


def test_sup_norm_converges_and_scales():
    s1 = propagator.sup_norm_slice(SectorTriple(1, 1, 1), None)
    s2 = propagator.sup_norm_slice(SectorTriple(2, 2, 2), None)
    # one scale down the sup grows by about gamma
    assert 3 < s2 / s1 < 30


def test_decay_exponent_near_inverse_gevrey_index():
    fit = propagator.decay_fit(SectorTriple(1, 1, 1), None, m=16)
    assert abs(fit["alpha"] - 0.5) <= 0.2
    assert fit["n_fit"] >= 4


def test_support_sampling_windows():
    rows = propagator.support_inclusion_check(range(1, 4), 20000, seed=1)
    for r in rows:
        assert r["sqrt_t"] == 0
        assert r["k0_cone_fifth"] == 0
        assert r["corner_q_asin"] == 0
