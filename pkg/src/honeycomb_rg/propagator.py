"""Free propagator: full, sliced and sectorized, plus direct-space transforms.

Sectors slice two of the three factors (t1, t2, t3). The unsliced factor
is selected by a smooth partition ``chart_weights`` that vanishes wherever
that factor is small, so every sector is a Gevrey-smooth function of the
momentum and the sector sum reassembles the slice exactly.

Momentum integrals run over one reciprocal cell written in chart
coordinates (x, y) in [-1, 1)^2, in which the two sliced factors are
sin^2(pi x / 2) and sin^2(pi y / 2). The maps to quasi-momenta are
unimodular, so d^2k / |BZ| = dx dy / 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cutoffs
from .cutoffs import DEFAULT_GAMMA, DEFAULT_H, SectorTriple
from .lattice import band_e, band_e_oblique, omega, oblique_to_cart, three_factors
from .quadrature import ResolutionError, fsum_complex, graded_interval, symmetric

#: threshold of the chart partition: the unsliced factor exceeds DELTA on its chart
DELTA = 0.1

#: sliced axis pair -> unsliced axis
UNSLICED = {(1, 2): 3, (2, 3): 1, (1, 3): 2}
PAIRS = ((1, 2), (2, 3), (1, 3))


def chart_weights(t1, t2, t3, h=DEFAULT_H):
    """Smooth weights (w1, w2, w3) summing to one; w_c = 0 where t_c <= DELTA."""
    eta = [1.0 - cutoffs.chi(np.asarray(t, float) / DELTA, h) for t in (t1, t2, t3)]
    tot = eta[0] + eta[1] + eta[2]
    return tuple(e / tot for e in eta)


def chart_to_quasi(pair, x, y):
    """Quasi-momenta (q+, q-) of chart coordinates (x, y) for a sliced pair."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if pair == (1, 2):
        return x, y
    if pair == (2, 3):
        return 1.0 - x - y, x
    if pair == (1, 3):
        return x, 1.0 - x - y
    raise ValueError("unknown axis pair %r" % (pair,))


def dual_chart(pair, xp, xm):
    """Conjugates (X_a, X_b) of chart coordinates for dual oblique (x+, x-).

    k . x = k+ x+ + k- x-; in chart coordinates this is x X_a + y X_b
    plus a constant phase.
    """
    if pair == (1, 2):
        return xp, xm
    if pair == (2, 3):
        return xm - xp, -xp
    if pair == (1, 3):
        return xp - xm, -xm
    raise ValueError("unknown axis pair %r" % (pair,))


def dual_coordinates(x1, x2):
    """Dual oblique coordinates x+ = pi(x1/3 + x2/sqrt3), x- = pi(-x1/3 + x2/sqrt3)."""
    s3 = math.sqrt(3.0)
    return math.pi * (x1 / 3 + x2 / s3), math.pi * (-x1 / 3 + x2 / s3)


def ctilde(k0, e):
    """Scalar propagator 1 / (-2 i k0 + e + k0^2) at mu = 1."""
    return 1.0 / (-2j * np.asarray(k0) + e + np.asarray(k0) ** 2)


def e_matrix(k1, k2, mu=1.0):
    """Single-particle matrix E(k, mu) = [[-mu, -Omega*], [-Omega, -mu]]."""
    om = omega(k1, k2)
    out = np.empty(np.shape(om) + (2, 2), complex)
    out[..., 0, 0] = -mu
    out[..., 1, 1] = -mu
    out[..., 0, 1] = -np.conj(om)
    out[..., 1, 0] = -om
    return out


@dataclass
class PropagatorValue:
    full: np.ndarray
    ctilde: complex | np.ndarray | None = None
    a_matrix: np.ndarray | None = None


def c_full(k0, k1, k2, mu=1.0):
    """Free propagator (k0^2 + e - 2 i mu k0)^{-1} [[i k0 + mu, -Omega*], [-Omega, i k0 + mu]].

    The denominator has modulus at least 2 |mu k0|, so k0 != 0 suffices.
    For mu = 1 the scalar factor and the matrix A are populated as well.
    """
    k0 = np.asarray(k0, float)
    if np.any(k0 == 0):
        raise ValueError("Matsubara frequencies never vanish")
    om = omega(k1, k2)
    e = np.abs(om) ** 2 - mu ** 2
    den = 1.0 / (k0 ** 2 + e - 2j * mu * k0)
    A = np.empty(np.broadcast(k0, om).shape + (2, 2), complex)
    A[..., 0, 0] = 1j * k0 + mu
    A[..., 1, 1] = 1j * k0 + mu
    A[..., 0, 1] = -np.conj(om)
    A[..., 1, 0] = -om
    full = den[..., None, None] * A
    if mu == 1.0:
        return PropagatorValue(full, den, A)
    return PropagatorValue(full)


def sector_weight(sector: SectorTriple, t1, t2, t3, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """Chart weight of the unsliced axis times v_{s_a}(t_a) v_{s_b}(t_b)."""
    t = (t1, t2, t3)
    a, b = sorted(sector.axes)
    w = chart_weights(t1, t2, t3, h)[UNSLICED[(a, b)] - 1]
    sa, sb = (sector.s_a, sector.s_b) if sector.axes == (a, b) else (sector.s_b, sector.s_a)
    return (w * cutoffs.v_s(t[a - 1], sa, sector.j, gamma, h)
            * cutoffs.v_s(t[b - 1], sb, sector.j, gamma, h))


def c_sectorized(sector: SectorTriple, k0, k1, k2, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """Sectorized 2x2 propagator c_full * slice cutoff * sector weight."""
    from .lattice import cart_to_oblique
    val = c_full(k0, k1, k2)
    e = band_e(k1, k2, 1.0)
    t1, t2, t3 = three_factors(*cart_to_oblique(k1, k2))
    cut = (cutoffs.slice_cutoff(4 * np.asarray(k0) ** 2 + e ** 2, sector.j, gamma, h)
           * sector_weight(sector, t1, t2, t3, gamma, h))
    return val.full * np.asarray(cut)[..., None, None]


def sectors_at(j):
    """All admissible sectors of slice j over the three axis pairs."""
    out = []
    for pair in PAIRS:
        for sa in range(j + 1):
            for sb in range(j + 1):
                if sa + sb >= j - 2:
                    out.append(SectorTriple(j, sa, sb, pair))
    return out


# --------------------------------------------------------------------------
# frequency and momentum grids

def matsubara_modes(j, T, gamma=DEFAULT_GAMMA):
    """Matsubara frequencies whose k0^2 lies in the slice-j window (both signs)."""
    lo, hi = cutoffs.k0_window(j, gamma)
    if math.isinf(hi):
        raise ValueError("slice 0 has no finite frequency window")
    nmin = max(0, math.ceil((lo / (math.pi * T) - 1) / 2))
    nmax = math.floor((hi / (math.pi * T) - 1) / 2)
    pos = (2 * np.arange(nmin, nmax + 1) + 1) * math.pi * T
    return np.concatenate([-pos[::-1], pos])


def mode_count_bound(j, T, gamma=DEFAULT_GAMMA):
    """Bound on the number of positive contributing modes, g^{-j}/(sqrt2 2 pi T) + 1."""
    return gamma ** (-j) / (math.sqrt(2) * 2 * math.pi * T) + 1


def frequency_rule(j, T, gamma=DEFAULT_GAMMA, m=12):
    """Nodes and weights for (1/beta) sum over k0, or dk0 / 2pi when T is None.

    At finite T the slice keeps the Matsubara modes of its frequency window.
    The zero-temperature integral instead runs over the whole support of
    the slice cutoff, |k0| <= g^{-j}/sqrt2 including k0 = 0, so that the
    integrand stays smooth in k0 and its Fourier transform decays.
    """
    if T is None:
        hi = cutoffs.k0_window(j, gamma)[1]
        x, w = symmetric(*graded_interval(0.0, hi, m, ratio=3.0, hmax=hi / 4))
        return x, w / (2 * math.pi)
    k0 = matsubara_modes(j, T, gamma)
    return k0, np.full(k0.shape, float(T))


#: widest Gauss panel in chart coordinates; resolves the chart partition
HMAX = 0.05


def sector_axis_rule(s, j, m, gamma=DEFAULT_GAMMA, ratio=2.0):
    """Gauss nodes in one chart coordinate covering the support of v_s.

    Windows reaching q = 0 are graded down to g^{-j-1}/20, well below the
    width of the frequency-broadened Fermi layer at this slice.
    """
    lo, hi = cutoffs.v_support_window(s, j, gamma)
    qlo = (2 / math.pi) * math.asin(min(1.0, lo)) if lo > 0 else 0.0
    qhi = (2 / math.pi) * math.asin(min(1.0, hi))
    depth = 2.0
    if qlo == 0.0:
        depth = max(2.0, math.log(qhi * 20 * gamma ** (j + 1)) / math.log(ratio))
    return symmetric(*graded_interval(qlo, qhi, m, ratio=ratio, floor_depth=depth, hmax=HMAX))


@dataclass
class SectorGrid:
    """Sector integrand sampled on its support: F[k0, x, y] with weights."""
    sector: SectorTriple
    k0: np.ndarray
    w0: np.ndarray
    x: np.ndarray
    wx: np.ndarray
    y: np.ndarray
    wy: np.ndarray
    values: np.ndarray  # C~ times cutoffs, shape (k0, x, y)

    def integral(self):
        """(1/beta) sum_k0 int d^2k/|BZ| of the sector integrand."""
        W = self.w0[:, None, None] * self.wx[None, :, None] * self.wy[None, None, :] / 4.0
        return fsum_complex(W * self.values)


def sector_grid(sector: SectorTriple, T=None, m=12, gamma=DEFAULT_GAMMA, h=DEFAULT_H,
                ratio=3.0, m0=None):
    """Sample the scalar sectorized propagator on a graded grid of its support.

    ``T=None`` replaces the Matsubara sum by the zero-temperature frequency
    integral.
    """
    pair = tuple(sorted(sector.axes))
    sa, sb = (sector.s_a, sector.s_b) if sector.axes == pair else (sector.s_b, sector.s_a)
    j = sector.j
    k0, w0 = frequency_rule(j, T, gamma, m if m0 is None else m0)
    x, wx = sector_axis_rule(sa, j, m, gamma, ratio)
    y, wy = sector_axis_rule(sb, j, m, gamma, ratio)
    X, Y = np.meshgrid(x, y, indexing="ij")
    qp, qm = chart_to_quasi(pair, X, Y)
    e = band_e_oblique(qp, qm, quasi=True)
    t1, t2, t3 = three_factors(qp, qm, quasi=True)
    sw = sector_weight(SectorTriple(j, sa, sb, pair), t1, t2, t3, gamma, h)
    K0 = k0[:, None, None]
    cut = cutoffs.slice_cutoff(4 * K0 ** 2 + e[None] ** 2, j, gamma, h)
    vals = ctilde(K0, e[None]) * cut * sw[None]
    return SectorGrid(SectorTriple(j, sa, sb, pair), k0, w0, x, wx, y, wy, vals)


# --------------------------------------------------------------------------
# bound checks

def verify_a_bounds(j_range, T=1e-3, n_samples=4000, gamma=DEFAULT_GAMMA, seed=0):
    """Extremes of |A_{aa'}| over sampled points of each slice support.

    Momenta are drawn log-uniformly in chart coordinates, k0 from the
    Matsubara modes of the slice; only points where the slice cutoff is
    nonzero are kept.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for j in j_range:
        if j < 1:
            raise ValueError("slices start at j = 1")
        k0s = matsubara_modes(j, T, gamma)
        if k0s.size == 0:
            rows.append({"j": j, "empty": True, "n": 0, "pass": True,
                         "diag_min": None, "diag_max": None, "off_min": None, "off_max": None})
            continue
        diag, off = [], []
        witness = None
        for pair in PAIRS:
            u = rng.uniform(-(j + 3) * math.log(gamma), 0.0, size=(2, n_samples))
            sgn = rng.choice([-1.0, 1.0], size=(2, n_samples))
            qp, qm = chart_to_quasi(pair, sgn[0] * np.exp(u[0]), sgn[1] * np.exp(u[1]))
            k1, k2 = oblique_to_cart(qp + 1.0, qm + 1.0)
            k0 = rng.choice(k0s, size=n_samples)
            e = band_e(k1, k2, 1.0)
            keep = cutoffs.slice_cutoff(4 * k0 ** 2 + e ** 2, j, gamma) > 0
            val = c_full(k0[keep], k1[keep], k2[keep])
            A = val.a_matrix
            diag.append(np.abs(A[:, 0, 0]))
            off.append(np.abs(A[:, 0, 1]))
        diag = np.concatenate(diag)
        off = np.concatenate(off)
        allv = np.concatenate([diag, off])
        ok = bool(allv.size and allv.min() >= 0.9 and allv.max() <= 2.0)
        if not ok and allv.size:
            witness = float(allv[np.argmax((allv < 0.9) | (allv > 2.0))])
        rows.append({"j": j, "empty": allv.size == 0, "n": int(allv.size),
                     "diag_min": float(diag.min()) if diag.size else None,
                     "diag_max": float(diag.max()) if diag.size else None,
                     "off_min": float(off.min()) if off.size else None,
                     "off_max": float(off.max()) if off.size else None,
                     "pass": ok or allv.size == 0, "witness": witness})
    return rows


def sup_norm_slice(sector: SectorTriple, T=None, gamma=DEFAULT_GAMMA, m=8,
                   max_doublings=6, tol=0.01):
    """Grid estimate of sup_k max_{aa'} |C_{j,sigma}(k)_{aa'}|.

    The sector grid is refined by doubling the Gauss order until the
    estimate changes by less than ``tol``.
    """
    prev = None
    for it in range(max_doublings + 1):
        g = sector_grid(sector, T, m * 2 ** it, gamma)
        absC = np.abs(g.values)
        # |A| entries: diagonal sqrt(1+k0^2), off-diagonal sqrt(1+e)
        K0 = g.k0[:, None, None]
        X, Y = np.meshgrid(g.x, g.y, indexing="ij")
        qp, qm = chart_to_quasi(tuple(sorted(g.sector.axes)), X, Y)
        e = band_e_oblique(qp, qm, quasi=True)
        amax = np.maximum(np.sqrt(1 + K0 ** 2), np.sqrt(np.maximum(1 + e, 0.0))[None])
        cur = float(np.max(absC * amax))
        if prev is not None and abs(cur - prev) <= tol * max(abs(prev), 1e-300):
            return cur
        prev = cur
    raise ResolutionError("sup norm did not converge; last values %r" % ([prev, cur],))


def direct_space(sector: SectorTriple, x0, Xa, Xb, T=None, m=12, gamma=DEFAULT_GAMMA,
                 grid: SectorGrid | None = None, max_phase=1.0):
    """C_{j,sigma}(x) at points given by time x0 and chart-dual coordinates.

    Each Gauss panel must see a phase change of at most ``max_phase``
    radians per node spacing; otherwise a ResolutionError carries the
    required Gauss order.
    """
    g = grid if grid is not None else sector_grid(sector, T, m, gamma)
    x0 = np.atleast_1d(np.asarray(x0, float))
    Xa = np.atleast_1d(np.asarray(Xa, float))
    Xb = np.atleast_1d(np.asarray(Xb, float))
    _check_nyquist(g, np.max(np.abs(x0)), np.max(np.abs(Xa)), np.max(np.abs(Xb)), max_phase)
    P0 = np.exp(1j * np.outer(x0, g.k0)) * g.w0[None, :]
    Pa = np.exp(1j * np.outer(Xa, g.x)) * g.wx[None, :]
    Pb = np.exp(1j * np.outer(Xb, g.y)) * g.wy[None, :]
    return np.einsum("kxy,pk,px,py->p", g.values, P0, Pa, Pb, optimize=True) / 4.0


def direct_space_grid(g: SectorGrid, x0, Xa, Xb):
    """C on the full tensor grid x0 x Xa x Xb by successive contractions."""
    P0 = np.exp(1j * np.outer(x0, g.k0)) * g.w0[None, :]
    Pa = np.exp(1j * np.outer(Xa, g.x)) * g.wx[None, :]
    Pb = np.exp(1j * np.outer(Xb, g.y)) * g.wy[None, :]
    t = np.tensordot(P0, g.values, axes=(1, 0))
    t = np.tensordot(t, Pa, axes=(1, 1))
    t = np.tensordot(t, Pb, axes=(1, 1))
    return t / 4.0


def _max_spacing(nodes):
    if nodes.size < 2:
        return 0.0
    return float(np.max(np.diff(np.sort(nodes))))


def _check_nyquist(g: SectorGrid, x0max, xamax, xbmax, max_phase):
    for name, nodes, X in (("k0", g.k0, x0max), ("x", g.x, xamax), ("y", g.y, xbmax)):
        if name == "k0" and np.allclose(g.w0, g.w0[0]):
            continue  # Matsubara sums are exact on the lattice of times
        sp = _max_spacing(nodes)
        if sp * X > max_phase:
            need = math.ceil(len(nodes) * sp * X / max_phase)
            raise ResolutionError(
                "grid too coarse along %s for |x| = %g; need about %d nodes" % (name, X, need),
                required=need)


def distance(sector: SectorTriple, x0, Xa, Xb, gamma=DEFAULT_GAMMA):
    """d_{j,sigma}(x, 0) = g^{-j}|x0| + g^{-s_a}|X_a| + g^{-s_b}|X_b|."""
    return (gamma ** (-sector.j) * np.abs(x0) + gamma ** (-sector.s_a) * np.abs(Xa)
            + gamma ** (-sector.s_b) * np.abs(Xb))


# --------------------------------------------------------------------------
# decay and prefactor bands

def decay_fit(sector: SectorTriple, T=None, m=16, gamma=DEFAULT_GAMMA, d_max=300.0, n=40,
              floor=1e-11, grid: SectorGrid | None = None):
    """Stretched-exponential decay of |C_{j,sigma}| along the time axis.

    Samples d = g^{-j}|x0| geometrically in [1, d_max], takes the
    nonincreasing envelope past the peak and fits
    log log(peak / envelope) = log c + alpha log d on the points between
    30% of the peak and the relative noise ``floor``.
    """
    g = grid if grid is not None else sector_grid(sector, T, m, gamma)
    d = np.geomspace(1.0, d_max, n)
    C = np.abs(direct_space_grid(g, d * gamma ** sector.j, np.zeros(1), np.zeros(1))).ravel()
    ipk = int(np.argmax(C))
    env = np.maximum.accumulate(C[::-1])[::-1]
    keep = (np.arange(n) > ipk) & (env > floor * C[ipk]) & (env < 0.3 * C[ipk])
    if keep.sum() < 4:
        raise ResolutionError("too few decay samples above the noise floor")
    y = np.log(np.log(C[ipk] / env[keep]))
    alpha, logc = np.polyfit(np.log(d[keep]), y, 1)
    return {"alpha": float(alpha), "c": float(math.exp(logc)), "peak": float(C[ipk]),
            "n_fit": int(keep.sum())}


def l1_estimate(sector: SectorTriple, T=None, m=16, gamma=DEFAULT_GAMMA, L=24.0, n=97,
                grid: SectorGrid | None = None):
    """Trapezoid estimate of int |C_{j,sigma}(x)| over a box scaled per axis.

    The box is |x0| <= L g^j, |X_a| <= L g^{s_a}, |X_b| <= L g^{s_b}; the
    spatial variables are treated as continuous (dual chart coordinates).
    """
    g = grid if grid is not None else sector_grid(sector, T, m, gamma)
    axes = []
    for sc in (gamma ** sector.j, gamma ** sector.s_a, gamma ** sector.s_b):
        x = np.linspace(-L * sc, L * sc, n)
        w = np.full(n, x[1] - x[0])
        w[[0, -1]] /= 2
        axes.append((x, w))
    C = np.abs(direct_space_grid(g, axes[0][0], axes[1][0], axes[2][0]))
    return float(np.einsum("abc,a,b,c->", C, axes[0][1], axes[1][1], axes[2][1]))


def prefactor_bands(js=range(1, 6), T=None, m=16, gamma=DEFAULT_GAMMA, with_l1=True,
                    with_decay=True, l1_points=65):
    """Rows per (j, class) of sup g^{-j}, L1 g^{-j}, |C(0)| g^{j+l} and alpha.

    The sup and |C(0)| entries are maxima over every nonempty sector of
    the class in the (1, 2) chart catalog; the L1 estimate and the decay
    exponent are measured on the sector attaining the sup. Returns
    (rows, bands) with bands the max/min ratio of each scaled quantity
    over all rows.
    """
    from .sectors import enumerate_sectors
    rows = []
    for j in js:
        cat = enumerate_sectors(j)
        best = {}
        for sec, tag in zip(cat.sectors, cat.tags):
            g = sector_grid(sec, T, m, gamma)
            if not np.any(g.values):
                continue
            X, Y = np.meshgrid(g.x, g.y, indexing="ij")
            e = band_e_oblique(*chart_to_quasi((1, 2), X, Y), quasi=True)
            amax = np.maximum(np.sqrt(1 + g.k0[:, None, None] ** 2),
                              np.sqrt(np.maximum(1 + e, 0.0))[None])
            sup = float(np.max(np.abs(g.values) * amax)) * gamma ** (-j)
            c0 = abs(g.integral()) * gamma ** (j + sec.l)
            cur = best.get(tag)
            if cur is None:
                best[tag] = {"j": j, "class": tag, "s_a": sec.s_a, "s_b": sec.s_b, "l": sec.l,
                             "sup_scaled": sup, "c0_scaled": c0, "n_sectors": 1, "_g": g}
                continue
            cur["n_sectors"] += 1
            cur["c0_scaled"] = max(cur["c0_scaled"], c0)
            if sup > cur["sup_scaled"]:
                cur.update(s_a=sec.s_a, s_b=sec.s_b, l=sec.l, sup_scaled=sup, _g=g)
        for tag in sorted(best, key=lambda t: CLASS_ORDER.index(t)):
            row = best[tag]
            g = row.pop("_g")
            if with_l1:
                row["l1_scaled"] = l1_estimate(g.sector, T, m, gamma, n=l1_points,
                                               grid=g) * gamma ** (-j)
            if with_decay:
                row["alpha"] = decay_fit(g.sector, T, m, gamma, grid=g)["alpha"]
            rows.append(row)
    bands = {}
    for key in ("sup_scaled", "l1_scaled", "c0_scaled"):
        vals = [r[key] for r in rows if key in r]
        if vals:
            bands[key] = max(vals) / min(vals) if min(vals) > 0 else math.inf
    return rows, bands


CLASS_ORDER = ("corner", "middle-face", "face", "diagonal", "general")


# --------------------------------------------------------------------------
# support windows by rejection sampling

def support_inclusion_check(js=range(1, 7), n_draws=100000, gamma=DEFAULT_GAMMA,
                            h=DEFAULT_H, seed=0):
    """Count violations of the frequency and sector windows on sampled supports.

    Points (k0, q+, q-) are drawn log-uniformly around the slice scale and
    kept where the slice cutoff is nonzero. The slice support is read two
    ways: the cutoff support alone, and its intersection with e^2 <= k0^2
    (the stated support set). Counted per j:

    - ``k0_pure`` / ``k0_cone``: k0^2 outside [g^{-2j-2}/4, g^{-2j}/2]
    - ``k0_cone_fifth``: same with the lower end g^{-2j-2}/5, which is
      what e^2 <= k0^2 actually implies
    - ``sqrt_t``: sqrt(t_+) outside the v_s window where v_s(t_+) > 0
    - ``corner_q``: |q+| > (2 sqrt2/pi) g^{-j} where v_j(t_+) > 0
    - ``corner_q_asin``: |q+| > (2/pi) asin(sqrt2 g^{-j}), the exact edge
    """
    rng = np.random.default_rng(seed)
    rows = []
    for j in js:
        lo_log, hi_log = (-j - 2) * math.log(gamma), (-j + 1) * math.log(gamma)
        k0 = np.exp(rng.uniform(lo_log, hi_log, n_draws))
        u = rng.uniform(-(j + 3) * math.log(gamma), 0.0, size=(2, n_draws))
        sg = rng.choice([-1.0, 1.0], size=(2, n_draws))
        qp, qm = sg[0] * np.exp(u[0]), sg[1] * np.exp(u[1])
        e = band_e_oblique(qp, qm, quasi=True)
        t1 = three_factors(qp, qm, quasi=True)[0]
        on = cutoffs.slice_cutoff(4 * k0 ** 2 + e ** 2, j, gamma, h) > 0
        cone = on & (e ** 2 <= k0 ** 2)
        k2 = k0 ** 2
        out_w = (k2 < 0.25 * gamma ** (-2 * j - 2)) | (k2 > 0.5 * gamma ** (-2 * j))
        out_5 = (k2 < 0.2 * gamma ** (-2 * j - 2)) | (k2 > 0.5 * gamma ** (-2 * j))
        sq = np.sqrt(t1)
        bad_t = 0
        for s in range(j + 1):
            m = cutoffs.v_s(t1, s, j, gamma, h) > 0
            lo, hi = cutoffs.v_support_window(s, j, gamma)
            bad_t += int(np.sum(m & ((sq < lo) | (sq > hi))))
        corner = cutoffs.v_s(t1, j, j, gamma, h) > 0
        aq = np.abs(qp)
        rows.append({
            "j": j, "n_support": int(on.sum()), "n_cone": int(cone.sum()),
            "k0_pure": int(np.sum(on & out_w)), "k0_cone": int(np.sum(cone & out_w)),
            "k0_cone_fifth": int(np.sum(cone & out_5)), "sqrt_t": bad_t,
            "n_corner": int(corner.sum()),
            "corner_q": int(np.sum(corner & (aq > 2 * math.sqrt(2) / math.pi * gamma ** -j))),
            "corner_q_asin": int(np.sum(corner & (aq > 2 / math.pi
                                                  * math.asin(math.sqrt(2) * gamma ** -j)))),
        })
    return rows
