"""Tadpoles, counter-terms, localization and the second-order sunshine self-energy.

Coupling constants are factored out: the tadpole is linear in lambda and
the sunshine quadratic, so numerical kernels are evaluated at lambda = 1
and rescaled.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import cutoffs
from .cutoffs import DEFAULT_GAMMA, DEFAULT_H
from .lattice import band_e_oblique, fermi_project_oblique
from .propagator import (chart_to_quasi, sector_axis_rule, sector_grid, sector_weight,
                         sectors_at)
from .quadrature import fsum, fsum_complex, graded_interval, symmetric

#: bound on |lambda| log^2 T defining the convergence domain
DOMAIN_C = 1.0


class DomainError(ValueError):
    """Coupling outside the convergence domain |lambda| log^2 T < c."""


def check_domain(lam, T, c=DOMAIN_C):
    if abs(lam) * math.log(T) ** 2 >= c:
        raise DomainError("lambda outside the convergence domain: |lambda| log^2 T = %g >= %g"
                         % (abs(lam) * math.log(T) ** 2, c))


def matsubara_sum_ctilde(e, T):
    """T sum_n C~(omega_n, e) over all fermionic frequencies, in closed form.

    With r = sqrt(1 + e) the poles of C~ sit at k0 = i(1 +- r) and the sum
    is (tanh(beta(1+r)/2) - tanh(beta(1-r)/2)) / (4r).
    """
    e = np.asarray(e, float)
    beta = 1.0 / T
    r = np.sqrt(np.maximum(1.0 + e, 0.0))
    small = r < 1e-6
    rs = np.where(small, 1.0, r)
    out = (np.tanh(beta * (1 + rs) / 2) - np.tanh(beta * (1 - rs) / 2)) / (4 * rs)
    q = math.exp(-beta)
    limit = beta * q / (1 + q) ** 2
    return np.where(small, limit, out)


# --- tadpoles ----------------------------------------------------------------

def _slice0_axis(m, gamma):
    """Chart nodes for slice 0, graded toward q = 0 where the cutoff edge bends."""
    depth = math.log(20 * gamma) / math.log(2.0)
    return symmetric(*graded_interval(0.0, 1.0, m, ratio=2.0, floor_depth=depth, hmax=0.1))


def _slice0_sector_integral(sector, T, m, gamma, h):
    """(1/beta) sum_k0 int d^2k/|BZ| of C~ times slice-0 cutoff times sector weight.

    The slice-0 cutoff is 1 - chi(gamma^2 x), so the frequency sum is the
    closed-form full sum minus a finite sum over the modes where
    chi(gamma^2 x) does not vanish. With T None the frequency integral is used.
    """
    pair = tuple(sorted(sector.axes))
    x, wx = _slice0_axis(m, gamma)
    X, Y = np.meshgrid(x, x, indexing="ij")
    qp, qm = chart_to_quasi(pair, X, Y)
    e = band_e_oblique(qp, qm, quasi=True)
    from .lattice import three_factors
    sw = sector_weight(sector, *three_factors(qp, qm, quasi=True), gamma, h)
    kmax = math.sqrt(2) / (2 * gamma)
    if T is None:
        # int dk0/2pi C~ = 1/(4 r); subtract the chi part by Gauss quadrature
        r = np.sqrt(np.maximum(1 + e, 1e-300))
        full = 1.0 / (4 * r)
        k0, w0 = symmetric(*graded_interval(0.0, kmax, m, ratio=3.0))
        w0 = w0 / (2 * math.pi)
    else:
        full = matsubara_sum_ctilde(e, T)
        nmax = max(0, math.floor((kmax / (math.pi * T) - 1) / 2))
        pos = (2 * np.arange(0, nmax + 1) + 1) * math.pi * T
        k0 = np.concatenate([-pos[::-1], pos])
        w0 = np.full(k0.shape, float(T))
    K0 = k0[:, None, None]
    low = (w0[:, None, None] * cutoffs.chi(gamma ** 2 * (4 * K0 ** 2 + e[None] ** 2), h)
           / (-2j * K0 + e[None] + K0 ** 2)).sum(axis=0) if k0.size else 0.0
    vals = (full - low) * sw
    W = wx[:, None] * wx[None, :] / 4.0
    return fsum_complex(W * vals), fsum(W * np.abs(vals))


def tadpole_sector_integrals(j, T, m=24, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """[(sector, integral, integral of |integrand|)] over admissible sectors of slice j."""
    out = []
    for sec in sectors_at(j):
        if j == 0:
            val, mag = _slice0_sector_integral(sec, T, m, gamma, h)
        else:
            g = sector_grid(sec, T, m, gamma, h)
            if g.k0.size == 0:
                out.append((sec, 0j, 0.0))
                continue
            W = g.w0[:, None, None] * g.wx[None, :, None] * g.wy[None, None, :] / 4.0
            val = fsum_complex(W * g.values)
            mag = fsum(W * np.abs(g.values))
        out.append((sec, val, mag))
    return out


@dataclass
class TadpoleScale:
    j: int
    value: float       # lambda-stripped tadpole sum_sigma int C~_{j,sigma}
    abs_sum: float     # sum_sigma |int C~_{j,sigma}|
    majorant: float    # sum_sigma int |C~_{j,sigma}|
    empty: bool


def tadpole_scale(j, T, gamma=DEFAULT_GAMMA, m=24, h=DEFAULT_H):
    """Lambda-stripped tadpole of slice j at temperature T (None for T = 0)."""
    if T is not None and j > cutoffs.j_max(T, gamma):
        raise ValueError("j exceeds j_max")
    rows = tadpole_sector_integrals(j, T, m, gamma, h)
    value = math.fsum(v.real for _, v, _ in rows)
    abs_sum = math.fsum(abs(v) for _, v, _ in rows)
    majorant = math.fsum(g for _, _, g in rows)
    return TadpoleScale(j, value, abs_sum, majorant, majorant == 0.0)


def tadpole_band(T, gamma=DEFAULT_GAMMA, m=24, j_range=None):
    """Rows (j, abs_sum, j gamma^-j, ratio) and the band ratio max/min."""
    jm = cutoffs.j_max(T, gamma)
    js = list(range(2, jm + 1)) if j_range is None else list(j_range)
    rows = []
    for j in js:
        t = tadpole_scale(j, T, gamma, m)
        rate = j * gamma ** (-j)
        rows.append((j, t.abs_sum, rate, t.abs_sum / rate, t))
    ratios = [r[3] for r in rows]
    band = (max(ratios) / min(ratios)) if ratios and min(ratios) > 0 else math.inf
    return rows, band


@dataclass
class CounterTermFlow:
    gamma: float
    T: float
    lam: float
    tadpole: dict
    delta_mu: dict
    partial: list = field(default_factory=list)

    @property
    def total_tadpole(self):
        return math.fsum(self.tadpole.values())

    @property
    def total_delta_mu(self):
        return math.fsum(self.delta_mu.values())

    def condition_residuals(self):
        """T^j + delta mu^j per scale; zero by construction."""
        return {j: self.tadpole[j] + self.delta_mu[j] for j in self.tadpole}


def delta_mu_flow(T, lam, gamma=DEFAULT_GAMMA, m=24, check=True):
    """Tadpoles T^j = lam * value_j for j = 0..j_max and delta mu^j = -T^j."""
    if check:
        check_domain(lam, T)
    tad = {}
    for j in range(0, cutoffs.j_max(T, gamma) + 1):
        tad[j] = lam * tadpole_scale(j, T, gamma, m).value
    dmu = {j: -v for j, v in tad.items()}
    partial = []
    acc = []
    for j in sorted(dmu):
        acc.append(dmu[j])
        partial.append(math.fsum(acc))
    return CounterTermFlow(gamma, T, lam, tad, dmu, partial)


# --- sunshine ----------------------------------------------------------------

def _fft_order(M):
    i = np.arange(M)
    return np.where(i < M // 2, i, i - M)


class SunshineKernel:
    """Second-order sunshine self-energy at lambda = 1 on a periodic grid.

    Momenta run over an N x N grid of (k+, k-) in [0, 2)^2, one reciprocal
    cell, and fermionic frequencies over M modes n in [-M/2, M/2). The
    two-loop convolution sum_{k,p} C(k) C(p) C(k+p-q) is a group
    convolution over the index grid, computed as sum_x g(x) g(-x)^2
    e^{i q.x} with g the inverse FFT of C. Values at arbitrary (q0, q)
    follow from the same trigonometric sum.

    Parameters
    ----------
    T : temperature
    N : momentum resolution, a power of two
    omega_max : frequency cutoff; M is the smallest power of two with
        pi T M >= omega_max
    slice_j : optional slice index applied to all three propagators
    """

    def __init__(self, T, N=128, omega_max=10.0, slice_j=None, gamma=DEFAULT_GAMMA,
                 h=DEFAULT_H):
        if N & (N - 1) or N < 4:
            raise ValueError("resolution must be a power of two >= 4")
        self.T, self.N = T, N
        self.M = max(4, 2 ** math.ceil(math.log2(omega_max / (math.pi * T))))
        self.omega_max = math.pi * T * self.M
        k = 2.0 * np.arange(N) / N
        self.k = k
        n = _fft_order(self.M)
        self.k0 = math.pi * T * (2 * n + 1)
        e = band_e_oblique(k[:, None], k[None, :])
        K0 = self.k0[:, None, None]
        f = 1.0 / (-2j * K0 + e[None] + K0 ** 2)
        if slice_j is not None:
            f = f * cutoffs.slice_cutoff(4 * K0 ** 2 + e[None] ** 2, slice_j, gamma, h)
        G = f.size
        g = G * np.fft.ifftn(f)
        del f
        gneg = np.roll(g[::-1, ::-1, ::-1], 1, axis=(0, 1, 2))
        self.h = g * gneg ** 2 * (T ** 2 / N ** 4 / G)
        self.t = _fft_order(self.M)
        self.x = _fft_order(N)

    @property
    def tail_bound(self):
        """T sum over omitted modes of 1/k0^2: the neglected weight of one line."""
        n0 = self.M // 2
        s = math.pi ** 2 / 8 - math.fsum(1.0 / (2 * n + 1) ** 2 for n in range(n0))
        return 2 * s / (math.pi ** 2 * self.T)

    def __call__(self, q0, kp, km):
        """Sigma at frequency q0 and oblique momentum (kp, km), lambda = 1."""
        nq = (q0 / (math.pi * self.T) - 1) / 2
        p0 = np.exp(2j * math.pi * nq * self.t / self.M)
        pa = np.exp(1j * math.pi * kp * self.x)
        pb = np.exp(1j * math.pi * km * self.x)
        # the unpaired Nyquist harmonic enters as a cosine, keeping the
        # interpolant symmetric off the grid and unchanged on it
        p0[self.M // 2] = math.cos(math.pi * nq)
        pa[self.N // 2] = math.cos(math.pi * kp * self.N / 2)
        pb[self.N // 2] = math.cos(math.pi * km * self.N / 2)
        v = np.tensordot(self.h, pb, axes=(2, 0))
        v = v @ pa
        return complex(fsum_complex(v * p0))

    def grid_values(self):
        """Sigma on the whole frequency-momentum index grid, in FFT order."""
        G = self.h.size
        return G * np.fft.ifftn(self.h)


def sunshine_sigma(q0, kp, km, T, lam=1.0, N=128, omega_max=10.0, kernel=None):
    """lambda^2 times the sunshine at (q0, k+, k-)."""
    ker = kernel if kernel is not None else SunshineKernel(T, N, omega_max)
    return lam ** 2 * ker(q0, kp, km)


VAN_HOVE = (1.0, 0.0)
FERMI_CENTER = (4.0 / 3.0, -2.0 / 3.0)


def derivative_steps(T, gamma=DEFAULT_GAMMA):
    """(k0 step, spatial step): one Matsubara spacing and min(1e-2, gamma^-jmax / 4)."""
    return 2 * math.pi * T, min(1e-2, gamma ** (-cutoffs.j_max(T, gamma)) / 4)


def sigma_derivatives(ker: SunshineKernel, point, gamma=DEFAULT_GAMMA):
    """|Sigma|, first and second finite differences at (pi T, point)."""
    T = ker.T
    d0, ds = derivative_steps(T, gamma)
    q0 = math.pi * T
    kp, km = point
    s0 = ker(q0, kp, km)
    sp, sm = ker(q0 + d0, kp, km), ker(q0 - d0, kp, km)
    d1 = [abs(sp - sm) / (2 * d0)]
    d2_k0 = abs(sp - 2 * s0 + sm) / d0 ** 2
    d2s = []
    for u, v in ((1, 0), (0, 1), (1, 1)):
        a = ker(q0, kp + ds * u, km + ds * v)
        b = ker(q0, kp - ds * u, km - ds * v)
        d1.append(abs(a - b) / (2 * ds))
        d2s.append(abs(a - 2 * s0 + b) / ds ** 2)
    noise = 1e-13 * abs(s0)
    if abs(sp - 2 * s0 + sm) < 100 * noise:
        warnings.warn("second difference near the rounding floor")
    return {"abs_sigma": abs(s0), "d1": max(d1), "d2_k0": d2_k0,
            "d2_spatial": max(d2s), "d2": max(d2_k0, max(d2s))}


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass
class SweepReport:
    point: str
    rows: list
    slopes: dict
    convergence: list


def second_derivative_sweep(point="vanhove", T_list=(0.1, 0.05, 0.025, 0.0125), lam=1.0,
                            N=256, omega_max=10.0, gamma=DEFAULT_GAMMA, check_N=None):
    """Sunshine value and derivatives over temperatures with log-log slopes vs 1/T.

    ``check_N`` adds a coarser run per temperature to record resolution
    convergence (relative change of |Sigma| and of the second derivative).
    """
    if max(T_list) / min(T_list) < 10 ** 0.9:
        raise ValueError("temperature list must span about a decade")
    pt = {"vanhove": VAN_HOVE, "fermipoint": FERMI_CENTER}[point] if isinstance(point, str) \
        else tuple(point)
    rows = []
    conv = []
    for T in T_list:
        ker = SunshineKernel(T, N, omega_max)
        d = sigma_derivatives(ker, pt, gamma)
        d = {k: v * lam ** 2 for k, v in d.items()}
        rows.append(dict(T=T, **d))
        if check_N:
            dc = sigma_derivatives(SunshineKernel(T, check_N, omega_max), pt, gamma)
            conv.append({"T": T, "rel_sigma": abs(dc["abs_sigma"] * lam ** 2 - d["abs_sigma"])
                         / d["abs_sigma"],
                         "rel_d2": abs(dc["d2"] * lam ** 2 - d["d2"]) / d["d2"]})
        del ker
    inv = [1.0 / r["T"] for r in rows]
    slopes = {k: loglog_slope(inv, [r[k] for r in rows])
              for k in ("abs_sigma", "d1", "d2_k0", "d2_spatial", "d2")}
    return SweepReport(point if isinstance(point, str) else "custom", rows, slopes, conv)


# --- localization ------------------------------------------------------------

def project_point(kp, km):
    return fermi_project_oblique(float(kp), float(km))


def tau_operator(f, T):
    """tau f (k0, k) = f(2 pi T, P_F k) as a new callable."""
    def g(k0, kp, km):
        fp, fm = project_point(kp, km)
        return f(2 * math.pi * T, fp, fm)
    return g


@dataclass
class LocalizationSplit:
    points: list
    sigma: np.ndarray
    tau_sigma: np.ndarray
    remainder: np.ndarray
    remainder_k0: np.ndarray
    remainder_k: np.ndarray

    def max_split_error(self):
        return float(np.max(np.abs(self.tau_sigma + self.remainder - self.sigma)))


def localize(f, points, T):
    """Split f = tau f + R f at points (k0, k+, k-).

    The remainder is reported in two pieces: the frequency difference
    f(k0, k) - f(2 pi T, k) and the momentum difference
    f(2 pi T, k) - f(2 pi T, P_F k).
    """
    sig, tau, rk0, rk = [], [], [], []
    for k0, kp, km in points:
        s = f(k0, kp, km)
        mid = f(2 * math.pi * T, kp, km)
        fp, fm = project_point(kp, km)
        loc = f(2 * math.pi * T, fp, fm)
        sig.append(s)
        tau.append(loc)
        rk0.append(s - mid)
        rk.append(mid - loc)
    sig = np.array(sig)
    tau = np.array(tau)
    rem = sig - tau
    return LocalizationSplit(list(points), sig, tau, rem, np.array(rk0), np.array(rk))


def remainder_trend(ker: SunshineKernel, gaps=(1, 2, 3), base=(1.0, -0.5),
                    gamma=DEFAULT_GAMMA):
    """|R Sigma| / |Sigma| at points displaced gamma^-gap off the Fermi line.

    The displacement is along k+ from a point of the edge k+ = 1, with
    k0 = 2 pi T so that only the momentum part of the remainder remains.
    Returns rows (gap, ratio) and the successive ratio quotients.
    """
    T = ker.T
    pts = [(2 * math.pi * T, base[0] + gamma ** (-g), base[1]) for g in gaps]
    sp = localize(ker, pts, T)
    ratios = np.abs(sp.remainder) / np.abs(sp.sigma)
    rows = list(zip(gaps, ratios.tolist()))
    quot = [rows[i + 1][1] / rows[i][1] for i in range(len(rows) - 1)]
    return rows, quot


def nu_hat(ker: SunshineKernel, points):
    """Counter-term nu^ = -tau Sigma at the Fermi projections of the points."""
    return np.array([-ker(2 * math.pi * ker.T, *project_point(kp, km)) for kp, km in points])


# --- interacting propagator --------------------------------------------------

@dataclass
class InteractingReport:
    rows: list
    K_ratio: float
    passed: bool


def interacting_propagator_check(lams=(1e-3, 1e-2), T=1e-2, N=64, omega_max=10.0):
    """sup |R^| with R^ = Sigma C / (1 - Sigma C), the resummed series.

    Sigma is the lambda^2 sunshine on the full frequency-momentum grid and
    C the scalar propagator there. For each lambda the fitted constant is
    K = sup|R^| / |lambda|; the geometric tail bound
    |R^ - Sigma C| <= |Sigma C|^2 / (1 - |Sigma C|) is checked too.
    """
    ker = SunshineKernel(T, N, omega_max)
    sig1 = ker.grid_values()
    e = band_e_oblique(ker.k[:, None], ker.k[None, :])
    K0 = ker.k0[:, None, None]
    C = 1.0 / (-2j * K0 + e[None] + K0 ** 2)
    rows = []
    for lam in lams:
        check_domain(lam, T)
        x = lam ** 2 * sig1 * C
        first = float(np.max(np.abs(x)))
        R = x / (1 - x)
        sup = float(np.max(np.abs(R)))
        tail = float(np.max(np.abs(R - x)))
        tail_ok = first < 1 and tail <= first ** 2 / (1 - first) * (1 + 1e-9)
        rows.append({"lambda": lam, "first_term": first, "sup_R": sup,
                     "K": sup / abs(lam), "tail": tail, "tail_ok": tail_ok})
    Ks = [r["K"] for r in rows]
    ratio = max(Ks) / min(Ks)
    return InteractingReport(rows, ratio, ratio <= 3 and all(r["tail_ok"] for r in rows))
