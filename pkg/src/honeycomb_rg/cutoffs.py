"""Gevrey cutoff, scale and sector partitions of unity, index algebra."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DEFAULT_GAMMA = 10.0
DEFAULT_H = 2.0


def chi(t, h=DEFAULT_H):
    """Even Gevrey-h bump: 1 on |t| <= 1, 0 on |t| >= 2, smooth in between.

    In between, with u = 2 - |t| and f(u) = exp(-u^{-1/(h-1)}), the value
    is f(u) / (f(u) + f(1 - u)).
    """
    t0 = np.asarray(t, dtype=float)
    t = np.abs(t0).reshape(-1)
    out = (t <= 1.0).astype(float)
    mid = (t > 1.0) & (t < 2.0)
    if np.any(mid):
        u = 2.0 - t[mid]
        p = -1.0 / (h - 1.0)
        # ratio form f(1-u)/f(u) = exp(u^p - (1-u)^p) avoids 0/0 underflow
        with np.errstate(over="ignore"):
            out[mid] = 1.0 / (1.0 + np.exp(u ** p - (1.0 - u) ** p))
    return out.reshape(t0.shape) if t0.ndim else float(out[0])


def chi_j(t, j, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """Scale slice chi_j; chi_0 = 1 - chi and chi(g^{2j-2} t) - chi(g^{2j} t) for j >= 1."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    t = np.asarray(t, dtype=float)
    if j == 0:
        return 1.0 - chi(t, h)
    return chi(gamma ** (2 * j - 2) * t, h) - chi(gamma ** (2 * j) * t, h)


def v_s(t, s, j, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """Sector cutoff v_s at scale j; sums to one over s = 0..j."""
    if not 0 <= s <= j:
        raise ValueError("need 0 <= s <= j")
    t = np.asarray(t, dtype=float)
    if j == 0:
        return np.ones_like(t)
    if s == j:
        return chi(gamma ** (2 * j) * t, h)
    if s == 0:
        return 1.0 - chi(gamma ** 2 * t, h)
    return chi_j(t, s + 1, gamma, h)


def slice_cutoff(x, j, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """Cutoff of the propagator slice j applied to x = 4 k0^2 + e^2.

    Slice j >= 1 is chi(gamma^{2j} x) - chi(gamma^{2j+2} x), supported on
    gamma^{-2j-2} <= x <= 2 gamma^{-2j}; slice 0 is 1 - chi(gamma^2 x).
    The profile is the same one used by ``v_s`` for sector s.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    x = np.asarray(x, dtype=float)
    if j == 0:
        return 1.0 - chi(gamma ** 2 * x, h)
    return chi_j(x, j + 1, gamma, h)


def slice_support(j, gamma=DEFAULT_GAMMA):
    """Closed window (lo, hi) of 4 k0^2 + e^2 on slice j."""
    if j == 0:
        return (gamma ** -2, math.inf)
    return (gamma ** (-2 * j - 2), 2 * gamma ** (-2 * j))


def k0_window(j, gamma=DEFAULT_GAMMA):
    """Window for |k0| on slice j: 1/4 g^{-2j-2} <= k0^2 <= 1/2 g^{-2j}."""
    if j == 0:
        return (0.0, math.inf)
    return (0.5 * gamma ** (-j - 1), gamma ** (-j) / math.sqrt(2))


def v_support_window(s, j, gamma=DEFAULT_GAMMA):
    """Closed window (lo, hi) for sqrt(t) on the support of v_s."""
    if s == 0:
        return (1.0 / gamma, 1.0) if j > 0 else (0.0, 1.0)
    if s == j:
        return (0.0, math.sqrt(2) * gamma ** (-j))
    return (gamma ** (-s - 1), math.sqrt(2) * gamma ** (-s))


def q_support_window(s, j, gamma=DEFAULT_GAMMA):
    """Window on |q| implied by the sector support, using |q| <= 1."""
    c = 2 * math.sqrt(2) / math.pi
    if s == 0:
        return (2 / (math.pi * gamma), 1.0) if j > 0 else (0.0, 1.0)
    if s == j:
        return (0.0, c * gamma ** (-j))
    return (2 * gamma ** (-s - 1) / math.pi, c * gamma ** (-s))


def j_max(T, gamma=DEFAULT_GAMMA):
    """Largest scale index, floor(1 + log_gamma(1/(sqrt2 pi T)))."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    x = 1.0 + math.log(1.0 / (math.sqrt(2) * math.pi * T)) / math.log(gamma)
    # guard against log rounding just below an integer
    return int(math.floor(x + 1e-12))


def r_max(T, gamma=DEFAULT_GAMMA):
    """Largest generalized scale, floor(1 + 3 j_max / 2)."""
    return int(math.floor(1 + Fraction(3 * j_max(T, gamma), 2)))


@dataclass(frozen=True)
class ScaleSystem:
    gamma: float = DEFAULT_GAMMA
    T: float = 1e-2
    h: float = DEFAULT_H

    def __post_init__(self):
        if self.gamma < 10:
            raise ValueError("gamma must be >= 10")
        if self.T <= 0:
            raise ValueError("temperature must be positive")
        if self.h <= 1:
            raise ValueError("Gevrey index must exceed 1")

    @property
    def alpha(self):
        return 1.0 / self.h

    @property
    def j_max(self):
        return j_max(self.T, self.gamma)

    @property
    def r_max(self):
        return r_max(self.T, self.gamma)


@dataclass(frozen=True)
class SectorTriple:
    """Scale j with sector indices (s_a, s_b) on axes (a, b)."""
    j: int
    s_a: int
    s_b: int
    axes: tuple[int, int] = (1, 2)

    def __post_init__(self):
        if not (0 <= self.s_a <= self.j and 0 <= self.s_b <= self.j):
            raise ValueError("sector indices must lie in [0, j]")
        if self.s_a + self.s_b < self.j - 2:
            raise ValueError("s_a + s_b must be >= j - 2")
        a, b = self.axes
        if a == b or a not in (1, 2, 3) or b not in (1, 2, 3):
            raise ValueError("axes must be two distinct elements of {1,2,3}")

    @property
    def l(self) -> int:
        return self.s_a + self.s_b - self.j + 2

    @property
    def r_exact(self) -> Fraction:
        """Generalized scale before taking the integer part."""
        return Fraction(self.j + self.s_a + self.s_b, 2) + 1

    @property
    def r(self) -> int:
        return math.floor(self.r_exact)


def _chi_mp(t, h):
    import mpmath as mp
    u = 2 - abs(t)
    if u >= 1:
        return mp.mpf(1)
    if u <= 0:
        return mp.mpf(0)
    a = mp.exp(-u ** (-1 / mp.mpf(h - 1)))
    b = mp.exp(-(1 - u) ** (-1 / mp.mpf(h - 1)))
    return a / (a + b)


def chi_derivative_sups(max_order=8, h=DEFAULT_H, n_grid=200, dps=40):
    """sup_t |chi^(n)(t)| for n <= max_order on a grid of the transition region.

    Derivatives are taken at extended precision so that orders up to 8
    are not swamped by roundoff.
    """
    import mpmath as mp
    sups = [0.0] * (max_order + 1)
    with mp.workdps(dps):
        for t in np.linspace(1.0, 2.0, n_grid + 2)[1:-1]:
            for n, d in enumerate(mp.diffs(lambda x: _chi_mp(x, h), mp.mpf(float(t)), max_order)):
                sups[n] = max(sups[n], abs(float(d)))
    sups[0] = 1.0
    return sups


def chi_fd_slope(h=DEFAULT_H, step=1e-4, n_grid=20001):
    """Max |chi'| by central differences, an independent first-order estimate."""
    t = np.linspace(1.0, 2.0, n_grid)
    return float(np.max(np.abs(chi(t + step, h) - chi(t - step, h)) / (2 * step)))


def gevrey_check(max_order=6, h=DEFAULT_H, tol=0.75):
    """Gevrey-class growth of the cutoff derivatives.

    Fits log sup|chi^(n)| = a + n log(gamma_c^-1) + e log(n!) over
    1 <= n <= max_order and compares the fitted exponent e with h.
    ``A`` is the smallest constant with sup|chi^(n)| <= A gamma_c^-n (n!)^h
    for the fitted rate.
    """
    if max_order > 8:
        raise ValueError("max_order must be <= 8")
    if max_order < 3:
        raise ValueError("max_order must be >= 3 to fit a growth exponent")
    sups = chi_derivative_sups(max_order, h)
    n = np.arange(max_order + 1)
    logfac = np.array([math.lgamma(k + 1) for k in n])
    X = np.column_stack([np.ones(max_order), n[1:], logfac[1:]])
    coef = np.linalg.lstsq(X, np.log(sups[1:]), rcond=None)[0]
    exponent = float(coef[2])
    rate = float(coef[1])
    y = np.log(sups) - rate * n - h * logfac
    A = float(np.exp(y.max()))
    return {"sups": sups, "exponent": exponent, "A": A,
            "gamma_c": float(np.exp(-rate)),
            "max_error": abs(exponent - h),
            "pass": bool(abs(exponent - h) <= tol)}
