"""Graded Gauss-Legendre grids and order-independent reductions."""
from __future__ import annotations

import math

import numpy as np


class ResolutionError(RuntimeError):
    """Quadrature cannot resolve the requested oscillation or sector."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


def gauss_panels(breaks, m):
    """Composite m-point Gauss-Legendre rule on consecutive breakpoints."""
    x, w = np.polynomial.legendre.leggauss(m)
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def geometric_breaks(lo, hi, ratio):
    """Breakpoints from lo to hi (lo > 0) with successive ratio at most ``ratio``."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    n = max(1, math.ceil(math.log(hi / lo) / math.log(ratio) - 1e-12))
    return np.geomspace(lo, hi, n + 1)


def refine_breaks(breaks, hmax):
    """Split panels wider than hmax into equal parts."""
    out = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        k = max(1, math.ceil((b - a) / hmax - 1e-12))
        out.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(out)


def graded_interval(lo, hi, m, ratio=3.0, floor_depth=2.0, hmax=None):
    """Gauss nodes on [lo, hi] graded geometrically toward lo.

    With lo == 0 the first panel is [0, hi / ratio**floor_depth] and the
    rest is graded geometrically. Panels wider than ``hmax`` are split.
    """
    if hi <= lo:
        return np.empty(0), np.empty(0)
    if lo <= 0.0:
        inner = hi / ratio ** floor_depth
        breaks = np.concatenate([[0.0], geometric_breaks(inner, hi, ratio)])
    else:
        breaks = geometric_breaks(lo, hi, ratio)
    if hmax is not None:
        breaks = refine_breaks(breaks, hmax)
    return gauss_panels(breaks, m)


def symmetric(nodes, weights):
    """Mirror a rule on [0, a] to [-a, a]."""
    return (np.concatenate([-nodes[::-1], nodes]),
            np.concatenate([weights[::-1], weights]))


def fsum_complex(values):
    """Correctly rounded sum of a complex array, independent of order."""
    v = np.asarray(values).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def fsum(values):
    return math.fsum(np.asarray(values, dtype=float).ravel())
