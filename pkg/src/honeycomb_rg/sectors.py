"""Sector catalogs, emptiness audit, vertex indicator and sector-counting sums.

Sector indices at scale j are pairs (s_a, s_b) with 0 <= s <= j and
s_a + s_b >= j - 2. The depth index is l = s_a + s_b - j + 2 and the
generalized scale is r = floor(j + l / 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cutoffs
from .cutoffs import DEFAULT_GAMMA, DEFAULT_H, SectorTriple

CLASSES = ("corner", "middle-face", "face", "diagonal", "general")


def classify(j, s_a, s_b):
    """Class tag of the sector (s_a, s_b) at scale j."""
    if s_a == j and s_b == j:
        return "corner"
    if (s_a == j) != (s_b == j):
        return "middle-face" if min(s_a, s_b) == 0 else "face"
    if s_a == s_b and 2 * s_a >= j - 2:
        return "diagonal"
    return "general"


@dataclass
class SectorCatalog:
    j: int
    sectors: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    def __len__(self):
        return len(self.sectors)

    def rows(self):
        """(s_a, s_b, class, l, r) per sector."""
        return [(s.s_a, s.s_b, t, s.l, s.r) for s, t in zip(self.sectors, self.tags)]

    def by_class(self):
        out = {c: [] for c in CLASSES}
        for s, t in zip(self.sectors, self.tags):
            out[t].append(s)
        return out


def enumerate_sectors(j, axes=(1, 2)):
    """All admissible sectors at scale j in lexicographic (s_a, s_b) order."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    cat = SectorCatalog(j)
    for sa in range(j + 1):
        for sb in range(max(0, j - 2 - sa), j + 1):
            cat.sectors.append(SectorTriple(j, sa, sb, axes))
            cat.tags.append(classify(j, sa, sb))
    return cat


def sector_count(j):
    """Closed form: (j+1)^2 minus the m(m+1)/2 pairs with s_a + s_b <= j - 3."""
    m = max(0, j - 2)
    return (j + 1) ** 2 - m * (m + 1) // 2


def k_prime(gamma=DEFAULT_GAMMA):
    """Lower bound sqrt2/2 (1 - 2 gamma^-2) on the unsliced cosine factor."""
    return math.sqrt(2) / 2 * (1 - 2 * gamma ** -2)


def _audit_axis(j, gamma):
    """Chart-coordinate samples dense near zero at every scale down to gamma^-j."""
    deep = np.geomspace(gamma ** (-j - 2) / 4, 1.0, 40 * (j + 3))
    lin = np.linspace(0.0, 1.0, 201)
    pos = np.unique(np.concatenate([deep, lin]))
    return np.concatenate([-pos[::-1], pos])


class _AuditGrid:
    """Chart grid for one scale with cached factors, slice envelope and v_s."""

    def __init__(self, j, axes, gamma, h, n_k0=11):
        from .lattice import three_factors
        from .propagator import UNSLICED, chart_to_quasi, chart_weights
        self.j, self.gamma, self.h = j, gamma, h
        a, b = sorted(axes)
        self.swap = tuple(axes) != (a, b)
        x = _audit_axis(j, gamma)
        X, Y = np.meshgrid(x, x, indexing="ij")
        t = three_factors(*chart_to_quasi((a, b), X, Y), quasi=True)
        self.ta, self.tb = t[a - 1], t[b - 1]
        self.tc = t[UNSLICED[(a, b)] - 1]
        self.chart = chart_weights(*t, h)[UNSLICED[(a, b)] - 1]
        e2 = 64 * t[0] * t[1] * t[2]
        lo, hi = cutoffs.k0_window(j, gamma)
        k0 = np.linspace(0.0, 2.0, 4 * n_k0) if math.isinf(hi) else \
            np.concatenate([[0.0], np.linspace(lo, hi, n_k0)])
        env = np.zeros_like(e2)
        for z in k0:
            env = np.maximum(env, cutoffs.slice_cutoff(4 * z * z + e2, j, gamma, h))
        self.envelope = env * self.chart
        self._va = {}
        self._vb = {}

    def values(self, sa, sb):
        if self.swap:
            sa, sb = sb, sa
        if sa not in self._va:
            self._va[sa] = cutoffs.v_s(self.ta, sa, self.j, self.gamma, self.h)
        if sb not in self._vb:
            self._vb[sb] = cutoffs.v_s(self.tb, sb, self.j, self.gamma, self.h)
        return self.envelope * self._va[sa] * self._vb[sb]


def sector_support_values(sector: SectorTriple, gamma=DEFAULT_GAMMA, h=DEFAULT_H):
    """Slice cutoff (max over k0 in the slice window) times sector weight on an audit grid.

    Returns the values and the unsliced factor t_c on the same grid.
    """
    g = _AuditGrid(sector.j, sector.axes, gamma, h)
    return g.values(sector.s_a, sector.s_b), g.tc


@dataclass
class BoundReport:
    name: str
    rows: list
    passed: bool
    witness: object = None


def empty_sector_audit(j, gamma=DEFAULT_GAMMA, h=DEFAULT_H, axes=(1, 2)):
    """Grid sup of the sectorized cutoff for every excluded pair at scale j.

    Also checks the lower bound K' on |cos| of the unsliced factor over the
    support of every admitted sector with both indices >= 2, and records
    the grid max of the corner sector.
    """
    if j < 2:
        raise ValueError("need j >= 2")
    g = _AuditGrid(j, axes, gamma, h)
    rows = []
    passed = True
    witness = None
    kp = k_prime(gamma)
    for sa in range(j + 1):
        for sb in range(j + 1):
            if sa + sb < j - 2:
                sup = float(g.values(sa, sb).max())
                ok = sup < 1e-10
                rows.append(("excluded", sa, sb, sup, ok))
            elif sa >= 2 and sb >= 2:
                on = g.values(sa, sb) > 0
                cmin = float(np.sqrt(g.tc[on]).min()) if on.any() else math.inf
                ok = cmin >= kp
                rows.append(("cosine", sa, sb, cmin, ok))
            else:
                continue
            if not ok and witness is None:
                witness = (sa, sb)
            passed &= ok
    corner = float(g.values(j, j).max())
    rows.append(("corner", j, j, corner, corner > 0))
    return BoundReport("empty_sector_audit", rows, passed, witness)


def vertex_indicator(sectors, js=None):
    """Momentum-conservation indicator of a quartic vertex.

    Parameters
    ----------
    sectors : sequence of four (s_a, s_b) pairs or SectorTriple
    js : sequence of four scale indices; taken from the triples if omitted

    For each axis the two smallest indices must differ by at most one, or
    the smallest must equal its own scale index with that scale strictly
    below the other three.
    """
    pairs = [(s.s_a, s.s_b) if isinstance(s, SectorTriple) else tuple(s) for s in sectors]
    if js is None:
        js = [s.j for s in sectors]
    if len(pairs) != 4 or len(js) != 4:
        raise ValueError("a vertex has four fields")
    for ax in (0, 1):
        order = sorted(range(4), key=lambda i: (pairs[i][ax], js[i], i))
        v0, v1 = pairs[order[0]][ax], pairs[order[1]][ax]
        if v1 - v0 <= 1:
            continue
        i0 = order[0]
        if v0 == js[i0] and all(js[i0] < js[k] for k in range(4) if k != i0):
            continue
        return 0
    return 1


def sectors_at_r(r):
    """All (j, s_a, s_b) with generalized scale floor(j + l/2) == r."""
    out = []
    for j in range(0, r + 1):
        for sa in range(j + 1):
            for sb in range(max(0, j - 2 - sa), j + 1):
                if (j + sa + sb) // 2 + 1 == r:
                    out.append((j, sa, sb))
    return out


def _arrays(r):
    secs = sectors_at_r(r)
    arr = np.array(secs, dtype=np.int64).reshape(-1, 3)
    l = arr[:, 1] + arr[:, 2] - arr[:, 0] + 2
    return arr, l


def _indicator_vec(J, SA, SB):
    """Vectorized vertex_indicator; inputs have shape (n, 4)."""
    ok = np.ones(J.shape[0], bool)
    rows = np.arange(J.shape[0])
    for S in (SA, SB):
        # sort by (value, j, leg) exactly as the scalar rule
        key = np.lexsort((np.broadcast_to(np.arange(4), S.shape), J, S), axis=1)
        v0 = S[rows, key[:, 0]]
        v1 = S[rows, key[:, 1]]
        j0 = J[rows, key[:, 0]]
        others = np.ones_like(J, bool)
        others[rows, key[:, 0]] = False
        jmin_other = np.where(others, J, np.iinfo(np.int64).max).min(axis=1)
        ok &= (v1 - v0 <= 1) | ((v0 == j0) & (j0 < jmin_other))
    return ok


def default_root(r):
    """Root field sector at generalized scale r + 1: the middle face (r, 0, r)."""
    return (r, 0, r)


def counting_sum_vertex(r, root=None, gamma=DEFAULT_GAMMA, order="lex"):
    """S(r) = sum over three fields at scale r passing the vertex indicator.

    Each admitted triple contributes gamma^{-(l1+l2+l3)/4}. The sum is
    exhaustive; ``order`` 'lex' or 'rev' swaps the enumeration order of
    the outer field, as a determinism check.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    root = default_root(r) if root is None else tuple(root)
    arr, l = _arrays(r)
    n = len(arr)
    w = gamma ** (-l / 4.0)
    i2, i3 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i2 = i2.ravel()
    i3 = i3.ravel()
    outer = range(n) if order == "lex" else range(n - 1, -1, -1)
    terms = []
    for i1 in outer:
        J = np.column_stack([np.full(n * n, arr[i1, 0]), arr[i2, 0], arr[i3, 0],
                             np.full(n * n, root[0])])
        SA = np.column_stack([np.full(n * n, arr[i1, 1]), arr[i2, 1], arr[i3, 1],
                              np.full(n * n, root[1])])
        SB = np.column_stack([np.full(n * n, arr[i1, 2]), arr[i2, 2], arr[i3, 2],
                              np.full(n * n, root[2])])
        ok = _indicator_vec(J, SA, SB)
        terms.append(w[i1] * w[i2[ok]] * w[i3[ok]])
    return math.fsum(np.concatenate(terms)) if terms else 0.0


def _transfer(r, ext, gamma):
    """Matrix M[p, q] = indicator(p, q, ext, ext) gamma^{-l_q/4} over sectors at r."""
    arr, l = _arrays(r)
    n = len(arr)
    p, q = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    p = p.ravel()
    q = q.ravel()
    e = np.full(n * n, 0)
    J = np.column_stack([arr[p, 0], arr[q, 0], e + ext[0], e + ext[0]])
    SA = np.column_stack([arr[p, 1], arr[q, 1], e + ext[1], e + ext[1]])
    SB = np.column_stack([arr[p, 2], arr[q, 2], e + ext[2], e + ext[2]])
    ok = _indicator_vec(J, SA, SB).reshape(n, n)
    return ok * (gamma ** (-l / 4.0))[None, :], gamma ** (-l / 4.0)


def chain_sum(r, n_lines, ext=None, gamma=DEFAULT_GAMMA):
    """Sum over n_lines sectors at scale r along a chain of quartic vertices.

    Consecutive lines meet at a vertex whose other two fields carry the
    fixed external sector ``ext``; each vertex carries the indicator and
    each line the weight gamma^{-l/4}. Evaluated exactly by transfer
    matrices.
    """
    if n_lines == 0:
        return 1.0
    ext = default_root(r) if ext is None else tuple(ext)
    M, w = _transfer(r, ext, gamma)
    v = w.copy()
    for _ in range(n_lines - 1):
        v = v @ M
    return math.fsum(v)


def fit_exponent(rs, values):
    """Least-squares slope of log value vs log r on the upper half of the range."""
    rs = np.asarray(rs, float)
    values = np.asarray(values, float)
    k = len(rs) // 2
    x, y = np.log(rs[k:]), np.log(values[k:])
    return float(np.polyfit(x, y, 1)[0])


def counting_sum_quadruped(r, d_q, gamma=DEFAULT_GAMMA):
    """Quadruped kernel: d_q - 1 tree lines between maximal sub-quadrupeds."""
    if not 1 <= d_q <= 4:
        raise ValueError("d_Q must be in 1..4")
    return chain_sum(r, d_q - 1, gamma=gamma)


def counting_sum_biped(r, n, gamma=DEFAULT_GAMMA):
    """Biped kernel: 2n + 1 independent sectors summed at scale r."""
    if not 0 <= n <= 3:
        raise ValueError("n must be in 0..3")
    return chain_sum(r, 2 * n + 1, gamma=gamma)


def counting_sweep(kind, param, rs, gamma=DEFAULT_GAMMA):
    """Values over rs and the fitted exponent (upper half of the range)."""
    if kind == "vertex":
        vals = [counting_sum_vertex(r, gamma=gamma) for r in rs]
    elif kind == "quadruped":
        vals = [counting_sum_quadruped(r, param, gamma) for r in rs]
    elif kind == "biped":
        vals = [counting_sum_biped(r, param, gamma) for r in rs]
    else:
        raise ValueError(kind)
    return vals, fit_exponent(rs, vals)


def momentum_sum_check(n_samples=10000, j=6, gamma=DEFAULT_GAMMA, seed=0):
    """Sampled four-tuples with at most one zero index per axis have |sum q| < 2.

    Quasi-momenta are drawn uniformly from the support window of their
    sector index. Returns (max |sum q| over samples, pass).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples // 100):
        for _ax in range(2):
            s = rng.integers(1, j + 1, size=4)
            s[rng.integers(0, 4)] = rng.integers(0, j + 1)
            q = np.empty((100, 4))
            for i, si in enumerate(s):
                lo, hi = cutoffs.q_support_window(int(si), j, gamma)
                q[:, i] = rng.uniform(lo, hi, 100) * rng.choice([-1.0, 1.0], 100)
            worst = max(worst, float(np.abs(q.sum(axis=1)).max()))
    return worst, worst < 2.0
