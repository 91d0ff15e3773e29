"""Honeycomb Brillouin-zone geometry.

Dispersion, band function in Cartesian, oblique and quasi-momentum
coordinates, the Fermi triangles and the projection onto them.

All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3 = np.sqrt(3.0)

#: reciprocal lattice generators
G1 = (2 * np.pi / 3) * np.array([1.0, SQRT3])
G2 = (2 * np.pi / 3) * np.array([1.0, -SQRT3])

#: oblique basis vectors
E_PLUS = (np.pi / 3) * np.array([1.0, SQRT3])
E_MINUS = (np.pi / 3) * np.array([-1.0, SQRT3])

#: a Dirac point (center of the fundamental triangle F0+)
K_F1 = np.array([2 * np.pi / 3, 2 * np.pi / (3 * SQRT3)])

#: rotation by 2pi/3
R_2PI3 = np.array([[-0.5, SQRT3 / 2], [-SQRT3 / 2, -0.5]])


def cart_to_oblique(k1, k2):
    """Cartesian momentum to oblique coordinates (k_plus, k_minus)."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    kp = (3 * k1 + SQRT3 * k2) / (2 * np.pi)
    km = (-3 * k1 + SQRT3 * k2) / (2 * np.pi)
    return kp, km


def oblique_to_cart(kp, km):
    """Inverse of :func:`cart_to_oblique`, k = kp e+ + km e-."""
    kp = np.asarray(kp, dtype=float)
    km = np.asarray(km, dtype=float)
    k1 = (np.pi / 3) * (kp - km)
    k2 = (np.pi / SQRT3) * (kp + km)
    return k1, k2


def quasi_momentum(kp, km):
    """Shift oblique coordinates to quasi-momenta.

    q = k - 1 for k >= 0 and q = k + 1 for k < 0; the branch at k = 0
    is the k >= 0 one.
    """
    kp = np.asarray(kp, dtype=float)
    km = np.asarray(km, dtype=float)
    qp = np.where(kp >= 0, kp - 1.0, kp + 1.0)
    qm = np.where(km >= 0, km - 1.0, km + 1.0)
    return qp, qm


def omega(k1, k2):
    """Complex dispersion Omega(k) = 1 + 2 exp(-3i k1/2) cos(sqrt3 k2/2)."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    return 1.0 + 2.0 * np.exp(-1.5j * k1) * np.cos(SQRT3 * k2 / 2)


def band_e(k1, k2, mu=1.0):
    """Band function e(k, mu) = |Omega(k)|^2 - mu^2, trigonometric form."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    c2 = np.cos(SQRT3 * k2 / 2)
    return 4 * np.cos(1.5 * k1) * c2 + 4 * c2 ** 2 + 1.0 - mu ** 2


def band_e_oblique(kp, km, quasi=False):
    """Band function at mu = 1 in oblique or quasi-momentum coordinates.

    Parameters
    ----------
    kp, km : array_like
        Oblique coordinates, or quasi-momenta when ``quasi`` is True.
    quasi : bool
        Use the product form in (q+, q-).
    """
    kp = np.asarray(kp, dtype=float)
    km = np.asarray(km, dtype=float)
    if quasi:
        return (-8 * np.cos(np.pi * (kp + km) / 2)
                * np.sin(np.pi * kp / 2) * np.sin(np.pi * km / 2))
    return (8 * np.cos(np.pi * (kp + km) / 2)
            * np.cos(np.pi * kp / 2) * np.cos(np.pi * km / 2))


def three_factors(kp, km, quasi=False):
    """The three squared factors (t1, t2, t3) of the band function.

    Their product equals e(k,1)^2 / 64.
    """
    kp = np.asarray(kp, dtype=float)
    km = np.asarray(km, dtype=float)
    if quasi:
        t1 = np.sin(np.pi * kp / 2) ** 2
        t2 = np.sin(np.pi * km / 2) ** 2
    else:
        t1 = np.cos(np.pi * kp / 2) ** 2
        t2 = np.cos(np.pi * km / 2) ** 2
    t3 = np.cos(np.pi * (kp + km) / 2) ** 2
    return t1, t2, t3


def three_factors_cart(k1, k2):
    """Three factors evaluated at a Cartesian momentum."""
    return three_factors(*cart_to_oblique(k1, k2))


def rotate(k1, k2, inverse=False):
    """Apply the 2pi/3 rotation (or its inverse) to a momentum."""
    R = R_2PI3.T if inverse else R_2PI3
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    return R[0, 0] * k1 + R[0, 1] * k2, R[1, 0] * k1 + R[1, 1] * k2


def reduce_to_zone(k1, k2):
    """Reduce k modulo the reciprocal lattice to a G1, G2 in [-1/2, 1/2)."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    M = np.column_stack([G1, G2])
    ab = np.linalg.solve(M, np.stack([k1.ravel(), k2.ravel()]))
    ab = ab - np.floor(ab + 0.5)
    k = M @ ab
    return k[0].reshape(k1.shape), k[1].reshape(k2.shape)


def zone_area():
    """Measure of the Brillouin zone, |G1 x G2|."""
    return abs(G1[0] * G2[1] - G1[1] * G2[0])


def matsubara(n, T):
    """Matsubara frequency (2n+1) pi T."""
    return (2 * np.asarray(n) + 1) * np.pi * T


@dataclass(frozen=True)
class Segment:
    """Closed segment between two points in oblique coordinates."""
    start: tuple[float, float]
    end: tuple[float, float]

    def sample(self, n: int = 11):
        s = np.linspace(0.0, 1.0, n)
        p = np.asarray(self.start)
        q = np.asarray(self.end)
        pts = p[None, :] + s[:, None] * (q - p)[None, :]
        return pts[:, 0], pts[:, 1]

    def foot(self, kp, km):
        """Closest point of the segment to (kp, km) in the (k+, k-) metric."""
        p = np.asarray(self.start)
        d = np.asarray(self.end) - p
        s = ((kp - p[0]) * d[0] + (km - p[1]) * d[1]) / (d @ d)
        s = min(max(s, 0.0), 1.0)
        return p[0] + s * d[0], p[1] + s * d[1]


@dataclass(frozen=True)
class Triangle:
    vertices: tuple[tuple[float, float], ...]
    fundamental: bool = False
    label: str = ""

    @property
    def edges(self):
        v = self.vertices
        return tuple(Segment(v[i], v[(i + 1) % 3]) for i in range(3))


#: F0+ is bounded by k+ = 1, k- = -1 and k+ + k- = 1
F0_PLUS = Triangle(((1.0, -1.0), (1.0, 0.0), (2.0, -1.0)), True, "F0+")
#: F0- is the mirror image under k2 -> -k2, i.e. (k+, k-) -> (-k-, -k+)
F0_MINUS = Triangle(((1.0, -1.0), (0.0, -1.0), (1.0, -2.0)), True, "F0-")


def fermi_triangles():
    """The two fundamental triangles and their four reciprocal translates.

    Translations by 2 e+ and 2 e- (i.e. G1 and -G2) generate all the others.
    """
    tris = [F0_PLUS, F0_MINUS]
    for base in (F0_PLUS, F0_MINUS):
        for shift in ((-2.0, 0.0), (0.0, 2.0)):
            verts = tuple((a + shift[0], b + shift[1]) for a, b in base.vertices)
            tris.append(Triangle(verts, False, base.label + "%+d%+d" % shift))
    return tris


def van_hove_points():
    """Vertices of the fundamental triangles, oblique coordinates, deduplicated."""
    pts = sorted({v for t in (F0_PLUS, F0_MINUS) for v in t.vertices})
    return pts


def fermi_project_oblique(kp: float, km: float):
    """Nearest point of the boundary of F0+ or F0- in (k+, k-) coordinates.

    Ties (equidistant edges, within 1e-14) resolve to the lexicographically
    smallest foot point.
    """
    best = None
    for tri in (F0_PLUS, F0_MINUS):
        for seg in tri.edges:
            f = seg.foot(kp, km)
            d = np.hypot(kp - f[0], km - f[1])
            cand = (d, f)
            if best is None or d < best[0] - 1e-14:
                best = cand
            elif abs(d - best[0]) <= 1e-14 and f < best[1]:
                best = cand
    return best[1]


def fermi_project(k1: float, k2: float):
    """Project a Cartesian momentum onto the fundamental Fermi triangles."""
    kp, km = cart_to_oblique(k1, k2)
    fp, fm = fermi_project_oblique(float(kp), float(km))
    return tuple(float(x) for x in oblique_to_cart(fp, fm))
