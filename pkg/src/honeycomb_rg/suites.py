"""Check suites for the command-line harness and the property registry.

Every check returns rows ``Row(tag, check, measured, bound, constant,
passed)``. Tags name the property being checked; ``REGISTRY`` maps each
tag to its suite and is the single source of coverage truth.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, asdict

import numpy as np

from . import cutoffs, forest, lattice, multiarch, propagator, renorm, sectors


@dataclass
class Row:
    tag: str
    check: str
    measured: float
    bound: str
    constant: float | None
    passed: bool

    def as_dict(self):
        return asdict(self)


#: tag -> (suite, description)
REGISTRY = {
    "band-forms": ("cutoffs", "three forms of the band function agree with |Omega|^2 - mu^2"),
    "fermi-triangle": ("cutoffs", "edges of the Fermi triangles lie on e = 0"),
    "scale-partition": ("cutoffs", "scale slices sum to one"),
    "sector-partition": ("cutoffs", "sector cutoffs sum to one"),
    "jmax-formula": ("cutoffs", "largest scale index at reference temperatures"),
    "gevrey-growth": ("cutoffs", "cutoff derivatives grow like (n!)^h"),
    "frequency-window": ("cutoffs", "stated frequency window on the slice support"),
    "sector-window": ("cutoffs", "v_s support window on sqrt(t)"),
    "corner-window": ("cutoffs", "corner sector momentum window"),
    "a-matrix-bounds": ("propagator", "matrix factor entries within [0.9, 2] on slice supports"),
    "sector-reassembly": ("propagator", "sectorized propagators sum to the sliced propagator"),
    "slice-sup-band": ("propagator", "slice sup norm times gamma^-j in a fixed band"),
    "jmax-sup": ("propagator", "top nonempty slice sup near 1/(2 pi T)"),
    "sector-sup-band": ("propagator", "sector-class sup norm times gamma^-j in a fixed band"),
    "l1-band": ("propagator", "direct-space L1 norm times gamma^-j in a fixed band"),
    "origin-prefactor-band": ("propagator", "|C(0)| gamma^(j+l) in a fixed band"),
    "gevrey-decay": ("propagator", "direct-space stretched-exponential decay exponent"),
    "sector-emptiness": ("counting", "sectors with s_a + s_b < j - 2 vanish"),
    "third-factor-bound": ("counting", "unsliced cosine bounded below on deep sectors"),
    "vertex-counting": ("counting", "vertex sector sum grows at most linearly in r"),
    "quadruped-counting": ("counting", "quadruped sector sums grow like r^(d_Q - 1)"),
    "biped-counting": ("counting", "biped sector sums grow like r^(2n + 1)"),
    "momentum-conservation": ("counting", "admitted vertex tuples have |sum q| < 2"),
    "forest-count": ("forest", "forest counts follow the recurrence"),
    "cayley": ("forest", "spanning tree counts n^(n-2)"),
    "interpolation-psd": ("forest", "interpolation matrices are positive semidefinite"),
    "gn-induction": ("forest", "tree exponent identities hold exactly"),
    "power-counting": ("forest", "superficial degree 2 - e/2"),
    "one-level-1pi": ("arch", "minimal one-level arch systems are 1PI"),
    "two-level-2pi": ("arch", "two-level systems are 2PI and one-vertex irreducible"),
    "ring-extraction": ("arch", "flow-based ring matches brute-force two-path search"),
    "flyover-growth": ("arch", "flyover-weighted counts grow exponentially in n"),
    "tadpole-band": ("renorm", "tadpole per scale over j gamma^-j in a fixed band"),
    "tadpole-total": ("renorm", "total tadpole over lambda independent of T"),
    "tadpole-convergence": ("renorm", "tadpole quadrature self-convergence between resolutions"),
    "counterterm-condition": ("renorm", "tadpole plus counter-term vanishes per scale"),
    "localization-split": ("renorm", "tau Sigma + R Sigma = Sigma"),
    "tau-idempotent": ("renorm", "tau tau Sigma = tau Sigma"),
    "remainder-trend": ("renorm", "remainder shrinks over constructed scale gaps"),
    "sunshine-conjugation": ("renorm", "Sigma(-q0, k) = conj Sigma(q0, k)"),
    "sunshine-value-slope": ("renorm", "|Sigma| slope vs 1/T at the van Hove point"),
    "sunshine-first-slope": ("renorm", "|d Sigma| slope vs 1/T at the van Hove point"),
    "sunshine-second-slope": ("renorm", "|d^2 Sigma| slope vs 1/T at the van Hove point"),
    "sunshine-fermi-slower": ("renorm", "Fermi-point curve below the van Hove curve"),
    "interacting-propagator": ("renorm", "sup |R| <= K |lambda| with stable K"),
}

SUITES = ("cutoffs", "propagator", "counting", "forest", "arch", "renorm")


def band_ratio(values):
    values = [float(v) for v in values]
    lo = min(values)
    return max(values) / lo if lo > 0 else math.inf


# --- cutoffs -------------------------------------------------------------------

def check_band(cfg):
    rng = np.random.default_rng(cfg.seed)
    k1 = rng.uniform(-2 * math.pi, 2 * math.pi, 10000)
    k2 = rng.uniform(-2 * math.pi, 2 * math.pi, 10000)
    e_c = lattice.band_e(k1, k2, 1.0)
    e_o = lattice.band_e_oblique(*lattice.cart_to_oblique(k1, k2))
    e_q = lattice.band_e_oblique(*lattice.quasi_momentum(*lattice.cart_to_oblique(k1, k2)),
                                 quasi=True)
    e_w = np.abs(lattice.omega(k1, k2)) ** 2 - 1.0
    err = float(max(np.max(np.abs(e_c - e_o)), np.max(np.abs(e_c - e_q)),
                    np.max(np.abs(e_c - e_w))))
    pts = np.array([s.sample(101) for t in lattice.fermi_triangles() for s in t.edges])
    ef = float(np.max(np.abs(lattice.band_e_oblique(pts[:, 0], pts[:, 1]))))
    return [Row("band-forms", "max deviation on 10^4 points", err, "< 1e-12", None, err < 1e-12),
            Row("fermi-triangle", "max |e| on triangle edges", ef, "< 1e-12", None, ef < 1e-12)]


def check_partitions(cfg):
    g = cfg.gamma
    jm = cutoffs.j_max(cfg.temperature, g) + 2
    t = np.geomspace(2 * g ** (-2 * jm), 10.0, 20001)
    s = sum(cutoffs.chi_j(t, j, g, cfg.gevrey_h) for j in range(jm + 1))
    err_j = float(np.max(np.abs(s - 1)))
    err_s = 0.0
    tt = np.concatenate([np.linspace(0, 2, 20001), np.geomspace(1e-30, 2, 20001)])
    for j in range(0, 13):
        vs = sum(cutoffs.v_s(tt, s_, j, g, cfg.gevrey_h) for s_ in range(j + 1))
        err_s = max(err_s, float(np.max(np.abs(vs - 1))))
    jm_a = cutoffs.j_max(1 / (math.sqrt(2) * math.pi * 100), 10.0)
    jm_b = cutoffs.j_max(1 / (math.sqrt(2) * math.pi), 10.0)
    return [Row("scale-partition", "max |sum chi_j - 1|", err_j, "< 1e-10", None, err_j < 1e-10),
            Row("sector-partition", "max |sum v_s - 1|, j <= 12", err_s, "< 1e-12", None,
                err_s < 1e-12),
            Row("jmax-formula", "j_max at T = 1/(sqrt2 pi 100) and 1/(sqrt2 pi)",
                float(10 * jm_a + jm_b), "= 31", None, (jm_a, jm_b) == (3, 1))]


def check_gevrey(cfg):
    rep = cutoffs.gevrey_check(6, cfg.gevrey_h)
    return [Row("gevrey-growth", "fitted factorial exponent, n <= 6", rep["exponent"],
                "|e - h| <= 0.75", rep["A"], rep["pass"])]


def check_windows(cfg):
    rows = propagator.support_inclusion_check(range(1, 7), cfg.draws, cfg.gamma, cfg.gevrey_h,
                                              cfg.seed)
    k0 = sum(r["k0_cone"] for r in rows)
    st = sum(r["sqrt_t"] for r in rows)
    cq = sum(r["corner_q"] for r in rows)
    return [Row("frequency-window", "violations on the stated support, j <= 6", k0, "= 0",
                None, k0 == 0),
            Row("sector-window", "sqrt(t) window violations, j <= 6", st, "= 0", None, st == 0),
            Row("corner-window", "corner |q| window violations, j <= 6", cq, "= 0", None,
                cq == 0)]


# --- propagator ----------------------------------------------------------------

def check_a_bounds(cfg):
    jm = cutoffs.j_max(cfg.temperature, cfg.gamma)
    rows = propagator.verify_a_bounds(range(1, jm + 1), cfg.temperature, 2000, cfg.gamma,
                                      cfg.seed)
    full = [r for r in rows if not r["empty"]]
    lo = min(min(r["diag_min"], r["off_min"]) for r in full)
    hi = max(max(r["diag_max"], r["off_max"]) for r in full)
    return [Row("a-matrix-bounds", "min entry over j <= j_max", lo, ">= 0.9", hi,
                all(r["pass"] for r in rows))]


def check_reassembly(cfg):
    rng = np.random.default_rng(cfg.seed)
    j = 2
    k0 = rng.choice(propagator.matsubara_modes(1, cfg.temperature, cfg.gamma), 200)
    qp, qm = rng.uniform(-0.2, 0.2, (2, 200))
    k1, k2 = lattice.oblique_to_cart(qp + 1.0, qm)
    worst = 0.0
    for jj in (1, j):
        tot = sum(propagator.c_sectorized(s, k0, k1, k2, cfg.gamma, cfg.gevrey_h)
                  for s in propagator.sectors_at(jj))
        e = lattice.band_e(k1, k2)
        ref = propagator.c_full(k0, k1, k2).full * cutoffs.slice_cutoff(
            4 * k0 ** 2 + e ** 2, jj, cfg.gamma, cfg.gevrey_h)[:, None, None]
        worst = max(worst, float(np.max(np.abs(tot - ref))))
    return [Row("sector-reassembly", "max |sum_sigma C_sigma - C_j|", worst, "< 1e-12", None,
                worst < 1e-12)]


def check_slice_sup(cfg):
    g = cfg.gamma
    scaled = []
    for j in range(1, cfg.band_j + 1):
        best = 0.0
        for sec in sectors.enumerate_sectors(j).sectors:
            grid = propagator.sector_grid(sec, None, cfg.quad_m, g, cfg.gevrey_h)
            best = max(best, float(np.max(np.abs(grid.values))) if grid.values.size else 0.0)
        scaled.append(best * g ** (-j))
    band = band_ratio(scaled)
    T = cfg.temperature
    jtop = max(j for j in range(1, cutoffs.j_max(T, g) + 1)
               if propagator.matsubara_modes(j, T, g).size)
    top = 0.0
    for sec in propagator.sectors_at(jtop):
        grid = propagator.sector_grid(sec, T, cfg.quad_m, g, cfg.gevrey_h)
        if grid.values.size:
            top = max(top, float(np.max(np.abs(grid.values))))
    k0min = float(np.min(np.abs(propagator.matsubara_modes(jtop, T, g))))
    ratio = top * 2 * k0min
    return [Row("slice-sup-band", "max/min of sup gamma^-j, j <= %d" % cfg.band_j, band, "<= 10",
                max(scaled), band <= 10),
            Row("jmax-sup", "sup times 2 k0_min on the top nonempty slice", ratio,
                "in [0.5, 2]", top, 0.5 <= ratio <= 2)]


def check_sector_bands(cfg):
    rows, bands = propagator.prefactor_bands(range(1, cfg.band_j + 1), None, cfg.quad_m,
                                             cfg.gamma, l1_points=49)
    alphas = [r["alpha"] for r in rows]
    amin, amax = min(alphas), max(alphas)
    ok_a = abs(amin - 1 / cfg.gevrey_h) <= 0.2 and abs(amax - 1 / cfg.gevrey_h) <= 0.2
    return [Row("sector-sup-band", "max/min over (j, class)", bands["sup_scaled"], "<= 10",
                None, bands["sup_scaled"] <= 10),
            Row("l1-band", "max/min over (j, class)", bands["l1_scaled"], "<= 10", None,
                bands["l1_scaled"] <= 10),
            Row("origin-prefactor-band", "max/min over (j, class)", bands["c0_scaled"], "<= 10",
                None, bands["c0_scaled"] <= 10),
            Row("gevrey-decay", "fitted alpha range (min)", amin, "1/h +- 0.2", amax, ok_a)]


# --- counting ------------------------------------------------------------------

def check_emptiness(cfg):
    out = []
    for j in (4, 6, 8):
        rep = sectors.empty_sector_audit(j, cfg.gamma, cfg.gevrey_h)
        ex = max(r[3] for r in rep.rows if r[0] == "excluded")
        cmin = min(r[3] for r in rep.rows if r[0] == "cosine")
        ok_ex = all(r[4] for r in rep.rows if r[0] == "excluded")
        ok_c = all(r[4] for r in rep.rows if r[0] in ("cosine", "corner"))
        out.append(Row("sector-emptiness", "grid sup of excluded sectors, j = %d" % j, ex,
                       "< 1e-10", None, ok_ex))
        out.append(Row("third-factor-bound", "min |cos| on deep sectors, j = %d" % j, cmin,
                       ">= K'", sectors.k_prime(cfg.gamma), ok_c))
    return out


def check_counting(cfg):
    rs = list(range(2, cfg.counting_r + 1))
    out = []
    vals, ex = sectors.counting_sweep("vertex", None, rs, cfg.gamma)
    ratios = [v / r for v, r in zip(vals, rs)]
    out.append(Row("vertex-counting", "fitted exponent", ex, "<= 1.3", max(ratios), ex <= 1.3))
    for d in (1, 2, 3, 4):
        _, ex = sectors.counting_sweep("quadruped", d, rs, cfg.gamma)
        out.append(Row("quadruped-counting", "fitted exponent, d_Q = %d" % d, ex,
                       "<= %g" % (d - 1 + 0.3), None, ex <= d - 1 + 0.3))
    for n in (0, 1, 2, 3):
        _, ex = sectors.counting_sweep("biped", n, rs, cfg.gamma)
        out.append(Row("biped-counting", "fitted exponent, n = %d" % n, ex,
                       "<= %g" % (2 * n + 1 + 0.3), None, ex <= 2 * n + 1 + 0.3))
    worst, ok = sectors.momentum_sum_check(2000, 6, cfg.gamma, cfg.seed)
    out.append(Row("momentum-conservation", "max |sum q|", worst, "< 2", None, ok))
    return out


# --- forest --------------------------------------------------------------------

def check_forest(cfg):
    counts = [len(forest.enumerate_forests(n)) for n in range(1, 8)]
    ok_c = counts == [forest.forest_count(n) for n in range(1, 8)]
    cay = [len(forest.spanning_trees(n)) for n in range(2, 8)]
    ok_t = cay == [n ** (n - 2) for n in range(2, 8)]
    worst = math.inf
    for n in range(2, 6):
        worst = min(worst, forest.psd_sweep(n, 250, 3, cfg.seed)[1])
    bad = 0
    total = 0
    for n in range(1, cfg.forest_n + 1):
        for jg in forest.enumerate_jungles(n, 3, connected=True):
            total += 1
            bad += not forest.verify_induction(forest.build_gn_tree(jg))["pass"]
    rng = random.Random(cfg.seed)
    for _ in range(100):
        total += 1
        jg = forest.random_jungle(cfg.forest_n + 1, 3, rng)
        bad += not forest.verify_induction(forest.build_gn_tree(jg))["pass"]
    pc = [forest.power_count(e)[0] for e in (2, 4, 6)]
    return [Row("forest-count", "counts n <= 7 vs recurrence", float(sum(counts)), "equal",
                None, ok_c),
            Row("cayley", "spanning trees n <= 7", float(sum(cay)), "n^(n-2)", None, ok_t),
            Row("interpolation-psd", "min eigenvalue", worst, ">= -1e-10", None, worst >= -1e-10),
            Row("gn-induction", "failing jungles, all n <= %d plus 100 random n = %d" % (cfg.forest_n, cfg.forest_n + 1), float(bad),
                "= 0", float(total), bad == 0),
            Row("power-counting", "degrees for e = 2, 4, 6", float(pc[0] - pc[2]),
                "(1, 0, -1)", None, pc == [1, 0, -1])]


# --- arch ----------------------------------------------------------------------

def check_arch(cfg):
    bad1 = bad2 = n1 = n2 = 0
    for n in range(0, cfg.arch_n + 1):
        for tree in multiarch.marked_trees(n):
            if len(tree.path()) < 2:
                continue
            for sys_ in multiarch.enumerate_arch_systems(tree, minimal=True):
                g = multiarch.first_level_graph(tree, sys_)
                n1 += 1
                bad1 += not multiarch.is_1pi(g, tree.y, tree.z)
                if n <= cfg.arch_n - 1:
                    for add in multiarch.second_level_systems(
                            g, tree.y, tree.z, multiarch.free_after(tree, sys_), max_systems=1):
                        g2 = multiarch.second_level_graph(g, add)
                        n2 += 1
                        bad2 += not (multiarch.is_2pi(g2, tree.y, tree.z)
                                     and multiarch.is_one_vertex_irreducible(g2, tree.y, tree.z))
    rng = random.Random(cfg.seed)
    mism = 0
    for _ in range(50):
        edges, y, z, labels = multiarch.random_2pi_graph(rng, n_max=cfg.arch_n)
        a = multiarch.find_ring(edges, y, z, labels)
        b = multiarch.find_ring_bruteforce(edges, y, z, labels)
        mism += a != b
    vals = [float(multiarch.flyover_total(multiarch.chain_tree(n))[0]) for n in range(3, 7)]
    c, K, r2 = multiarch.loglinear_fit(range(3, 7), vals)
    return [Row("one-level-1pi", "non-1PI minimal systems", float(bad1), "= 0", float(n1),
                bad1 == 0),
            Row("two-level-2pi", "reducible two-level systems", float(bad2), "= 0", float(n2),
                bad2 == 0),
            Row("ring-extraction", "mismatches on 50 random graphs", float(mism), "= 0", None,
                mism == 0),
            Row("flyover-growth", "log-linear R^2, n in [3, 6]", r2, ">= 0.95", K, r2 >= 0.95)]


# --- renorm --------------------------------------------------------------------

def check_tadpoles(cfg):
    out = []
    totals = []
    for T in (1e-2, 1e-3):
        rows, band = renorm.tadpole_band(T, cfg.gamma, cfg.quad_m)
        out.append(Row("tadpole-band", "max/min of |T^j|/(j gamma^-j), T = %g" % T, band,
                       "<= 10", None, band <= 10))
        flow = renorm.delta_mu_flow(T, cfg.lam, cfg.gamma, cfg.quad_m)
        totals.append(abs(flow.total_tadpole) / abs(cfg.lam))
        j_top = max(j for j, t in flow.tadpole.items() if t != 0.0)
        m2 = 3 * cfg.quad_m // 2
        a = renorm.tadpole_scale(j_top, T, cfg.gamma, cfg.quad_m).abs_sum
        b = renorm.tadpole_scale(j_top, T, cfg.gamma, m2).abs_sum
        conv = abs(a - b) / abs(b)
        out.append(Row("tadpole-convergence",
                       "relative change m = %d -> %d at j = %d, T = %g" % (cfg.quad_m, m2, j_top, T),
                       conv, "<= 0.01", b, conv <= 0.01))
        res = max(abs(v) for v in flow.condition_residuals().values())
        out.append(Row("counterterm-condition", "max |T^j + dmu^j|, T = %g" % T, res, "= 0",
                       None, res == 0.0))
    r = band_ratio(totals)
    out.append(Row("tadpole-total", "max/min of |T|/|lambda| over T", r, "<= 3", max(totals),
                   r <= 3))
    return out


def check_localization(cfg):
    T = 0.05
    ker = renorm.SunshineKernel(T, cfg.sunshine_n)
    pts = [(2 * math.pi * T, 1.0, -0.4), (3 * math.pi * T, 1.2, -0.3),
           (math.pi * T, 1.05, -0.7), (5 * math.pi * T, 0.9, -0.1)]
    sp = renorm.localize(ker, pts, T)
    err = sp.max_split_error()
    tau = renorm.tau_operator(ker, T)
    tt = renorm.tau_operator(tau, T)
    idem = max(abs(tau(*p) - tt(*p)) for p in pts)
    rows, quot = renorm.remainder_trend(ker, gamma=cfg.gamma)
    mono = all(rows[i + 1][1] < rows[i][1] for i in range(len(rows) - 1))
    conj = abs(ker(-math.pi * T, 1.0, 0.2) - np.conj(ker(math.pi * T, 1.0, 0.2)))
    return [Row("localization-split", "max |tau S + R S - S|", err, "<= 1e-12", None,
                err <= 1e-12),
            Row("tau-idempotent", "max |tau tau S - tau S|", idem, "<= 1e-12", None,
                idem <= 1e-12),
            Row("remainder-trend", "largest successive ratio over gaps 1, 2, 3", max(quot),
                "monotone decrease", rows[0][1], mono),
            Row("sunshine-conjugation", "|S(-q0) - conj S(q0)|", float(conj), "<= 1e-10", None,
                conj <= 1e-10)]


def check_sunshine(cfg):
    vh = renorm.second_derivative_sweep("vanhove", cfg.temperatures, 1.0, cfg.sunshine_n,
                                        gamma=cfg.gamma)
    fp = renorm.second_derivative_sweep("fermipoint", cfg.temperatures, 1.0, cfg.sunshine_n,
                                        gamma=cfg.gamma)
    s = vh.slopes
    below = all(a["d2"] < b["d2"] for a, b in zip(fp.rows, vh.rows))
    slower = fp.slopes["d2"] < s["d2"]
    return [Row("sunshine-value-slope", "slope of |S| vs 1/T", s["abs_sigma"], "-1 +- 0.3", None,
                abs(s["abs_sigma"] + 1) <= 0.3),
            Row("sunshine-first-slope", "slope of |dS| vs 1/T", s["d1"], "0 +- 0.3", None,
                abs(s["d1"]) <= 0.3),
            Row("sunshine-second-slope", "slope of |d2 S| vs 1/T", s["d2"], "1 +- 0.3", None,
                abs(s["d2"] - 1) <= 0.3),
            Row("sunshine-fermi-slower", "Fermi-point d2 slope", fp.slopes["d2"],
                "below van Hove at every T", s["d2"], below and slower)]


def check_interacting(cfg):
    rep = renorm.interacting_propagator_check((1e-3, 1e-2), 1e-2, min(cfg.sunshine_n, 64))
    return [Row("interacting-propagator", "K ratio over lambda in {1e-3, 1e-2}", rep.K_ratio,
                "<= 3", rep.rows[0]["K"], rep.passed)]


CHECKS = {
    "cutoffs": (check_band, check_partitions, check_gevrey, check_windows),
    "propagator": (check_a_bounds, check_reassembly, check_slice_sup, check_sector_bands),
    "counting": (check_emptiness, check_counting),
    "forest": (check_forest,),
    "arch": (check_arch,),
    "renorm": (check_tadpoles, check_localization, check_sunshine, check_interacting),
}


def registry_coverage():
    """Tags registered for each suite and any tag missing from its suite."""
    return {s: sorted(t for t, (suite, _) in REGISTRY.items() if suite == s) for s in SUITES}
