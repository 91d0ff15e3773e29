"""Command-line harness: configuration, check suites, expansions and reports.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 numeric refusal (size limits, insufficient resolution, coupling
outside the convergence domain).

Configuration is an INI-style key-value file with a ``[run]`` section.
Environment variables ``HONEYCOMB_RG_<KEY>`` (upper case) override file
values; command-line flags override both.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

ENV_PREFIX = "HONEYCOMB_RG_"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 10.0
    gevrey_h: float = 2.0
    temperature: float = 1e-3
    temperatures: tuple = (0.1, 0.05, 0.025, 0.0125)
    lam: float = 1e-3
    quad_m: int = 16
    sunshine_n: int = 256
    band_j: int = 5
    counting_r: int = 18
    forest_n: int = 5
    arch_n: int = 6
    draws: int = 100000
    seed: int = 0
    workers: int = 1
    output_dir: str = "out"

    def __post_init__(self):
        if self.gamma < 10:
            raise ConfigError("gamma must be >= 10")
        if self.gevrey_h <= 1:
            raise ConfigError("gevrey_h must exceed 1")
        for T in (self.temperature,) + tuple(self.temperatures):
            if not 0 < T < 1:
                raise ConfigError("temperatures must lie in (0, 1)")
        if self.sunshine_n < 4 or self.sunshine_n & (self.sunshine_n - 1):
            raise ConfigError("sunshine_n must be a power of two >= 4")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name in ("quad_m", "band_j", "counting_r", "forest_n", "arch_n", "draws"):
            if getattr(self, name) < 1:
                raise ConfigError("%s must be positive" % name)

    def hash(self):
        """Digest of every input that can change results (not workers or paths)."""
        d = asdict(self)
        d.pop("workers")
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _coerce(name, raw):
    kind = {f.name: f.default for f in fields(RunConfig)}[name]
    try:
        if isinstance(kind, tuple):
            return tuple(float(x) for x in str(raw).replace(",", " ").split())
        if isinstance(kind, bool):
            return str(raw).lower() in ("1", "true", "yes")
        if isinstance(kind, int):
            return int(raw)
        if isinstance(kind, float):
            return float(raw)
        return str(raw)
    except ValueError as exc:
        raise ConfigError("bad value for %s: %r" % (name, raw)) from exc


def load_config(path=None, env=None, overrides=None):
    """RunConfig from file, then environment, then explicit overrides."""
    env = os.environ if env is None else env
    names = [f.name for f in fields(RunConfig)]
    vals = {}
    if path is not None:
        cp = configparser.ConfigParser()
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
        if cp.has_section("run"):
            for k, v in cp.items("run"):
                if k not in names:
                    raise ConfigError("unknown config key %r" % k)
                vals[k] = _coerce(k, v)
    for k in names:
        key = ENV_PREFIX + k.upper()
        if key in env:
            vals[k] = _coerce(k, env[key])
    for k, v in (overrides or {}).items():
        if v is not None:
            vals[k] = _coerce(k, v) if isinstance(v, str) else v
    return RunConfig(**vals)


# --- formatting ----------------------------------------------------------------

def fmt(x):
    """Deterministic text for a table cell; floats with 17 significant digits."""
    if x is None:
        return ""
    if hasattr(x, "item") and not hasattr(x, "__len__"):
        x = x.item()
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    if isinstance(x, (list, tuple)):
        return " ".join(fmt(v) for v in x)
    return str(x)


def write_csv(header, rows, out=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return text


def _jsonable(x):
    if hasattr(x, "item") and not hasattr(x, "__len__"):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return fmt(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    return x


def dump_json(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1) + "\n"


# --- suites --------------------------------------------------------------------

def _run_check(args):
    func_name, cfg = args
    from . import suites
    return [r.as_dict() for r in getattr(suites, func_name)(cfg)]


def run_suite(cfg: RunConfig, suite: str):
    """Rows of one suite as dicts, in a fixed order whatever the worker count."""
    from . import suites
    if suite not in suites.CHECKS:
        raise ConfigError("unknown suite %r" % suite)
    jobs = [(f.__name__, cfg) for f in suites.CHECKS[suite]]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(_run_check, jobs))
    else:
        parts = [_run_check(j) for j in jobs]
    rows = [dict(r, suite=suite) for part in parts for r in part]
    return {"suite": suite, "config_hash": cfg.hash(), "config": _config_public(cfg),
            "pass": all(r["passed"] for r in rows), "rows": rows}


def _config_public(cfg):
    d = asdict(cfg)
    d.pop("workers")
    d.pop("output_dir")
    return d


ROW_HEADER = ["suite", "tag", "check", "measured", "bound", "constant", "pass"]


def report_rows(rep):
    return [[r["suite"], r["tag"], r["check"], r["measured"], r["bound"], r["constant"],
             r["passed"]] for r in rep["rows"]]


def merge_reports(reports):
    """One summary with a per-tag status table; refuses mixed configurations."""
    if not reports:
        raise ConfigError("nothing to merge")
    hashes = sorted({r["config_hash"] for r in reports})
    if len(hashes) > 1:
        raise ConfigError("conflicting config hashes: %s" % ", ".join(hashes))
    rows = [row for r in reports for row in r["rows"]]
    tags = {}
    for row in rows:
        t = tags.setdefault(row["tag"], {"pass": True, "rows": 0, "suite": row["suite"]})
        t["pass"] = t["pass"] and row["passed"]
        t["rows"] += 1
    return {"config_hash": hashes[0], "config": reports[0]["config"],
            "suites": [r["suite"] for r in reports], "pass": all(r["pass"] for r in reports),
            "tags": tags, "rows": rows}


def cmd_check_bounds(cfg, suite):
    from . import suites
    names = list(suites.SUITES) if suite == "all" else [suite]
    if "renorm" in names:
        from .renorm import check_domain
        for T in (1e-2, 1e-3, cfg.temperature):
            check_domain(cfg.lam, T)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for name in names:
        rep = run_suite(cfg, name)
        reports.append(rep)
        write_csv(ROW_HEADER, report_rows(rep), out / ("%s.csv" % name))
        (out / ("%s.json" % name)).write_text(dump_json(rep))
        for r in rep["rows"]:
            sys.stderr.write("%s %-24s %s\n" % ("PASS" if r["passed"] else "FAIL", r["tag"],
                                                fmt(r["measured"])))
    if suite == "all":
        (out / "summary.json").write_text(dump_json(merge_reports(reports)))
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_FAIL


def cmd_check_cutoffs(cfg):
    from . import suites
    rows = []
    for f in suites.CHECKS["cutoffs"][1:3]:
        rows.extend(f(cfg))
    errs = [r.measured for r in rows if r.tag in ("scale-partition", "sector-partition")]
    rep = {"test": "cutoffs", "max_error": max(errs), "pass": all(r.passed for r in rows),
           "rows": [r.as_dict() for r in rows]}
    sys.stdout.write(dump_json(rep))
    return EXIT_OK if rep["pass"] else EXIT_FAIL


# --- other commands ------------------------------------------------------------

def cmd_dump_surface(n, out):
    from .lattice import band_e_oblique, fermi_triangles, oblique_to_cart
    rows = []
    for ti, tri in enumerate(fermi_triangles()):
        for ei, seg in enumerate(tri.edges):
            for kp, km in zip(*seg.sample(n)):
                k1, k2 = oblique_to_cart(kp, km)
                rows.append([ti, ei, float(kp), float(km), float(k1), float(k2),
                             float(band_e_oblique(kp, km))])
    write_csv(["triangle", "edge", "k_plus", "k_minus", "k1", "k2", "e"], rows, out)
    return EXIT_OK


def cmd_sectors(j, out):
    from .sectors import enumerate_sectors
    cat = enumerate_sectors(j)
    rows = [[s.j, s.s_a, s.s_b, tag, s.l, s.r_exact] for s, tag in zip(cat.sectors, cat.tags)]
    if not rows:
        sys.stderr.write("no admissible sectors at j=%d\n" % j)
    write_csv(["j", "s_a", "s_b", "class", "l", "r_exact"], rows, out)
    return EXIT_OK


def cmd_expand_jungles(n, m, connected, out):
    from .forest import build_gn_tree, enumerate_jungles, verify_induction
    rows = []
    for jg in enumerate_jungles(n, m, connected):
        d = jg.to_json()
        ok = verify_induction(build_gn_tree(jg))["pass"] if jg.connected else None
        rows.append([json.dumps(d["edges"]), " ".join(map(str, d["layers"])), ok])
    write_csv(["edges", "layers", "induction_pass"], rows, out)
    return EXIT_OK if all(r[2] is not False for r in rows) else EXIT_FAIL


def load_tree(path):
    from .multiarch import DecoratedTree
    try:
        d = json.loads(Path(path).read_text())
        return DecoratedTree(int(d["n_vertices"]), [tuple(e) for e in d["edges"]],
                             int(d["y"]), int(d["z"]))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("bad tree file %s: %s" % (path, exc)) from exc


def cmd_expand_arches(tree_path, all_systems, out):
    from .multiarch import enumerate_arch_systems, first_level_graph, is_1pi
    tree = load_tree(tree_path)
    rows = []
    for i, s in enumerate(enumerate_arch_systems(tree, minimal=not all_systems)):
        q, w = s.flyover()
        rows.append([i, s.starts, s.arrivals, q, w, s.multiplicity, s.minimal,
                     is_1pi(first_level_graph(tree, s), tree.y, tree.z)])
    write_csv(["index", "starts", "arrivals", "q", "weight", "multiplicity", "minimal", "is_1pi"],
              rows, out)
    return EXIT_OK


def cmd_tadpole_sweep(cfg, T, m, out):
    from .renorm import tadpole_band
    rows, band = tadpole_band(T, cfg.gamma, m)
    write_csv(["j", "value", "j_rate", "ratio"], [[j, v, rate, ratio] for j, v, rate, ratio, _ in
                                                  rows], out)
    return EXIT_OK if band <= 10 else EXIT_FAIL


def cmd_selfenergy(cfg, point, T_list, N, out):
    from .renorm import second_derivative_sweep
    rep = second_derivative_sweep(point, T_list, 1.0, N, gamma=cfg.gamma)
    slope = rep.slopes["d2"]
    rows = [[r["T"], r["abs_sigma"], r["d1"], r["d2_k0"], r["d2_spatial"], slope]
            for r in rep.rows]
    write_csv(["T", "abs_sigma", "d1", "d2_k0", "d2_spatial", "slope_fit"], rows, out)
    return EXIT_OK


def cmd_report_merge(paths, out):
    reps = []
    for p in paths:
        try:
            reps.append(json.loads(Path(p).read_text()))
        except (OSError, ValueError) as exc:
            raise ConfigError("cannot read report %s: %s" % (p, exc)) from exc
    text = dump_json(merge_reports(reps))
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- entry point ---------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="honeycomb-rg", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="INI file with a [run] section")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("dump-surface", help="sample the Fermi triangle edges")
    s.add_argument("--n", type=int, default=11)
    s.add_argument("--out")

    s = sub.add_parser("sectors", help="sector catalog at one scale")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--out")

    s = sub.add_parser("check", help="run bound checks")
    csub = s.add_subparsers(dest="what", required=True)
    b = csub.add_parser("bounds")
    b.add_argument("--suite", required=True,
                   choices=["cutoffs", "propagator", "counting", "forest", "arch", "renorm",
                            "all"])
    b.add_argument("--out-dir")
    b.add_argument("--workers", type=int)
    b.add_argument("--seed", type=int)
    csub.add_parser("cutoffs")

    s = sub.add_parser("expand", help="enumerate jungles or arch systems")
    esub = s.add_subparsers(dest="what", required=True)
    j = esub.add_parser("jungles")
    j.add_argument("--n", type=int, required=True)
    j.add_argument("--m", type=int, default=3)
    j.add_argument("--connected", action="store_true")
    j.add_argument("--out")
    a = esub.add_parser("arches")
    a.add_argument("--tree", required=True, help="JSON with n_vertices, edges, y, z")
    a.add_argument("--all", action="store_true", help="include non-minimal systems")
    a.add_argument("--out")

    s = sub.add_parser("tadpole", help="tadpole amplitudes")
    tsub = s.add_subparsers(dest="what", required=True)
    t = tsub.add_parser("sweep")
    t.add_argument("--gamma", type=float)
    t.add_argument("--T", type=float, required=True)
    t.add_argument("--m", type=int, default=12)
    t.add_argument("--out")

    s = sub.add_parser("selfenergy", help="second-order self-energy")
    ssub = s.add_subparsers(dest="what", required=True)
    t = ssub.add_parser("sunshine")
    t.add_argument("--point", choices=["vanhove", "fermipoint"], default="vanhove")
    t.add_argument("--T-list", dest="T_list", type=float, nargs="+",
                   default=[0.1, 0.05, 0.025, 0.0125])
    t.add_argument("--N", type=int, default=128)
    t.add_argument("--out")

    s = sub.add_parser("report", help="merge suite reports")
    rsub = s.add_subparsers(dest="what", required=True)
    t = rsub.add_parser("merge")
    t.add_argument("reports", nargs="+")
    t.add_argument("--out")
    return p


def main(argv=None):
    from .forest import SizeRefusal, StructuralError
    from .quadrature import ResolutionError
    from .renorm import DomainError
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        over = {}
        if args.cmd == "check" and args.what == "bounds":
            over = {"output_dir": args.out_dir, "workers": args.workers, "seed": args.seed}
        if args.cmd == "tadpole":
            over = {"gamma": args.gamma}
        cfg = load_config(args.config, overrides=over)
        if args.cmd == "dump-surface":
            return cmd_dump_surface(args.n, args.out)
        if args.cmd == "sectors":
            if args.j < 0:
                raise ConfigError("j must be nonnegative")
            return cmd_sectors(args.j, args.out)
        if args.cmd == "check":
            if args.what == "bounds":
                return cmd_check_bounds(cfg, args.suite)
            return cmd_check_cutoffs(cfg)
        if args.cmd == "expand":
            if args.what == "jungles":
                return cmd_expand_jungles(args.n, args.m, args.connected, args.out)
            return cmd_expand_arches(args.tree, args.all, args.out)
        if args.cmd == "tadpole":
            return cmd_tadpole_sweep(cfg, args.T, args.m, args.out)
        if args.cmd == "selfenergy":
            return cmd_selfenergy(cfg, args.point, args.T_list, args.N, args.out)
        if args.cmd == "report":
            return cmd_report_merge(args.reports, args.out)
    except (ConfigError, StructuralError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE
    except (SizeRefusal, ResolutionError, DomainError) as exc:
        sys.stderr.write("refused: %s\n" % exc)
        return EXIT_REFUSAL
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
