"""Command-line front door.

Subcommands wire kick sources into scans, growth maps, the two explicit
constructions, membership verification, the triangular window detector,
the Schrodinger recurrence, and the Iwasawa factorization.  Every file
output is deterministic for a fixed config; scans and maps fan out over a
process pool and merge by cell index.

Kick source specs::

    identity                 no kick (pure shear powers)
    constant-m:<c>           lower shear M(c) every step
    constant-h:<s>           upper shear H(s) every step
    constant:<a,b,c,d>       an arbitrary fixed unimodular kick
    random[:seed=S,C=B]      seeded random bounded kicks
    dyadic:<c0,c1,...>       ruler-indexed kicks M(c_level)
    dyadic:file=<build.json> kicks persisted by construct-eus
    seq:<t1,t2,...>          rotation schedule embedding the targets
    tri:lam=<l1,..>;s=<s1,..> upper-triangular kicks, cycled
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import report
from .analysis import (
    ScanResult,
    TriKicks,
    classify_points,
    growth_map,
    growth_map_from_field,
    refine_result,
    rost_window,
    scan_grid,
    schrodinger,
)
from .analysis import scan as run_scan
from .construct_eus import EusBuild, build_eus, verify_membership
from .construct_seq import build as build_seq_construction
from .construct_seq import verify_bounded
from .dyadic import DyadicKicks
from .evolution import (
    KickError,
    KickSource,
    constant_kicks,
    identity_kicks,
    random_bounded_kicks,
)
from .mat2 import Mat2, UnimodularError, iwasawa

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

OUTDIR_ENV = "KICKLAB_OUTDIR"


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# kick source specs

def _parse_floats(text: str):
    vals = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    if not vals:
        raise ValueError("empty number list")
    return vals


def build_kicks(spec: str, seed: int = 7, bound: float = 2.0) -> KickSource:
    """Construct the kick source named by ``spec`` (see module docstring)."""
    name, _, arg = spec.partition(":")
    if name == "identity":
        return identity_kicks()
    if name == "constant-m":
        return constant_kicks(Mat2.lower(float(arg)))
    if name == "constant-h":
        return constant_kicks(Mat2.shear(float(arg)))
    if name == "constant":
        a, b, c, d = _parse_floats(arg)
        m = Mat2(a, b, c, d)
        if abs(m.det() - 1.0) > 1e-9:
            raise UnimodularError(f"constant kick det {m.det()!r} != 1")
        return constant_kicks(m)
    if name == "random":
        if arg:
            for part in arg.split(","):
                key, _, val = part.partition("=")
                if key == "seed":
                    seed = int(val)
                elif key in ("C", "bound"):
                    bound = float(val)
                else:
                    raise ValueError(f"unknown random parameter {key!r}")
        return random_bounded_kicks(seed, bound)
    if name == "dyadic":
        if arg.startswith("file="):
            return EusBuild.load(arg[len("file="):]).kick_source()
        return DyadicKicks(_parse_floats(arg)).source()
    if name == "seq":
        return build_seq_construction(_parse_floats(arg)).source()
    if name == "tri":
        lams = ss = None
        for part in arg.split(";"):
            key, _, val = part.partition("=")
            if key == "lam":
                lams = _parse_floats(val)
            elif key == "s":
                ss = _parse_floats(val)
            else:
                raise ValueError(f"unknown triangular parameter {key!r}")
        if lams is None or ss is None:
            raise ValueError("tri spec needs lam=<list>;s=<list>")
        return TriKicks(lams, ss).source()
    raise ValueError(f"unknown kick spec {spec!r}")


# ---------------------------------------------------------------------------
# config plumbing

DEFAULTS = {
    "scan": {"kicks": None, "t_max": 10.0, "t_min": 0.0, "cells": 1000,
             "horizon": 1 << 16, "threshold": 1e6, "slope_tol": 1e-4,
             "seed": 7, "bound": 2.0, "refine": False, "workers": 0,
             "prefix": "scan", "plot": True},
    "growth-map": {"kicks": None, "re_min": 0.0, "re_max": 8.0,
                   "im_min": 0.0, "im_max": 2.0, "re_points": 64,
                   "im_points": 64, "horizon": 2000, "seed": 7,
                   "bound": 2.0, "workers": 0, "prefix": "growth-map",
                   "plot": True},
    "construct-seq": {"targets": None, "horizon": 1 << 15, "slack": 1e-6,
                      "prefix": "construct-seq", "plot": True},
    "construct-eus": {"depth": 6, "c0": "-1", "e0": None, "tail_levels": 14,
                      "margin_frac": 0.05, "samples": 64,
                      "prefix": "construct-eus", "plot": True},
    "verify": {"build": None, "ts": None, "members": 0, "k_max": 1 << 14,
               "prefix": "verify", "plot": True},
    "rost-window": {"lam": None, "s": None, "t": None, "threshold": 10.0,
                    "n_max": 5000, "probe_starts": 32,
                    "prefix": "rost-window", "plot": True},
    "schrodinger": {"c": None, "t": None, "q0": 1.0, "q1": 1.0,
                    "k_max": 10 ** 4, "prefix": "schrodinger", "plot": True},
    "iwasawa": {"matrix": None},
}


def merge_config(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, with unknown keys rejected."""
    cfg = dict(DEFAULTS[args.subcommand])
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        for key, val in loaded.items():
            if key not in cfg:
                raise ValueError(f"unknown config key {key!r}")
            cfg[key] = val
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None and val != []:
            cfg[key] = val
    cfg["outdir"] = (getattr(args, "outdir", None)
                     or os.environ.get(OUTDIR_ENV) or ".")
    return cfg


def _paths(cfg: dict, *exts: str):
    os.makedirs(cfg["outdir"], exist_ok=True)
    return tuple(os.path.join(cfg["outdir"], f"{cfg['prefix']}.{e}")
                 for e in exts)


def _echo(cfg: dict, summary: dict) -> dict:
    # run plumbing (pool size, paths, figure toggle) does not affect results
    shown = {k: v for k, v in cfg.items()
             if k not in ("plot", "workers", "outdir", "prefix")}
    return {"config": shown, "summary": summary}


# ---------------------------------------------------------------------------
# worker pool helpers (top-level functions so payloads pickle)

def _scan_worker(payload: dict):
    kicks = build_kicks(payload["kicks"], payload["seed"], payload["bound"])
    ts = scan_grid(payload["t_min"], payload["t_max"], payload["cells"])
    i0, i1 = payload["i0"], payload["i1"]
    sup, slopes, mkn = classify_points(kicks, ts[i0:i1], payload["horizon"])
    return i0, sup, slopes, mkn


def _map_worker(payload: dict):
    kicks = build_kicks(payload["kicks"], payload["seed"], payload["bound"])
    res = np.linspace(payload["re_min"], payload["re_max"],
                      payload["re_points"])
    ims = np.linspace(payload["im_min"], payload["im_max"],
                      payload["im_points"])
    zs = (res[None, :] + 1j * ims[:, None])[payload["r0"]:payload["r1"]]
    from .analysis import _grid_evolve
    _, final_log, _, _, _ = _grid_evolve(
        kicks, zs.ravel(), payload["horizon"],
        max(1, payload["horizon"] // 8))
    return payload["r0"], final_log.reshape(zs.shape)


def _chunks(total: int, workers: int):
    size = (total + workers - 1) // workers
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _pool_size(cfg: dict, tasks: int) -> int:
    w = cfg.get("workers") or 0
    if w <= 0:
        w = os.cpu_count() or 1
    return max(1, min(w, tasks))


# ---------------------------------------------------------------------------
# subcommands

def cmd_scan(cfg: dict) -> int:
    if not cfg["kicks"]:
        raise ValueError("scan needs --kicks")
    kicks = build_kicks(cfg["kicks"], cfg["seed"], cfg["bound"])
    cells = int(cfg["cells"])
    workers = _pool_size(cfg, max(1, cells // 64))
    if workers == 1:
        result = run_scan(kicks, float(cfg["t_max"]), cells,
                          n_horizon=int(cfg["horizon"]),
                          m_threshold=float(cfg["threshold"]),
                          slope_tol=float(cfg["slope_tol"]),
                          t_min=float(cfg["t_min"]))
    else:
        payload = {"kicks": cfg["kicks"], "seed": cfg["seed"],
                   "bound": cfg["bound"], "t_min": float(cfg["t_min"]),
                   "t_max": float(cfg["t_max"]), "cells": cells,
                   "horizon": int(cfg["horizon"])}
        jobs = [dict(payload, i0=lo, i1=hi)
                for lo, hi in _chunks(cells, workers)]
        sup = np.empty(cells)
        slopes = np.empty(cells)
        mkn = 0.0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i0, s, sl, m in pool.map(_scan_worker, jobs):
                sup[i0:i0 + len(s)] = s
                slopes[i0:i0 + len(sl)] = sl
                mkn = max(mkn, m)
        result = ScanResult(float(cfg["t_min"]), float(cfg["t_max"]), cells,
                            int(cfg["horizon"]), float(cfg["threshold"]),
                            float(cfg["slope_tol"]),
                            scan_grid(float(cfg["t_min"]),
                                      float(cfg["t_max"]), cells),
                            sup, slopes, kicks.label, mkn)
    if cfg["refine"]:
        refine_result(kicks, result)
    if not result.kick_bound_ok():
        raise ArithmeticError("kick norm exceeds the bounded-cell limit "
                              "M^2 ||H(t)||; the evolution is inconsistent")
    csv_path, json_path = _paths(cfg, "csv", "json")
    report.write_scan(result, csv_path)
    report.write_json(json_path, _echo(cfg, result.summary()))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.scan_figure(result, png_path)
    print(f"measure={report.fmt(result.measure())} "
          f"bounded_cells={int(np.count_nonzero(result.bounded))} "
          f"of {cells}")
    return EXIT_OK


def cmd_growth_map(cfg: dict) -> int:
    if not cfg["kicks"]:
        raise ValueError("growth-map needs --kicks")
    kicks = build_kicks(cfg["kicks"], cfg["seed"], cfg["bound"])
    im_points = int(cfg["im_points"])
    re_points = int(cfg["re_points"])
    workers = _pool_size(cfg, max(1, im_points // 8))
    if workers == 1:
        gm = growth_map(kicks, (float(cfg["re_min"]), float(cfg["re_max"])),
                        (float(cfg["im_min"]), float(cfg["im_max"])),
                        re_points, im_points, int(cfg["horizon"]))
    else:
        payload = {"kicks": cfg["kicks"], "seed": cfg["seed"],
                   "bound": cfg["bound"], "re_min": float(cfg["re_min"]),
                   "re_max": float(cfg["re_max"]),
                   "im_min": float(cfg["im_min"]),
                   "im_max": float(cfg["im_max"]), "re_points": re_points,
                   "im_points": im_points, "horizon": int(cfg["horizon"])}
        jobs = [dict(payload, r0=lo, r1=hi)
                for lo, hi in _chunks(im_points, workers)]
        res = np.linspace(float(cfg["re_min"]), float(cfg["re_max"]),
                          re_points)
        ims = np.linspace(float(cfg["im_min"]), float(cfg["im_max"]),
                          im_points)
        zs = res[None, :] + 1j * ims[:, None]
        final = np.empty((im_points, re_points))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r0, block in pool.map(_map_worker, jobs):
                final[r0:r0 + block.shape[0]] = block
        gm = growth_map_from_field(kicks, zs, final / int(cfg["horizon"]),
                                   int(cfg["horizon"]))
    csv_path, json_path = _paths(cfg, "csv", "json")
    report.write_growth_map(gm, csv_path)
    report.write_json(json_path, _echo(cfg, gm.summary()))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.growth_map_figure(gm, png_path)
    margin = "none" if gm.lower_margin is None else report.fmt(gm.lower_margin)
    print(f"violations={gm.violations()} lower_margin={margin}")
    return EXIT_OK


def cmd_construct_seq(cfg: dict) -> int:
    if not cfg["targets"]:
        raise ValueError("construct-seq needs target values")
    targets = [float(t) for t in cfg["targets"]]
    con = build_seq_construction(targets)
    horizon = int(cfg["horizon"])
    traces = [verify_bounded(con, i, horizon, float(cfg["slack"]))
              for i in range(1, con.depth + 1)]
    rows = [(t, a, d, tr.sup_lognorm, True)
            for t, a, d, tr in zip(con.targets, con.alphas, con.defects,
                                   traces)]
    csv_path, json_path = _paths(cfg, "csv", "json")
    report.write_rows(csv_path,
                      ["t", "alpha", "defect", "sup_lognorm", "stabilized"],
                      rows)
    summary = {"targets": list(con.targets), "alphas": list(con.alphas),
               "defects": list(con.defects), "horizon": horizon,
               "max_defect": max(con.defects),
               "sup_lognorms": [tr.sup_lognorm for tr in traces]}
    report.write_json(json_path, _echo(cfg, summary))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.seq_figure(list(zip(con.targets, traces)), png_path)
    print(f"targets={len(targets)} max_defect={report.fmt(max(con.defects))} "
          f"all stabilized at horizon {horizon}")
    return EXIT_OK


def cmd_construct_eus(cfg: dict) -> int:
    e0 = None
    if cfg["e0"]:
        lo, hi = (_parse_floats(cfg["e0"]) if isinstance(cfg["e0"], str)
                  else cfg["e0"])
        e0 = (float(lo), float(hi))
    build = build_eus(depth=int(cfg["depth"]), e0_hint=e0,
                      c0=Fraction(str(cfg["c0"])),
                      tail_levels=int(cfg["tail_levels"]),
                      samples_per_interval=int(cfg["samples"]),
                      margin_frac=float(cfg["margin_frac"]))
    invariants = build.check_invariants()
    build_path = os.path.join(cfg["outdir"], f"{cfg['prefix']}-build.json")
    os.makedirs(cfg["outdir"], exist_ok=True)
    build.save(build_path)
    (json_path,) = _paths(cfg, "json")
    summary = {"build_file": build_path, "invariants": invariants,
               "final_measure": build.final_set().measure(),
               "c": [str(c) for c in build.c], "eps": list(build.eps),
               "windows": [list(i) for i in build.i_intervals]}
    report.write_json(json_path, _echo(cfg, summary))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.eus_figure(build, png_path)
    status = "PASS" if invariants["all"] else "FAIL"
    print(f"depth={build.depth} invariants={status} "
          f"final_measure={report.fmt(build.final_set().measure())}")
    if not invariants["all"]:
        failed = sorted(k for k, v in invariants.items() if not v)
        print(f"failed invariants: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    if not cfg["build"]:
        raise ValueError("verify needs --build <file>")
    build = EusBuild.load(cfg["build"])
    ts = [float(t) for t in cfg["ts"] or []]
    if cfg["members"]:
        ts.extend(build.pick_members(int(cfg["members"])))
    if not ts:
        raise ValueError("verify needs explicit t values or --members N")
    reports = [verify_membership(build, t, int(cfg["k_max"])) for t in ts]
    rows = [(r["t"], r["member_from"], r["sup_lognorm"], r["bound"],
             r["ratio"], r["slope"], r["block_dev"], r["pass"])
            for r in reports]
    csv_path, json_path = _paths(cfg, "csv", "json")
    report.write_rows(csv_path, ["t", "member_from", "sup_lognorm", "bound",
                                 "ratio", "slope", "block_dev", "pass"], rows)
    summary = {"build_file": cfg["build"], "k_max": int(cfg["k_max"]),
               "checked": len(reports),
               "passed": sum(1 for r in reports if r["pass"]),
               "worst_ratio": max(r["ratio"] for r in reports)}
    report.write_json(json_path, _echo(cfg, summary))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.verify_figure(reports, png_path)
    for r in reports:
        print(f"t={report.fmt(r['t'])} member_from={r['member_from']} "
              f"{'PASS' if r['pass'] else 'FAIL'}")
    if summary["passed"] != summary["checked"]:
        print("membership verification failed at "
              f"{summary['checked'] - summary['passed']} point(s)",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_rost_window(cfg: dict) -> int:
    if cfg["lam"] is None or cfg["s"] is None or cfg["t"] is None:
        raise ValueError("rost-window needs --lam, --s, and --t")
    lams = (_parse_floats(cfg["lam"]) if isinstance(cfg["lam"], str)
            else [float(v) for v in cfg["lam"]])
    ss = (_parse_floats(cfg["s"]) if isinstance(cfg["s"], str)
          else [float(v) for v in cfg["s"]])
    tri = TriKicks(lams, ss)
    out = rost_window(tri, float(cfg["t"]), float(cfg["threshold"]),
                      int(cfg["n_max"]), int(cfg["probe_starts"]))
    csv_path, json_path = _paths(cfg, "csv", "json")
    report.write_rows(csv_path, ["start_j", "escape_m"],
                      [(j, "" if m is None else m)
                       for j, m in enumerate(out["escapes"])])
    report.write_json(json_path, _echo(cfg, out))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.rost_window_figure(out, png_path)
    window = "none" if out["window"] is None else str(out["window"])
    print(f"t0={report.fmt(out['t0'])} window={window} "
          f"guaranteed<={report.fmt(out['guaranteed_bound'])}")
    return EXIT_OK


def cmd_schrodinger(cfg: dict) -> int:
    if cfg["c"] is None or cfg["t"] is None:
        raise ValueError("schrodinger needs --c and --t")
    c = (_parse_floats(cfg["c"]) if isinstance(cfg["c"], str)
         else [float(v) for v in cfg["c"]])
    out = schrodinger(c, float(cfg["t"]), float(cfg["q0"]),
                      float(cfg["q1"]), int(cfg["k_max"]))
    csv_path, json_path = _paths(cfg, "csv", "json")
    report.write_rows(csv_path, ["k", "log_abs_q"],
                      list(zip(out["ks"], out["logs"])))
    summary = {k: v for k, v in out.items() if k not in ("ks", "logs")}
    report.write_json(json_path, _echo(cfg, summary))
    if cfg["plot"]:
        (png_path,) = _paths(cfg, "png")
        report.schrodinger_figure(out, png_path)
    verdict = "bounded" if out["bounded"] else "growing"
    print(f"verdict={verdict} slope={report.fmt(out['slope'])}")
    return EXIT_OK


def cmd_iwasawa(cfg: dict) -> int:
    if not cfg["matrix"]:
        raise ValueError('iwasawa needs a matrix, e.g. "1 2; 0 1"')
    rows = [r for r in cfg["matrix"].split(";") if r.strip()]
    if len(rows) != 2:
        raise ValueError("matrix needs two ;-separated rows")
    entries = []
    for row in rows:
        vals = [float(v) for v in row.replace(",", " ").split()]
        if len(vals) != 2:
            raise ValueError("each row needs two entries")
        entries.extend(vals)
    f = iwasawa(Mat2(*entries))
    print(f"s={report.fmt(f.s)} lambda={report.fmt(f.lam)} "
          f"alpha={report.fmt(f.alpha)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kicklab",
                     description="kicked products of unimodular 2x2 matrices")
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override")
        p.add_argument("--outdir",
                       help=f"output directory (default ${OUTDIR_ENV} or .)")
        p.add_argument("--prefix", help="output file name stem")
        p.add_argument("--plot", action=argparse.BooleanOptionalAction,
                       default=None, help="render a PNG figure (default on)")

    p = sub.add_parser("scan", help="classify a t-grid by boundedness")
    p.add_argument("--kicks", help="kick source spec")
    p.add_argument("-T", "--t-max", dest="t_max", type=float)
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--cells", type=int)
    p.add_argument("--horizon", type=int, help="steps N (default 65536)")
    p.add_argument("--threshold", type=float, help="norm bound M (default 1e6)")
    p.add_argument("--slope-tol", dest="slope_tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--bound", type=float, help="random kick bound C")
    p.add_argument("--refine", action=argparse.BooleanOptionalAction,
                   default=None, help="subdivide verdict-boundary cells once")
    p.add_argument("--workers", type=int,
                   help="process pool size (default: all cores)")
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("growth-map", help="u_N over a complex rectangle")
    p.add_argument("--kicks")
    p.add_argument("--re-min", dest="re_min", type=float)
    p.add_argument("--re-max", dest="re_max", type=float)
    p.add_argument("--im-min", dest="im_min", type=float)
    p.add_argument("--im-max", dest="im_max", type=float)
    p.add_argument("--re-points", dest="re_points", type=int)
    p.add_argument("--im-points", dest="im_points", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bound", type=float)
    p.add_argument("--workers", type=int)
    common(p)
    p.set_defaults(func=cmd_growth_map)

    p = sub.add_parser("construct-seq",
                       help="embed targets via trace-annihilating rotations")
    p.add_argument("targets", nargs="*", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--slack", type=float)
    common(p)
    p.set_defaults(func=cmd_construct_seq)

    p = sub.add_parser("construct-eus",
                       help="build the dyadic interval family")
    p.add_argument("--depth", type=int)
    p.add_argument("--c0", help="level-0 kick, a rational like -1 or -1/2")
    p.add_argument("--e0", help="core seed interval lo,hi")
    p.add_argument("--tail-levels", dest="tail_levels", type=int)
    p.add_argument("--margin-frac", dest="margin_frac", type=float)
    p.add_argument("--samples", type=int, help="grid points per interval")
    common(p)
    p.set_defaults(func=cmd_construct_eus)

    p = sub.add_parser("verify",
                       help="certify membership points of a saved build")
    p.add_argument("ts", nargs="*", type=float)
    p.add_argument("--build", help="build JSON from construct-eus")
    p.add_argument("--members", type=int,
                   help="also check this many picked members")
    p.add_argument("--k-max", dest="k_max", type=int)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rost-window",
                       help="norm-escape window for triangular kicks")
    p.add_argument("--lam", help="comma-separated diagonal entries")
    p.add_argument("--s", help="comma-separated shear entries")
    p.add_argument("--t", type=float)
    p.add_argument("--threshold", type=float, help="norm threshold K")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--probe-starts", dest="probe_starts", type=int)
    common(p)
    p.set_defaults(func=cmd_rost_window)

    p = sub.add_parser("schrodinger",
                       help="three-term recurrence boundedness check")
    p.add_argument("--c", help="comma-separated kick coefficients, cycled")
    p.add_argument("--t", type=float)
    p.add_argument("--q0", type=float)
    p.add_argument("--q1", type=float)
    p.add_argument("--k-max", dest="k_max", type=int)
    common(p)
    p.set_defaults(func=cmd_schrodinger)

    p = sub.add_parser("iwasawa", help="factor a matrix as H(s) D(lam) R(alpha)")
    p.add_argument("matrix", nargs="?", help='entries like "1 2; 0 1"')
    p.add_argument("--config")
    p.set_defaults(func=cmd_iwasawa)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = merge_config(args)
        return args.func(cfg)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, OverflowError, KickError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
