"""File output for CLI runs: delimited data, JSON summaries, and figures.

Numeric text output is decimal with 17 significant digits so identical
configurations reproduce byte-identical files.  Figures render through the
Agg backend straight to PNG next to the delimited output; they carry no
timestamps.
"""

from __future__ import annotations

import csv
import json
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def fmt(value) -> str:
    """Decimal text for one cell: floats at 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def jsonable(value):
    """Recursively coerce numpy scalars/arrays and tuples for json.dump."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# ---------------------------------------------------------------------------
# per-subcommand writers

def write_scan(result, csv_path) -> None:
    rows = zip(result.ts, result.bounded, result.sup_lognorms, result.slopes)
    write_rows(csv_path, ["t", "verdict", "sup_lognorm", "slope"],
               [(t, "bounded" if ok else "growing", s, sl)
                for t, ok, s, sl in rows])


def write_growth_map(gm, csv_path) -> None:
    write_rows(csv_path, ["re_z", "im_z", "u_n"],
               [(z.real, z.imag, u)
                for z, u in zip(gm.zs.ravel(), gm.u.ravel())])


def scan_figure(result, path) -> None:
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ts = np.asarray(result.ts, dtype=float)
    sup = np.asarray(result.sup_lognorms, dtype=float)
    ax.plot(ts, sup, lw=0.8, color="tab:blue", label="sup log-norm")
    ax.axhline(math.log(result.m_threshold), color="tab:red", ls="--",
               lw=0.8, label="log M")
    bounded = np.asarray(result.bounded, dtype=bool)
    ax.fill_between(ts, 0.0, sup.max() if sup.size else 1.0, where=bounded,
                    alpha=0.15, color="tab:green", label="bounded cells")
    ax.set_xlabel("t")
    ax.set_ylabel("sup log-norm at horizon")
    ax.set_title(f"scan: N={result.n_horizon}, "
                 f"measure={result.measure():.6g}")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def growth_map_figure(gm, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    extent = (float(gm.zs.real.min()), float(gm.zs.real.max()),
              float(gm.zs.imag.min()), float(gm.zs.imag.max()))
    im = ax.imshow(gm.u, origin="lower", extent=extent, aspect="auto",
                   cmap="viridis")
    fig.colorbar(im, ax=ax, label="u_N(z)")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"growth exponent at N={gm.n_horizon}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def seq_figure(traces, path) -> None:
    """One sup-trajectory per embedded target."""
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    for t, trace in traces:
        ax.plot(trace.ns, trace.lognorms, lw=0.8, label=f"t={t:g}")
    ax.set_xlabel("n")
    ax.set_ylabel("log-norm")
    ax.set_title("partial products at the embedded targets")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def eus_figure(build, path) -> None:
    """Interval structure per level: core on the left, far windows right."""
    fig, (ax_core, ax_win) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    split = 2.0
    for n, es in enumerate(build.e_sets):
        for lo, hi in es.as_pairs():
            ax = ax_core if hi < split else ax_win
            ax.hlines(n, lo, hi, color="tab:blue", lw=3.0)
    for n, (lo, hi) in enumerate(build.i_intervals, start=1):
        ax_win.hlines(n - 0.15, lo, hi, color="tab:orange", lw=3.0)
    for ax, title in ((ax_core, "core components"),
                      (ax_win, "far windows")):
        ax.set_xlabel("t")
        ax.set_ylabel("level n")
        ax.set_title(title)
        ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def verify_figure(reports, path) -> None:
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ts = [r["t"] for r in reports]
    ax.plot(ts, [r["sup_lognorm"] for r in reports], "o",
            label="sup log-norm", color="tab:blue")
    ax.plot(ts, [math.log(r["bound"]) for r in reports], "x",
            label="log certified bound", color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel("log scale")
    ax.set_title("membership checks: observed sup vs certified bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def rost_window_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    xs = list(range(len(report["escapes"])))
    ys = [m if m is not None else 0 for m in report["escapes"]]
    ax.bar(xs, ys, color="tab:blue")
    if report["window"] is not None:
        ax.axhline(report["window"], color="tab:red", ls="--", lw=0.8,
                   label=f"window N={report['window']}")
        ax.legend(fontsize=8)
    ax.set_xlabel("start j")
    ax.set_ylabel("escape step m")
    ax.set_title(f"norm-escape times at t={report['t']:g}, "
                 f"K={report['k_threshold']:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def schrodinger_figure(out, path) -> None:
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ks = out["ks"]
    logs = [v if math.isfinite(v) else float("nan") for v in out["logs"]]
    ax.plot(ks, logs, lw=0.8, color="tab:blue")
    ax.set_xlabel("k")
    ax.set_ylabel("log |q_k|")
    verdict = "bounded" if out["bounded"] else "growing"
    ax.set_title(f"recurrence solution at t={out['t']:g} ({verdict})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
