#!/usr/bin/env python3
"""Batch figure rendering from the delimited simulation outputs.

Usage: render.py --job KIND --in DIR --out FILE.png

Jobs read only the documented CSV schemas from the input directory and
write one deterministic PNG (fixed style, metadata stripped, no
timestamps).  Schema problems are reported with file name and line
number.  Kinds:

    radius    radius.csv: extracted vs exact front radius over time
    sandwich  sandwich_report.csv: envelope violation traces
    wave      wave_profile.csv: traveling-wave profile
    hydro     hydro_report.csv: sup-gradient and energy curves
    heatmap   field_t*.csv (+ optional front_t*.csv, radius.csv overlay)
    entropy   site_means.csv vs field_t*.csv: per-site divergence decay
    flowcost  flow_cost.csv: transport cost against window size
"""

from __future__ import annotations

import argparse
import glob
import math
import os
import re
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaError(Exception):
    """CSV contents violate the documented schema."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")


def read_table(path, columns, numeric=None):
    """Parse a CSV with an exact header; every cell is checked.

    numeric lists the column names that must parse as floats (default:
    all of them).  Returns a dict of column arrays (floats) or lists
    (non-numeric columns).
    """
    if numeric is None:
        numeric = columns
    if not os.path.exists(path):
        raise SchemaError(path, 0, "file not found")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split(",") != list(columns):
            raise SchemaError(path, 1, f"expected header {','.join(columns)!r}, got {header!r}")
        data = {c: [] for c in columns}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(columns):
                raise SchemaError(path, lineno, f"expected {len(columns)} columns, got {len(cells)}")
            for c, cell in zip(columns, cells):
                if c in numeric:
                    try:
                        v = float(cell)
                    except ValueError:
                        raise SchemaError(path, lineno, f"column {c!r}: {cell!r} is not a number")
                    if not math.isfinite(v):
                        raise SchemaError(path, lineno, f"column {c!r}: non-finite value")
                    data[c].append(v)
                else:
                    data[c].append(cell)
    return {c: (np.asarray(v) if c in numeric else v) for c, v in data.items()}


def _style():
    plt.rcParams.update(
        {
            "figure.figsize": (6.0, 4.0),
            "figure.dpi": 120,
            "font.size": 9,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "svg.hashsalt": "fixed",
        }
    )


def _save(fig, out):
    fig.savefig(out, metadata={"Software": None}, bbox_inches="tight")
    plt.close(fig)


def _timed_files(indir, pattern):
    """[(t, path)] for files like field_t0.004.csv, sorted by time."""
    rx = re.compile(re.escape(pattern) + r"t([-0-9.e+]+)\.csv$")
    out = []
    for path in glob.glob(os.path.join(indir, pattern + "t*.csv")):
        m = rx.search(os.path.basename(path))
        if m:
            out.append((float(m.group(1)), path))
    return sorted(out)


def job_radius(indir, out):
    d = read_table(os.path.join(indir, "radius.csv"), ("t", "extracted_R", "exact_R"))
    fig, ax = plt.subplots()
    ax.plot(d["t"], d["exact_R"], "k-", label="exact")
    ax.plot(d["t"], d["extracted_R"], "o--", color="tab:blue", label="extracted")
    ax.set_xlabel("t")
    ax.set_ylabel("front radius")
    ax.legend()
    _save(fig, out)


def job_sandwich(indir, out):
    d = read_table(
        os.path.join(indir, "sandwich_report.csv"),
        ("t", "max_violation_lo", "max_violation_hi"),
    )
    fig, ax = plt.subplots()
    ax.plot(d["t"], d["max_violation_lo"], label="lower envelope")
    ax.plot(d["t"], d["max_violation_hi"], label="upper envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("max violation")
    if d["t"].size == 0 or max(d["max_violation_lo"].max(initial=0), d["max_violation_hi"].max(initial=0)) == 0:
        ax.annotate("no violations", (0.5, 0.5), xycoords="axes fraction", ha="center")
    ax.legend()
    _save(fig, out)


def job_wave(indir, out):
    d = read_table(os.path.join(indir, "wave_profile.csv"), ("z", "U"))
    fig, ax = plt.subplots()
    ax.plot(d["z"], d["U"], color="tab:green")
    ax.set_xlabel("z")
    ax.set_ylabel("U(z)")
    _save(fig, out)


def job_hydro(indir, out):
    d = read_table(
        os.path.join(indir, "hydro_report.csv"),
        ("t", "sup_gradient", "energy_lhs", "energy_rhs"),
    )
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.plot(d["t"], d["sup_gradient"])
    ax1.set_xlabel("t")
    ax1.set_ylabel("sup gradient")
    ax2.plot(d["t"], d["energy_lhs"], label="lhs")
    ax2.plot(d["t"], d["energy_rhs"], label="bound")
    ax2.set_xlabel("t")
    ax2.set_ylabel("energy")
    ax2.legend()
    _save(fig, out)


def _field_grid(path):
    d = read_table(path, ("site_index", "value"))
    n = d["site_index"].size
    N = int(round(math.sqrt(n)))
    if N * N != n:
        raise SchemaError(path, 2, f"{n} sites is not a square grid")
    order = np.argsort(d["site_index"])
    if not np.array_equal(d["site_index"][order], np.arange(n)):
        raise SchemaError(path, 2, "site indices are not a permutation of 0..n-1")
    return d["value"][order].reshape(N, N)


def job_heatmap(indir, out):
    fields = _timed_files(indir, "field_")
    if not fields:
        raise SchemaError(os.path.join(indir, "field_t*.csv"), 0, "no field dumps found")
    t, path = fields[-1]
    grid = _field_grid(path)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.imshow(
        grid.T, origin="lower", extent=(0, 1, 0, 1), cmap="viridis", vmin=0, vmax=1
    )
    fronts = dict(_timed_files(indir, "front_"))
    if t in fronts:
        f = read_table(fronts[t], ("v1", "v2"))
        ax.plot(f["v1"], f["v2"], "w.", markersize=1.5, label="extracted")
    radius_path = os.path.join(indir, "radius.csv")
    if os.path.exists(radius_path):
        r = read_table(radius_path, ("t", "extracted_R", "exact_R"))
        idx = np.argmin(np.abs(r["t"] - t))
        theta = np.linspace(0, 2 * math.pi, 256)
        ax.plot(
            0.5 + r["exact_R"][idx] * np.cos(theta),
            0.5 + r["exact_R"][idx] * np.sin(theta),
            "r-",
            linewidth=0.8,
            label="exact circle",
        )
    ax.set_title(f"t = {t:g}")
    ax.grid(False)
    _save(fig, out)


def job_entropy(indir, out):
    means = read_table(os.path.join(indir, "site_means.csv"), ("t", "site", "mean"))
    fields = _timed_files(indir, "field_")
    if not fields:
        raise SchemaError(os.path.join(indir, "field_t*.csv"), 0, "no field dumps found")
    times = np.unique(means["t"])
    proxy_t, proxy = [], []
    for t, path in fields:
        dist = np.abs(times - t)
        if dist.min() > 1e-9:
            continue
        tm = times[np.argmin(dist)]
        sel = means["t"] == tm
        mu = np.clip(means["mean"][sel][np.argsort(means["site"][sel])], 0.0, 1.0)
        d = read_table(path, ("site_index", "value"))
        nu = np.clip(d["value"][np.argsort(d["site_index"])], 1e-12, 1 - 1e-12)
        if mu.size != nu.size:
            raise SchemaError(path, 2, "site count differs from site_means.csv")
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = np.where(mu > 0, mu * np.log(mu / nu), 0.0)
            t2 = np.where(mu < 1, (1 - mu) * np.log((1 - mu) / (1 - nu)), 0.0)
        proxy_t.append(t)
        proxy.append(float((t1 + t2).sum()) / mu.size)
    fig, ax = plt.subplots()
    ax.plot(proxy_t, proxy, "o-")
    ax.set_xlabel("t")
    ax.set_ylabel("per-site divergence proxy")
    _save(fig, out)


def job_flowcost(indir, out):
    d = read_table(os.path.join(indir, "flow_cost.csv"), ("d", "ell", "cost"))
    fig, ax = plt.subplots()
    for dim in sorted(set(d["d"])):
        sel = d["d"] == dim
        ax.loglog(d["ell"][sel], d["cost"][sel], "o-", label=f"d = {int(dim)}")
    ax.set_xlabel("window size")
    ax.set_ylabel("transport cost")
    ax.legend()
    _save(fig, out)


JOBS = {
    "radius": job_radius,
    "sandwich": job_sandwich,
    "wave": job_wave,
    "hydro": job_hydro,
    "heatmap": job_heatmap,
    "entropy": job_entropy,
    "flowcost": job_flowcost,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--job", required=True, choices=sorted(JOBS))
    parser.add_argument("--in", dest="indir", required=True, help="input directory")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    _style()
    try:
        JOBS[args.job](args.indir, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
