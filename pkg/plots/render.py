#!/usr/bin/env python3
"""Render paper-style figures from svarsoft output files.

A pure consumer of the documented file formats: every number drawn comes
straight from the input file, and the SHA-256 of the plotted values is
printed as ``values-sha256=...`` so callers can verify nothing was
recomputed. Styling is pinned and metadata stripped, so re-rendering the
same inputs yields an identical image byte stream.

Usage:
    render.py --job theta-hist|irf-panel|cond-hist-grid|iso-draw \
              --in FILE [FILE ...] --out OUT.png
"""
from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

JOBS = ("theta-hist", "irf-panel", "cond-hist-grid", "iso-draw")

SCHEMAS = {
    "theta-hist": "svarsoft.theta-draws.v1",
    "irf-panel": "svarsoft.irf.v1",
    "cond-hist-grid": "svarsoft.conddraws.v1",
    "iso-draw": "svarsoft.isodraw.v1",
}

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 8,
}


class SchemaMismatch(ValueError):
    pass


class NoDataToPlot(ValueError):
    pass


@dataclass
class PlotJob:
    kind: str
    inputs: list[Path]
    output: Path
    bins: int = 100


def read_table(path: Path, expected_schema: str):
    """Parse a schema-versioned delimited file into (meta, header, rows)."""
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise SchemaMismatch(f"{path}: missing schema header line")
    schema = lines[0].split("=", 1)[1]
    if schema != expected_schema:
        raise SchemaMismatch(
            f"{path}: schema {schema!r} not supported (expected {expected_schema!r})"
        )
    meta: list[str] = []
    body: list[str] = []
    for line in lines[1:]:
        if line.startswith("#"):
            meta.append(line[1:].strip())
        elif line.strip():
            body.append(line)
    if len(body) < 2:
        raise NoDataToPlot(f"{path}: no data rows")
    header = body[0].split(",")
    rows = [line.split(",") for line in body[1:]]
    return meta, header, rows


def checksum(arrays: list[np.ndarray]) -> str:
    digest = hashlib.sha256()
    for arr in arrays:
        digest.update(np.ascontiguousarray(arr, dtype=float).tobytes())
    return digest.hexdigest()


def save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    # Software metadata carries the backend version; drop it so identical
    # inputs produce identical bytes
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def render_theta_hist(job: PlotJob) -> str:
    meta, header, rows = read_table(job.inputs[0], SCHEMAS["theta-hist"])
    t_col = header.index("theta")
    thetas = np.array([float(r[t_col]) for r in rows])
    intervals = []
    for m in meta:
        if m.startswith("interval="):
            lo, hi = m.split("=", 1)[1].split(",")
            intervals.append((float(lo), float(hi)))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(thetas, bins=job.bins, range=(-np.pi, np.pi), density=True,
            color="#4878a8", edgecolor="none")
    for lo, hi in intervals:
        ax.axvline(lo, color="black", linewidth=1.2)
        ax.axvline(hi, color="black", linewidth=1.2)
    ax.set_xlabel("theta")
    ax.set_ylabel("density")
    ax.set_title("Rotation-angle draws with identified-set bounds")
    save(fig, job.output)
    return checksum([thetas])


def render_irf_panel(job: PlotJob) -> str:
    _, header, rows = read_table(job.inputs[0], SCHEMAS["irf-panel"])
    cols = {name: header.index(name) for name in header}
    variables, shocks = [], []
    for r in rows:
        if r[cols["variable"]] not in variables:
            variables.append(r[cols["variable"]])
        if r[cols["shock"]] not in shocks:
            shocks.append(r[cols["shock"]])
    plotted: list[np.ndarray] = []
    fig, axes = plt.subplots(
        len(variables), len(shocks),
        figsize=(2.6 * len(shocks), 2.2 * len(variables)),
        squeeze=False,
    )
    alpha0 = rows[0][cols["alpha"]]
    for i, vname in enumerate(variables):
        for j, sname in enumerate(shocks):
            sel = [
                r for r in rows
                if r[cols["variable"]] == vname and r[cols["shock"]] == sname
                and r[cols["alpha"]] == alpha0
            ]
            sel.sort(key=lambda r: int(r[cols["horizon"]]))
            h = np.array([int(r[cols["horizon"]]) for r in sel])
            med = np.array([float(r[cols["median"]]) for r in sel])
            lo = np.array([float(r[cols["cr_lo"]]) for r in sel])
            hi = np.array([float(r[cols["cr_hi"]]) for r in sel])
            plotted += [med, lo, hi]
            ax = axes[i][j]
            ax.plot(h, med, color="black", linewidth=1.3)
            ax.plot(h, lo, color="black", linewidth=0.9, linestyle="--")
            ax.plot(h, hi, color="black", linewidth=0.9, linestyle="--")
            ax.axhline(0.0, color="#999999", linewidth=0.6)
            if i == 0:
                ax.set_title(sname)
            if j == 0:
                ax.set_ylabel(vname)
    fig.tight_layout()
    save(fig, job.output)
    return checksum(plotted)


def render_cond_hist_grid(job: PlotJob) -> str:
    _, header, rows = read_table(job.inputs[0], SCHEMAS["cond-hist-grid"])
    cols = {name: header.index(name) for name in header}
    variables, shocks, samplers = [], [], []
    for r in rows:
        if r[cols["variable"]] not in variables:
            variables.append(r[cols["variable"]])
        if r[cols["shock"]] not in shocks:
            shocks.append(r[cols["shock"]])
        if r[cols["sampler"]] not in samplers:
            samplers.append(r[cols["sampler"]])
    plotted: list[np.ndarray] = []
    fig, axes = plt.subplots(
        len(variables), len(shocks),
        figsize=(2.6 * len(shocks), 2.2 * len(variables)),
        squeeze=False,
    )
    colors = {"soft-sign": "#4878a8", "accept-reject": "#c44e52"}
    for i, vname in enumerate(variables):
        for j, sname in enumerate(shocks):
            ax = axes[i][j]
            for label in samplers:
                vals = np.array(
                    [
                        float(r[cols["value"]])
                        for r in rows
                        if r[cols["variable"]] == vname
                        and r[cols["shock"]] == sname
                        and r[cols["sampler"]] == label
                    ]
                )
                plotted.append(vals)
                ax.hist(
                    vals, bins=60, density=True, histtype="step",
                    color=colors.get(label, "black"), label=label,
                )
            if i == 0:
                ax.set_title(sname)
            if j == 0:
                ax.set_ylabel(vname)
    axes[0][0].legend(fontsize=6)
    fig.tight_layout()
    save(fig, job.output)
    return checksum(plotted)


def render_iso_draw(job: PlotJob) -> str:
    meta, header, rows = read_table(job.inputs[0], SCHEMAS["iso-draw"])
    d_col, e_col = header.index("delta"), header.index("epsilon")
    deltas = np.array([float(r[d_col]) for r in rows])
    eps = np.array([float(r[e_col]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(deltas, eps, color="black", linewidth=1.3)
    ax.set_xlabel("delta (1 - confidence)")
    ax.set_ylabel("epsilon (misclassification error)")
    title = "Iso-draw curve"
    for m in meta:
        if m.startswith("m_draws="):
            title += f" (M = {m.split('=', 1)[1]})"
    ax.set_title(title)
    fig.tight_layout()
    save(fig, job.output)
    return checksum([deltas, eps])


RENDERERS = {
    "theta-hist": render_theta_hist,
    "irf-panel": render_irf_panel,
    "cond-hist-grid": render_cond_hist_grid,
    "iso-draw": render_iso_draw,
}


def render(job: PlotJob) -> str:
    """Render one figure; returns the SHA-256 of the plotted values."""
    if job.kind not in RENDERERS:
        raise ValueError(f"unknown job kind {job.kind!r}")
    for p in job.inputs:
        if not p.exists():
            raise FileNotFoundError(p)
    with plt.rc_context(STYLE):
        return RENDERERS[job.kind](job)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--job", required=True, choices=JOBS)
    parser.add_argument("--in", dest="inputs", required=True, nargs="+")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    job = PlotJob(
        kind=args.job,
        inputs=[Path(p) for p in args.inputs],
        output=Path(args.out),
    )
    try:
        digest = render(job)
    except (SchemaMismatch, NoDataToPlot, FileNotFoundError) as exc:
        print(f"render: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"values-sha256={digest}")
    print(f"wrote {job.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
