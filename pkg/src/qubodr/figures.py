"""Plot rendering for experiment reports.

Figures are written next to the delimited report files so a run leaves a
self-contained directory: the CSV for machines, the PNGs for eyeballs.
Only rows that carry the relevant columns contribute to each figure; a
figure with no data is skipped rather than emitted empty.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _policies(rows: list[dict]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row["policy"] not in seen:
            seen.append(row["policy"])
    return seen


def _finite(values) -> list[float]:
    return [float(v) for v in values if v is not None and math.isfinite(float(v))]


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report_figures(rows: list[dict], out_dir, stem: str = "report") -> list[Path]:
    """Render the standard figure set for a report; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not rows:
        return []
    paths: list[Path] = []
    policies = _policies(rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    data = [
        _finite(r["rel_reduction"] for r in rows if r["policy"] == p)
        for p in policies
    ]
    if any(data):
        ax.boxplot(data, tick_labels=policies, showmeans=True)
        ax.set_ylabel("relative DR reduction")
        ax.set_title("DR reduction by policy")
        ax.grid(True, axis="y", alpha=0.3)
        paths.append(_save(fig, out / f"{stem}_dr_reduction.png"))
    else:
        plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    plotted = False
    for p in policies:
        xs = _finite(r["cmax_initial"] for r in rows if r["policy"] == p)
        ys = _finite(r["cmax_final"] for r in rows if r["policy"] == p)
        if xs and len(xs) == len(ys):
            ax.scatter(xs, ys, s=14, alpha=0.6, label=p)
            plotted = True
    if plotted:
        lims = ax.get_xlim()
        ax.plot(lims, lims, "k--", lw=0.8)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("coefficient ratio before")
        ax.set_ylabel("coefficient ratio after")
        ax.set_title("Coefficient ratio: before vs after")
        ax.legend()
        paths.append(_save(fig, out / f"{stem}_cmax.png"))
    else:
        plt.close(fig)

    pruned = _finite(r["pruned_fraction"] for r in rows)
    if pruned:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(pruned, bins=20, range=(0.0, 1.0), edgecolor="black")
        ax.set_xlabel("fraction of pruned nodes")
        ax.set_ylabel("instances")
        ax.set_title("Branch-and-bound pruning")
        paths.append(_save(fig, out / f"{stem}_pruned.png"))

    med = [
        (p, _finite(r["median_rel_energy"] for r in rows if r["policy"] == p))
        for p in policies
    ]
    med = [(p, vals) for p, vals in med if vals]
    if med:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.boxplot([vals for _, vals in med], tick_labels=[p for p, _ in med])
        ax.set_ylabel("median relative sample energy")
        ax.set_title("Sample quality under the original matrix")
        ax.grid(True, axis="y", alpha=0.3)
        paths.append(_save(fig, out / f"{stem}_rel_energy.png"))
    return paths
