"""Delimited output and figures for adversary-simulation reports."""

from __future__ import annotations

import csv
import os
from dataclasses import asdict, fields

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulate import SimulationReport

CSV_COLUMNS = [f.name for f in fields(SimulationReport)]


def write_report_csv(reports: list[SimulationReport], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for report in reports:
            writer.writerow(asdict(report))


def render_report_figures(reports: list[SimulationReport], out_dir: str) -> list[str]:
    """Render the success-rate and recovery figures; returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    schemes = sorted({r.scheme for r in reports})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for scheme in schemes:
        rows = sorted((r for r in reports if r.scheme == scheme), key=lambda r: r.observations)
        xs = [r.observations for r in rows]
        ys = [r.success_rate for r in rows]
        # clamp away float dust: the bounds can land an epsilon inside the rate
        yerr_low = [max(0.0, r.success_rate - r.wilson_low) for r in rows]
        yerr_high = [max(0.0, r.wilson_high - r.success_rate) for r in rows]
        ax.errorbar(xs, ys, yerr=[yerr_low, yerr_high], marker="o", capsize=4, label=scheme)
        if rows:
            ax.axhline(rows[0].baseline_rate, linestyle=":", linewidth=1, alpha=0.6)
    ax.set_xlabel("observed logins (m)")
    ax.set_ylabel("impersonation success rate")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.set_title("Impersonation success vs. observation budget (95% Wilson)")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(out_dir, "success_rates.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for scheme in schemes:
        rows = sorted((r for r in reports if r.scheme == scheme), key=lambda r: r.observations)
        ax.plot(
            [r.observations for r in rows],
            [r.mean_candidate_count for r in rows],
            marker="s",
            label=f"{scheme}: candidate multipliers",
        )
    ax.set_xlabel("observed logins (m)")
    ax.set_ylabel("mean multiplier candidates after attack")
    ax.set_ylim(bottom=0)
    ax.set_title("Multiplier recovery: linear collapses, randomized does not")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(out_dir, "recovery_stats.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written
