"""CSV serialization and figure rendering for the command-line reports."""

from __future__ import annotations

import math
import os
from typing import Optional

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import ALGORITHMS, SweepTable

CSV_COLUMNS = ("sweep_var", "sweep_value", "algorithm", "mean_ee_bits_per_joule",
               "mean_se_bps_per_hz", "mean_pb_w", "mean_pr_w", "mean_evals",
               "trials_feasible", "trials_total", "ci95_ee")


def fmt_float(x: float) -> str:
    """9 significant digits; nan literal for missing values."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.9g}"


def comparison_csv(table: SweepTable, ee_scale: float = 1.0,
                   ee_unit_suffix: str = "") -> str:
    """Render a sweep/compare table to the delimited report format.

    One row per (sweep value, algorithm). ee_scale rescales the two EE
    columns (1e-6 for Mbit/J) and ee_unit_suffix renames them accordingly.
    """
    cols = list(CSV_COLUMNS)
    if ee_unit_suffix:
        cols[3] = f"mean_ee_{ee_unit_suffix}_per_joule"
    lines = [",".join(cols)]
    for row in table.rows:
        for name in ALGORITHMS:
            s = row.stats[name]
            lines.append(",".join([
                table.variable,
                fmt_float(row.sweep_value),
                name,
                fmt_float(s.mean_ee_bits_per_joule * ee_scale),
                fmt_float(s.mean_se_bps_hz),
                fmt_float(s.mean_p_b_w),
                fmt_float(s.mean_p_r_w),
                fmt_float(s.mean_evals),
                str(s.trials_feasible),
                str(s.trials_total),
                fmt_float(s.ci95_ee * ee_scale if not math.isnan(s.ci95_ee) else math.nan),
            ]))
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _save(fig, figdir: str, name: str) -> str:
    os.makedirs(figdir, exist_ok=True)
    path = os.path.join(figdir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path


def render_sweep_figures(table: SweepTable, figdir: str) -> list:
    """EE and SE curves per algorithm over the sweep values, saved as PNG."""
    values = [row.sweep_value for row in table.rows]
    paths = []
    for metric, label, fname in (
            ("mean_ee_bits_per_joule", "energy efficiency [bits/J]", "sweep_ee.png"),
            ("mean_se_bps_hz", "spectral efficiency [bps/Hz]", "sweep_se.png"),
            ("mean_evals", "objective evaluations", "sweep_evals.png")):
        fig = plt.figure(figsize=(6, 4))
        for name in ALGORITHMS:
            ys = [getattr(row.stats[name], metric) for row in table.rows]
            plt.plot(values, ys, marker="o", label=name)
        plt.xlabel(table.variable)
        plt.ylabel(label)
        if metric == "mean_evals":
            plt.yscale("log")
        plt.grid(True, ls=":")
        plt.legend(fontsize=8)
        paths.append(_save(fig, figdir, fname))
    return paths


def render_compare_figures(table: SweepTable, figdir: str) -> list:
    """Per-algorithm EE / SE / cost bars for a single-point comparison."""
    stats = table.rows[0].stats
    paths = []
    for metric, label, fname, logy in (
            ("mean_ee_bits_per_joule", "energy efficiency [bits/J]", "compare_ee.png", False),
            ("mean_se_bps_hz", "spectral efficiency [bps/Hz]", "compare_se.png", False),
            ("mean_evals", "objective evaluations", "compare_evals.png", True)):
        fig = plt.figure(figsize=(6, 4))
        ys = [getattr(stats[name], metric) for name in ALGORITHMS]
        plt.bar(ALGORITHMS, ys)
        plt.ylabel(label)
        if logy:
            plt.yscale("log")
        plt.xticks(rotation=30, ha="right", fontsize=8)
        plt.grid(True, axis="y", ls=":")
        paths.append(_save(fig, figdir, fname))
    return paths


def oracle_csv(report) -> str:
    """Tall CSV with the dense sweeps and the bound cross-checks of one realization."""
    lines = ["section,p_b_w,p_r_w,ee_bits_per_joule,closed_form_w,root_found_w,rel_err"]

    def row(section, pb=math.nan, pr=math.nan, ee=math.nan,
            closed=math.nan, root=math.nan, rel=math.nan):
        lines.append(",".join([section] + [fmt_float(v)
                                           for v in (pb, pr, ee, closed, root, rel)]))

    for pr, ee in zip(report.relay_sweep_p_w, report.relay_sweep_ee):
        row("sweep_relay", pb=report.p_b_fixed_w, pr=pr, ee=ee)
    for pb, ee in zip(report.bs_sweep_p_w, report.bs_sweep_ee):
        row("sweep_bs", pb=pb, pr=report.p_r_fixed_w, ee=ee)
    for i, pb in enumerate(report.grid_p_b_w):
        for j, pr in enumerate(report.grid_p_r_w):
            row("sweep_2d", pb=pb, pr=pr, ee=report.grid_ee[i, j])
    row("bound_relay", pb=report.p_b_fixed_w, closed=report.p_r_min_closed_w,
        root=report.p_r_min_root_w,
        rel=abs(report.p_r_min_closed_w - report.p_r_min_root_w) / report.p_r_min_root_w)
    row("bound_bs", pr=report.p_r_fixed_w, closed=report.p_b_min_closed_w,
        root=report.p_b_min_root_w,
        rel=abs(report.p_b_min_closed_w - report.p_b_min_root_w) / report.p_b_min_root_w)
    return "\n".join(lines) + "\n"


def render_oracle_figures(report, figdir: str) -> list:
    """1-D EE cuts plus the 2-D EE map with its argmax marked."""
    paths = []
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].plot(report.relay_sweep_p_w, report.relay_sweep_ee)
    axes[0].axvline(report.p_r_min_closed_w, ls="--", color="gray", lw=1)
    axes[0].set_xlabel("relay power [W]")
    axes[0].set_ylabel("EE [bits/J]")
    axes[0].set_xscale("log")
    axes[0].grid(True, ls=":")
    axes[1].plot(report.bs_sweep_p_w, report.bs_sweep_ee)
    axes[1].axvline(report.p_b_min_closed_w, ls="--", color="gray", lw=1)
    axes[1].set_xlabel("BS power [W]")
    axes[1].set_xscale("log")
    axes[1].grid(True, ls=":")
    paths.append(_save(fig, figdir, "oracle_1d.png"))

    fig = plt.figure(figsize=(5.5, 4.2))
    extent = (report.grid_p_r_w[0], report.grid_p_r_w[-1],
              report.grid_p_b_w[0], report.grid_p_b_w[-1])
    plt.imshow(report.grid_ee, origin="lower", aspect="auto", extent=extent)
    plt.plot(report.grid_p_r_w[report.argmax_j],
             report.grid_p_b_w[report.argmax_i], "r*", ms=12)
    plt.colorbar(label="EE [bits/J]")
    plt.xlabel("relay power [W]")
    plt.ylabel("BS power [W]")
    paths.append(_save(fig, figdir, "oracle_2d.png"))
    return paths
