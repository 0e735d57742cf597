"""Static figures from diagnostics series and run summaries.

Rendering is deterministic: the Agg backend, fixed dpi, no timestamps, so
identical inputs produce bit-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.figure import Figure

from .reader import read_convergence, read_diagnostics, read_weakstrong_points

__all__ = ["plot_energies", "plot_weakstrong_ladder", "plot_convergence",
           "fit_loglog_slope"]

DPI = 110

ENERGY_SERIES = (("kinetic", "kinetic energy"),
                 ("internal", "internal energy"),
                 ("radiation", "radiation energy"),
                 ("ballistic", "ballistic energy"),
                 ("total_entropy", "total entropy"),
                 ("entropy_production", "entropy production"))


def _save(fig: Figure, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=DPI, metadata={"Software": "nsfplot"})
    return out_path


def plot_energies(csv_path, out_path) -> Path:
    """Energy and entropy time series from one diagnostics CSV."""
    bundle = read_diagnostics(csv_path)
    fig = Figure(figsize=(8, 4.5))
    ax = fig.add_subplot(111)
    for column, label in ENERGY_SERIES:
        ax.plot(bundle.t, bundle[column], label=label, linewidth=1.4)
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.set_title("energy and entropy accounting")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, out_path)


def fit_loglog_slope(amps: np.ndarray, finals: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of log(final) vs log(amplitude)."""
    coeff = np.polyfit(np.log(amps), np.log(finals), 1)
    return float(coeff[0]), float(coeff[1])


def plot_weakstrong_ladder(summary_paths, out_path) -> tuple[Path, float]:
    """Relative-energy decay ladder on log-log axes with the fitted slope
    annotated; returns (figure path, annotated slope)."""
    amps, finals = read_weakstrong_points(summary_paths)
    slope, intercept = fit_loglog_slope(amps, finals)
    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot(111)
    ax.loglog(amps, finals, "o", label="final relative energy")
    grid = np.array([amps.min(), amps.max()])
    ax.loglog(grid, np.exp(intercept) * grid**slope, "--",
              label=f"fit: slope = {slope:.6f}")
    ax.set_xlabel("initial perturbation amplitude")
    ax.set_ylabel("relative energy at t_end")
    ax.set_title("weak-strong stability ladder")
    ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.3, which="both")
    return _save(fig, out_path), slope


def plot_convergence(summary_paths, out_path) -> Path:
    """Observed-order table from convergence summaries."""
    rows = read_convergence(summary_paths)
    cells = [[r["case"], r["ladder"], r["field"],
              r["order"] if isinstance(r["order"], str)
              else f"{r['order']:.3f}"] for r in rows]
    fig = Figure(figsize=(6.5, 0.5 + 0.32 * len(cells)))
    ax = fig.add_subplot(111)
    ax.axis("off")
    table = ax.table(cellText=cells,
                     colLabels=("case", "ladder", "field", "observed order"),
                     loc="center")
    table.auto_set_font_size(False)
    table.set_fontsize(9)
    table.scale(1.0, 1.3)
    ax.set_title("refinement-ladder convergence orders", pad=18)
    return _save(fig, out_path)
