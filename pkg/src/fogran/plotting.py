"""Static figures for sweep and region-map results (PNG/PDF via matplotlib)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .experiments import RegionCell, SweepResult

AXIS_LABELS = {"d_c": r"fronthaul delay $d_c$ [slots]", "d_e": r"scheduling delay $d_e$ [slots]",
               "eps": r"outage budget $\epsilon$", "gamma_s": r"$\gamma_S$ [dB]",
               "gamma_i": r"$\gamma_I$ [dB]", "v": "velocity [km/h]"}
MARKERS = {"D-RAN": "s", "C-RAN": "o", "F-RAN": "^", "C-RAN-closed": "x", "F-RAN-closed": "+"}


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _figsize(width: float = 5.0) -> tuple[float, float]:
    return width, width * (math.sqrt(5) - 1.0) / 2.0


def plot_sweep(result: SweepResult, path: str | Path, title: str | None = None) -> Path:
    """Analytic curves per split with empirical points overlaid when available."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=_figsize())
    splits = list(dict.fromkeys(r.split for r in result.rows))
    for split in splits:
        x, y = result.series(split)
        if x.size == 0:
            continue
        line, = ax.plot(x, y, marker=MARKERS.get(split, "."), label=split)
        xe, ye = result.series(split, empirical=True)
        keep = np.isfinite(ye)
        if keep.any():
            ax.plot(xe[keep], ye[keep], ls="none", marker=".", color=line.get_color(), alpha=0.6)
    if result.parameter == "eps" and np.all(np.array([r.param for r in result.rows]) >= 0):
        positive = [r.param for r in result.rows if r.param > 0]
        if positive:
            ax.set_xscale("symlog", linthresh=min(positive))
    ax.set_xlabel(AXIS_LABELS.get(result.parameter, result.parameter))
    ax.set_ylabel("sum rate [bit/s/Hz]")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_region_map(cells: Sequence[RegionCell], path: str | Path, title: str | None = None) -> Path:
    """Winner per (d_c, v) cell; colour intensity shows the rate margin."""
    plt = _pyplot()
    dcs = sorted({c.dc for c in cells})
    vs = sorted({c.v for c in cells})
    grid = np.full((len(vs), len(dcs)), np.nan)
    for c in cells:
        grid[vs.index(c.v), dcs.index(c.dc)] = c.margin
    lim = max(np.nanmax(np.abs(grid)), 1e-12)
    fig, ax = plt.subplots(figsize=_figsize())
    mesh = ax.imshow(grid, origin="lower", aspect="auto", cmap="coolwarm_r", vmin=-lim, vmax=lim,
                     extent=(dcs[0] - 0.5, dcs[-1] + 0.5, 0, len(vs)))
    ax.set_yticks(np.arange(len(vs)) + 0.5)
    ax.set_yticklabels([f"{v:.0f}" for v in vs])
    for c in cells:
        ax.text(c.dc, vs.index(c.v) + 0.5, c.winner[0], ha="center", va="center", fontsize=7)
    ax.set_xlabel(AXIS_LABELS["d_c"])
    ax.set_ylabel(AXIS_LABELS["v"])
    fig.colorbar(mesh, ax=ax, label="C-RAN minus F-RAN [bit/s/Hz]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
