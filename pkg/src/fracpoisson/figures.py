"""Figure rendering for the command-line reports.

Each builder turns the (columns, rows) table a command produced into a
matplotlib Figure; rendering goes through the object API only, so no
global pyplot state is touched.  Saved files carry no software metadata,
keeping a rerun of the same manifest byte-stable on one installation.
"""

from __future__ import annotations

import math

import numpy as np
from matplotlib.figure import Figure

__all__ = ["figure_for_command", "save_figure"]


def save_figure(fig: Figure, path: str) -> None:
    """Write a figure as PNG with deterministic metadata."""
    fig.savefig(path, format="png", dpi=120, metadata={"Software": None})


def _pmf_figure(rows) -> Figure:
    ks = [row[0] for row in rows]
    ps = [row[1] for row in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.bar(ks, ps, color="#4878a8")
    ax.set_xlabel("count k")
    ax.set_ylabel("probability")
    ax.set_title("count probabilities at the requested time")
    fig.tight_layout()
    return fig


def _bivariate_figure(rows) -> Figure:
    rmax = max(row[1] for row in rows)
    grid = np.full((rmax + 1, rmax + 1), np.nan)
    for k, r, p in rows:
        grid[k, r] = p
    fig = Figure(figsize=(5.5, 4.5))
    ax = fig.add_subplot()
    img = ax.imshow(grid, origin="lower", cmap="viridis")
    ax.set_xlabel("count r at the later time")
    ax.set_ylabel("count k at the earlier time")
    ax.set_title("two-time joint probabilities")
    fig.colorbar(img, ax=ax, label="probability")
    fig.tight_layout()
    return fig


def _waiting_figure(rows) -> Figure:
    s = [row[0] for row in rows]
    inter = [row[1] for row in rows]
    wait = [row[2] for row in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.plot(s, inter, label="interarrival density", color="#4878a8")
    ax.plot(s, wait, label="waiting-time density", color="#a85448", ls="--")
    ax.set_xlabel("time")
    ax.set_ylabel("density")
    ax.set_title("arrival-time densities")
    ax.legend()
    fig.tight_layout()
    return fig


def _moments_figure(rows) -> Figure:
    names = [row[0] for row in rows]
    values = [row[1] for row in rows]
    fig = Figure(figsize=(7.0, 0.6 * len(rows) + 1.6))
    ax = fig.add_subplot()
    ax.barh(range(len(rows)), values, color="#4878a8")
    ax.set_yticks(range(len(rows)), labels=names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("closed-form value")
    ax.set_title("analytic moments")
    fig.tight_layout()
    return fig


def _verify_figure(rows) -> Figure:
    # rows: name, analytic, estimate, std error, n, z
    scored = [(row[0], row[5]) for row in rows if row[5] is not None]
    fig = Figure(figsize=(7.0, 0.6 * max(len(scored), 1) + 1.8))
    ax = fig.add_subplot()
    if scored:
        names = [name for name, _ in scored]
        zs = [z for _, z in scored]
        colors = ["#4878a8" if abs(z) <= 4.0 else "#a82818" for z in zs]
        ax.barh(range(len(scored)), zs, color=colors)
        ax.set_yticks(range(len(scored)), labels=names, fontsize=8)
        ax.invert_yaxis()
    for edge in (-4.0, 4.0):
        ax.axvline(edge, color="#606060", ls=":", lw=1.0)
    ax.set_xlabel("z score (acceptance band at +-4)")
    ax.set_title("Monte Carlo verification")
    fig.tight_layout()
    return fig


def _simulate_figure(rows) -> Figure:
    integrals = [row[2] for row in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    bins = max(10, min(80, int(math.sqrt(len(integrals))) or 10))
    ax.hist(integrals, bins=bins, color="#4878a8", density=True)
    ax.set_xlabel("time integral of the count")
    ax.set_ylabel("empirical density")
    ax.set_title("simulated path integrals")
    fig.tight_layout()
    return fig


def _skellam_figure(rows) -> Figure:
    rs = [row[0] for row in rows]
    ps = [row[1] for row in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.bar(rs, ps, color="#4878a8")
    ax.set_xlabel("count difference r")
    ax.set_ylabel("probability")
    ax.set_title("difference-process probabilities")
    fig.tight_layout()
    return fig


_BUILDERS = {
    "pmf": _pmf_figure,
    "bivariate": _bivariate_figure,
    "waiting": _waiting_figure,
    "moments": _moments_figure,
    "verify": _verify_figure,
    "simulate": _simulate_figure,
    "skellam": _skellam_figure,
}


def figure_for_command(command: str, rows) -> Figure:
    """Build the figure matching one command's report rows."""
    return _BUILDERS[command](rows)
