"""Matplotlib report figures written alongside the CSV/JSON outputs.

Kept separate from the SVG frame renderer: SVG frames are exact data
exports, these are human-facing summary plots.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

GOLDEN = (math.sqrt(5) - 1.0) / 2.0


def _plot_chains(ax, chains, color, label, lw=1.6):
    for i, chain in enumerate(chains):
        xs = [p.x for p in chain.points]
        ys = [p.y for p in chain.points]
        ax.plot(xs, ys, "-", color=color, lw=lw, label=label if i == 0 else None)


def save_run_figures(run, out_dir: str | Path) -> list[Path]:
    """Shape overview plus the displacement-decay profile, as PNG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    width = 8.0
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    _plot_chains(ax, run.initial_chains, "0.65", "initial")
    _plot_chains(ax, run.chains, "#1f6feb", "final")
    for gid in run.driven_global_ids():
        p = run._point(gid)
        ax.plot([p.x], [p.y], "o", color="#d1242f", ms=5, zorder=5)
    ax.set_aspect("equal")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    ax.set_title(f"{run.scenario.name}: initial vs settled shape")
    ax.legend(loc="best", frameon=False)
    for spine in ("top", "right"):
        ax.spines[spine].set_visible(False)
    path = out_dir / "shapes.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    episodes = run.episodes
    if episodes:
        from .metrics import decay_profile

        fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
        any_points = False
        for ep in episodes:
            prof = decay_profile(ep.before[ep.chain_index], ep.after[ep.chain_index],
                                 ep.local_point)
            moved = [(d, m) for d, m in zip(prof.distances, prof.displacements) if m > 1e-9]
            if not moved:
                continue
            any_points = True
            ax.semilogy([d for d, _ in moved], [m for _, m in moved], ".-",
                        label=f"move {ep.move_index} (pt {ep.global_point})")
        if any_points:
            ax.set_xlabel("chain distance from stress point (um)")
            ax.set_ylabel("displacement (um)")
            ax.set_title(f"{run.scenario.name}: displacement decay per move")
            ax.legend(loc="best", frameon=False, fontsize=8)
            for spine in ("top", "right"):
                ax.spines[spine].set_visible(False)
            path = out_dir / "decay.png"
            fig.savefig(path, dpi=150, bbox_inches="tight")
            written.append(path)
        plt.close(fig)
    return written


def save_sweep_figure(scenario_name: str, param: str,
                      results: Sequence[tuple[float, object]], out_dir: str | Path) -> Path | None:
    """Overlay of the final shapes across sweep values."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = [(v, r) for v, r in results if not isinstance(r, Exception)]
    if not ok:
        return None
    width = 8.0
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    cmap = plt.get_cmap("viridis")
    for i, (value, run) in enumerate(ok):
        color = cmap(0.15 + 0.7 * i / max(1, len(ok) - 1))
        _plot_chains(ax, run.chains, color, f"{param} = {value:g}")
    ax.set_aspect("equal")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    ax.set_title(f"{scenario_name}: final shapes across {param} sweep")
    ax.legend(loc="best", frameon=False)
    for spine in ("top", "right"):
        ax.spines[spine].set_visible(False)
    path = out_dir / "sweep.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
