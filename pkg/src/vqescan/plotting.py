"""Figure rendering for scan and optimization reports.

Figures are written straight to files next to the delimited output; no
interactive backend is ever required.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .constants import HARTREE_TO_KJMOL
from .pathfinder import ReactionPath


def render_path_figure(path: ReactionPath, out_path, title: str = "") -> None:
    """Reaction profile: absolute energy and barrier-relative kJ/mol scale."""
    coords = path.coordinates
    energies = path.energies
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(coords, energies, "o-", color="tab:blue", markersize=4)
    ax.set_xlabel("torsion angle (degrees)")
    ax.set_ylabel("energy (Hartree)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if len(energies) > 1:
        rel = ax.secondary_yaxis(
            "right",
            functions=(lambda e: (e - energies.min()) * HARTREE_TO_KJMOL,
                       lambda r: r / HARTREE_TO_KJMOL + energies.min()))
        rel.set_ylabel("relative energy (kJ/mol)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_trace_figure(trace, out_path, title: str = "") -> None:
    """Optimizer convergence: accepted energy per recorded step."""
    energies = [e for _, e in trace]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(range(len(energies)), energies, "o-", color="tab:orange", markersize=4)
    ax.set_xlabel("accepted step")
    ax.set_ylabel("energy (Hartree)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
