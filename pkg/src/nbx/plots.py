"""Figure rendering for the report paths (saved next to the CSV outputs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_sweep_figure(reports, path):
    """Distances against basis size on log-log axes."""
    ns = [r.n for r in reports]
    d2 = [r.l2_distance for r in reports]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.loglog(ns, d2, "o-", label="least-squares distance")
    if any(r.delta_distance is not None for r in reports):
        dd = [r.delta_distance for r in reports if r.delta_distance is not None]
        nd = [r.n for r in reports if r.delta_distance is not None]
        label = f"weighted sup-norm distance ({reports[0].weight})"
        ax.loglog(nd, dd, "s--", label=label)
    ax.set_xlabel("basis size n")
    ax.set_ylabel("distance")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_gram_figure(matrix, path):
    """Magnitude heatmap of the pairing matrix."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    if matrix.size:
        im = ax.imshow(np.log10(np.abs(matrix) + 1e-300), origin="lower",
                       cmap="viridis")
        fig.colorbar(im, ax=ax, label="log10 |entry|")
    ax.set_xlabel("k")
    ax.set_ylabel("j")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_profile_figure(profile, path):
    """Rearrangement and maximal average of a profile."""
    s = profile.s_hi
    stride = max(1, len(s) // 2000)
    s = s[::stride]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(s, profile.fstar_at(s), label="decreasing rearrangement")
    ax.plot(s, profile.double_star(np.maximum(s, 1e-12)), "--",
            label="maximal average")
    ax.set_xlabel("s")
    ax.set_ylabel("value")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
