"""Optional figure rendering for CLI tables.  Needs matplotlib (``pip install clickhomodyne[plot]``)."""

from __future__ import annotations

import numpy as np

from .io import Table

SWEEP_VARIABLES = ("phi", "phi1", "phi2", "N", "eta", "nu", "nbar", "k", "beta_abs")


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_table(table: Table, path, title: str | None = None):
    """Line plots for 1-D sweeps, bar charts for statistics, color maps for 2-D surfaces."""
    plt = _pyplot()
    keys = [c for c in table.columns if c in SWEEP_VARIABLES]
    values = [c for c in table.columns if c not in SWEEP_VARIABLES]
    n = max(1, len(values))
    fig, axes = plt.subplots(1, n, figsize=(3.6 * n, 3.0), squeeze=False)
    for ax, col in zip(axes[0], values):
        y = table.column(col).astype(float)
        if len(keys) == 2:
            gx, gy = np.unique(table.column(keys[0])), np.unique(table.column(keys[1]))
            img = ax.pcolormesh(gy, gx, y.reshape(gx.size, gy.size), shading="auto", cmap="RdBu_r")
            fig.colorbar(img, ax=ax)
            ax.set_xlabel(keys[1])
            ax.set_ylabel(keys[0])
        elif keys and keys[0] == "k":
            ax.bar(table.column("k"), np.nan_to_num(y), color="0.4")
            ax.set_xlabel("k")
        else:
            x = table.column(keys[0]) if keys else np.arange(y.size)
            ax.plot(x, y, lw=1.2)
            ax.axhline(0.0, color="0.6", lw=0.6)
            ax.set_xlabel(keys[0] if keys else "index")
        ax.set_title(col, fontsize=9)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
