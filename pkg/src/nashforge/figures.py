"""File-only matplotlib renderers for the CLI report paths.

matplotlib is imported lazily so the plain (non --plot) command paths never
pay for it; everything renders through the Agg backend straight to disk.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_kernel_family(kernels: Sequence, path) -> None:
    """Kernel curves against the two envelopes s and sqrt(s) on [0, 1]."""
    from nashforge.smoothing import collar_eval

    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = np.linspace(0.0, 1.0, 512)
    ax.plot(xs, xs, "k--", lw=0.8, label="s")
    ax.plot(xs, np.sqrt(xs), "k:", lw=0.8, label="sqrt(s)")
    for kern in kernels:
        ys = [collar_eval(kern, float(x)) for x in xs]
        ax.plot(xs, ys, lw=1.4, label=f"a={kern.a}, k={kern.k}")
        ax.axvline(float(kern.a), color="gray", lw=0.5, alpha=0.4)
    ax.set_xlabel("s")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fold(fold, path, lo: float = -1.0, hi: float = 2.0) -> None:
    """1D fold curve with the clamp target max(x, 0) for reference."""
    from nashforge.smoothing import fold1d

    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = np.linspace(lo, hi, 600)
    ax.plot(xs, [fold1d(fold, float(x)) for x in xs], lw=1.4, label="fold")
    ax.plot(xs, np.maximum(xs, 0.0), "k--", lw=0.8, label="clamp")
    a = float(fold.kernel.a)
    ax.axvspan(0.0, a, color="tab:orange", alpha=0.12, label="collar")
    ax.set_xlabel("x")
    ax.set_ylabel("fold(x)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_genus_grid(table, path) -> None:
    """Heatmap of the genus grid; infeasible cells stay blank."""
    plt = _plt()
    rows = len(table.n_values)
    cols = len(table.s_values)
    data = np.full((rows, cols), np.nan)
    for i, n in enumerate(table.n_values):
        for j, s in enumerate(table.s_values):
            g = table.cell(n, s)
            if g is not None:
                data[i, j] = g
    fig, ax = plt.subplots(figsize=(1.0 + 0.8 * cols, 1.0 + 0.6 * rows))
    masked = np.ma.masked_invalid(data)
    im = ax.imshow(masked, cmap="viridis", aspect="auto")
    ax.set_xticks(range(cols), [str(s) for s in table.s_values])
    ax.set_yticks(range(rows), [str(n) for n in table.n_values])
    ax.set_xlabel("s")
    ax.set_ylabel("n")
    for i in range(rows):
        for j in range(cols):
            if not math.isnan(data[i, j]):
                ax.text(j, i, str(int(data[i, j])), ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax, label="genus")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_mesh(mesh, path, projection: str = "first3") -> None:
    """3D trisurf of the projected surface mesh."""
    from nashforge.mesh import _project

    plt = _plt()
    pts = _project(mesh, projection)
    fig = plt.figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(projection="3d")
    ax.plot_trisurf(
        pts[:, 0],
        pts[:, 1],
        pts[:, 2],
        triangles=[list(f) for f in mesh.faces],
        cmap="viridis",
        linewidth=0.1,
        edgecolor="gray",
        alpha=0.9,
    )
    ax.set_title(f"n={mesh.n}, s={mesh.s}, resolution={mesh.resolution}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
