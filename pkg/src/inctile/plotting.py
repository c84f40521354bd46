"""Matplotlib figures for the ``table`` report."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def grid_array(rows: list[dict], key: str, n: int) -> np.ndarray:
    a = np.full((n, n), np.nan)
    for r in rows:
        if r.get(key) is not None:
            a[r["w_y"] - 1, r["w_x"] - 1] = r[key]
    return a


def plot_grid(rows: list[dict], key: str, n: int, path, title: str = "") -> Path:
    """Heat map of ``key`` over board sizes, annotated with the values."""
    a = grid_array(rows, key, n)
    fig, ax = plt.subplots(figsize=(1 + 0.6 * n, 0.8 + 0.6 * n))
    im = ax.imshow(a, origin="lower", cmap="viridis")
    for (i, j), v in np.ndenumerate(a):
        if not np.isnan(v):
            ax.text(j, i, f"{v:g}", ha="center", va="center", fontsize=7, color="w")
    ax.set_xticks(range(n), [str(k + 1) for k in range(n)])
    ax.set_yticks(range(n), [str(k + 1) for k in range(n)])
    ax.set_xlabel("w_x")
    ax.set_ylabel("w_y")
    ax.set_title(title or key)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_diagonal(rows: list[dict], keys: list[str], path, title: str = "") -> Path:
    """Square boards only: one line per metric."""
    sq = sorted((r for r in rows if r["w_x"] == r["w_y"]), key=lambda r: r["w_x"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for k in keys:
        ax.plot([r["w_x"] for r in sq], [r[k] for r in sq], marker="o", label=k)
    ax.set_xlabel("board size n (n x n)")
    ax.set_ylabel("LUTs")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
