"""Matplotlib renderings of controls, branch diagrams, populations, heatmaps."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_control", "plot_branches", "plot_populations",
           "plot_umatrix", "plot_montage"]


def plot_control(control, path) -> None:
    s = np.linspace(0.0, 1.0, 1001)
    fig, (ax_a, ax_w) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax_a.plot(s, control.amplitude(s), color="tab:blue")
    for z in control.amplitude.interior_zeros:
        ax_a.axvline(z, color="0.8", lw=0.6)
    ax_a.axhline(0.0, color="0.6", lw=0.6)
    ax_a.set_ylabel("A(s)")
    ax_w.plot(s, control.chirp.omega(s), color="tab:orange")
    ax_w.set_ylabel(r"$\omega(s)$")
    ax_w.set_xlabel("s")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_branches(diagram, path) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    n = diagram.branches.shape[1]
    for k in range(n):
        ax.plot(diagram.grid, diagram.lambda_r[:, k], color="0.75", lw=0.8)
    for k in range(n):
        ax.plot(diagram.grid, diagram.branches[:, k], lw=1.8,
                label=f"branch {k}")
    for s, _rank in diagram.swap_events:
        ax.axvline(s, color="0.85", lw=0.6, zorder=0)
    ax.set_xlabel("s")
    ax.set_ylabel("eigenvalues")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_populations(grid, populations, path, initial_level: int = 0) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    n = populations.shape[1]
    for p in range(n):
        ax.plot(grid, populations[:, p], label=f"level {p}")
    ax.set_xlabel("s")
    ax.set_ylabel(f"population from level {initial_level}")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_umatrix(u, path, title: str | None = None) -> None:
    values = np.abs(np.asarray(u)) ** 2
    fig, ax = plt.subplots(figsize=(3.6, 3.4))
    ax.imshow(values, cmap="gray_r", vmin=0.0, vmax=1.0)
    n = values.shape[0]
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.set_xlabel("initial level k")
    ax.set_ylabel("final level p")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_montage(labeled_values, path, columns: int = 6) -> None:
    """Grid of |U|^2 heatmaps; ``labeled_values`` is a list of (label, matrix)."""
    count = len(labeled_values)
    rows = (count + columns - 1) // columns
    fig, axes = plt.subplots(rows, columns,
                             figsize=(1.7 * columns, 1.9 * rows))
    axes = np.atleast_2d(axes)
    for i, (label, values) in enumerate(labeled_values):
        ax = axes[i // columns, i % columns]
        ax.imshow(np.asarray(values), cmap="gray_r", vmin=0.0, vmax=1.0)
        ax.set_title(label, fontsize=7)
        ax.set_xticks([])
        ax.set_yticks([])
    for j in range(count, rows * columns):
        axes[j // columns, j % columns].axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
