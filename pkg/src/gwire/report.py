"""Figure rendering for CLI reports.

Each CLI command that emits delimited output also renders a small matplotlib
figure next to it.  All figures are written to files; nothing is shown
interactively.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def eigen_scree_figure(values: np.ndarray, path: Path) -> None:
    """Scree plot of the leading eigenvalues of the fitted matrix."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    k = np.arange(1, len(values) + 1)
    ax.plot(k, values, "o-", ms=4)
    ax.set_xlabel("component")
    ax.set_ylabel("eigenvalue")
    ax.set_title("Eigenvalue scree")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def ladle_figure(f: np.ndarray, h: np.ndarray, d_hat: int, path: Path) -> None:
    """Ladle curves f, h, and their sum with the selected dimension marked."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    k = np.arange(len(f))
    ax.plot(k, f, "s--", ms=4, label="eigenvector variability f")
    ax.plot(k, h, "^--", ms=4, label="eigenvalue scree h")
    ax.plot(k, f + h, "o-", ms=4, label="f + h")
    ax.axvline(d_hat, color="gray", lw=0.8)
    ax.set_xlabel("candidate dimension k")
    ax.set_title(f"Ladle plot (selected d = {d_hat})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def simulation_figure(losses_by_method: dict[str, list[float]], path: Path) -> None:
    """Box plot of per-replicate general losses."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = list(losses_by_method)
    data = [losses_by_method[m] for m in names]
    ax.boxplot(data, tick_labels=names)
    ax.set_ylabel("general loss")
    ax.set_title("Per-replicate subspace loss")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def adjacency_figure(omega: np.ndarray, threshold: float, path: Path) -> None:
    """Sparsity pattern of an estimated precision matrix."""
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(np.abs(omega) > threshold, cmap="Greys", interpolation="nearest")
    ax.set_title("Precision sparsity pattern")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
