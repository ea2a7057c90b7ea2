"""Figure rendering for scan outputs.

Each report figure mirrors the delimited output written next to it: the
risk functional as a line against the candidate grid on the left axis, and
the fixed portfolio's nominals as bars against the right axis.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_LINE = "#1f77b4"
_BAR = "#999999"


def render_scan_figure(
    labels: np.ndarray,
    means: np.ndarray,
    bar_labels: np.ndarray,
    bar_values: np.ndarray,
    xlabel: str,
    path: str,
    bar_ylabel: str = "nominal",
) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax2 = ax.twinx()
    width = 0.25 * (labels[-1] - labels[0]) / max(len(bar_labels), 1) + 0.02 * (labels[-1] - labels[0])
    ax2.bar(bar_labels, bar_values, width=width, color=_BAR, alpha=0.6, zorder=1)
    ax.plot(labels, means, color=_LINE, lw=1.6, zorder=2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("risk functional")
    ax2.set_ylabel(bar_ylabel)
    ax.set_zorder(ax2.get_zorder() + 1)
    ax.patch.set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=144)
    plt.close(fig)


def render_ladder_figure(steps: np.ndarray, means: np.ndarray, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(steps, means, "o-", color=_LINE)
    ax.set_xlabel("rebalance steps")
    ax.set_ylabel("hedging risk")
    fig.tight_layout()
    fig.savefig(path, dpi=144)
    plt.close(fig)


def render_basis_figure(basis: np.ndarray, beta: np.ndarray, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.bar(basis, beta, width=0.25, color=_LINE)
    ax.set_xlabel("basis maturity")
    ax.set_ylabel("optimal weight")
    fig.tight_layout()
    fig.savefig(path, dpi=144)
    plt.close(fig)
