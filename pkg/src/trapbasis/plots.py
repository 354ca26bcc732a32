"""Figure rendering for CLI reports.

Each function writes one PNG next to the delimited output it illustrates.
Rendering uses the Agg backend and stays intentionally plain; the data
files remain the primary artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 130


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def profile_figure(path, ys, fvals, overlays=None, title="profile"):
    """Profile curve, optionally overlaid with step approximations."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(ys, fvals, lw=1.6, label="f")
    for label, vals in overlays or []:
        ax.step(ys, vals, where="post", lw=0.9, alpha=0.8, label=label)
    ax.set_xlabel("y")
    ax.set_ylabel("f(y)")
    ax.set_title(title)
    if overlays:
        ax.legend(fontsize=8)
    _save(fig, path)


def deviation_figure(path, ns, eps, thresholds, title="per-column deviations"):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.semilogy(ns, eps, "o", ms=4, label="deviation")
    ax.semilogy(ns, thresholds, "k--", lw=1, label="1/(4|n|)")
    ax.set_xlabel("n")
    ax.set_ylabel("sup |f/g - 1|")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def gram_figure(path, matrix, title="Gram magnitude"):
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    im = ax.imshow(np.abs(matrix), cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_title(title)
    _save(fig, path)


def eigen_sweep_figure(path, truncations, mins, maxs, title="extremal eigenvalues"):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(truncations, mins, "o-", label="eigen min")
    ax.plot(truncations, maxs, "s-", label="eigen max")
    ax.set_xlabel("truncation window")
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def residual_figure(path, truncations, residuals, title="reconstruction residual"):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.semilogy(truncations, residuals, "o-")
    ax.set_xlabel("truncation window")
    ax.set_ylabel("relative residual")
    ax.set_title(title)
    _save(fig, path)


def ratio_figure(path, ratios, tight, title="frame ratios"):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(range(1, len(ratios) + 1), ratios, "o", ms=4, label="observed ratio")
    ax.axhline(tight, color="k", ls="--", lw=1, label="tight constant")
    ax.set_xlabel("trial")
    ax.set_ylabel("ratio")
    ax.set_ylim(bottom=0)
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def selection_figure(path, interval, indices, frequencies, title="selected frequencies"):
    fig, ax = plt.subplots(figsize=(6, 2.8))
    for a, b in interval.segments:
        ax.axvspan(a, b, color="0.88")
    ax.plot(frequencies, np.zeros(len(frequencies)), "|", ms=18, mew=1.4)
    ax.set_yticks([])
    ax.set_xlabel("x (shaded: interval), ticks: selected frequencies")
    ax.set_title(title)
    _save(fig, path)
