"""Figure rendering for report output directories (Agg backend, PNG files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_betti_curves(bc, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    v = np.arange(bc.n_edges + 1)
    for k in range(bc.k_max + 1):
        ax.step(v, bc.curves[k], where="post", label=f"$\\beta_{{{k}}}$")
    ax.set_xlabel("edges added $v$")
    ax.set_ylabel("Betti number")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_histogram(h, path, title: str | None = None, xlabel: str = "value") -> None:
    labeled = sorted(label for label in h.counts if label is not None)
    labels = [str(x) for x in labeled] + (["NONE"] if None in h.counts else [])
    counts = [h.counts[x] for x in labeled] + ([h.counts[None]] if None in h.counts else [])
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(range(len(labels)), counts, color="steelblue")
    ax.set_xticks(range(len(labels)), labels, rotation=45 if len(labels) > 12 else 0, fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_entropy_series(series: dict, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for cat, (ts, hs) in sorted(series.items()):
        ax.plot(ts, hs, marker="o", markersize=3, label=f"cat {cat}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("filter entropy (bits)")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=7, ncols=2)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_cd_heatmap(labels, values, path) -> None:
    values = np.asarray(values)
    fig, ax = plt.subplots(figsize=(4.4, 4))
    im = ax.imshow(values, cmap="viridis", vmin=0.0, vmax=max(1e-9, values.max()))
    ax.set_xticks(range(len(labels)), labels, fontsize=8)
    ax.set_yticks(range(len(labels)), labels, fontsize=8)
    fig.colorbar(im, ax=ax, shrink=0.85, label="category distance")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_degree_bars(labels, degrees, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(range(len(labels)), degrees, color="darkorange")
    ax.set_xticks(range(len(labels)), labels, fontsize=8)
    ax.set_xlabel("category")
    ax.set_ylabel("distinguishable degree")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_score_bars(scores: dict, path) -> None:
    fids = sorted(scores, key=lambda f: (scores[f], f))
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(range(len(fids)), [scores[f] for f in fids], color="seagreen")
    ax.set_xticks(range(len(fids)), fids, rotation=45 if len(fids) > 8 else 0, fontsize=8)
    ax.set_xlabel("filter (most effective first)")
    ax.set_ylabel("ensemble score")
    ax.axhline(0.0, color="black", linewidth=0.8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)

