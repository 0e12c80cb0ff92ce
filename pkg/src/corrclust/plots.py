"""Static SVG figures rendered next to the tabular outputs.

These are presentation aids only; every quantitative result lives in the
CSV files.  A fixed hash salt and stripped date metadata keep the SVGs
stable across runs.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib import rcParams

from .hcluster import Dendrogram
from .mds import Embedding

rcParams["svg.hashsalt"] = "corrclust"

_CYCLE = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def _color_map(labels: list[str]) -> dict[str, str]:
    uniq = sorted(set(labels))
    return {lab: _CYCLE[i % len(_CYCLE)] for i, lab in enumerate(uniq)}


def _save(fig, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def embedding_scatter(emb: Embedding, labels: dict[str, str], path, title: str = "") -> None:
    """Scatter of the 2-D embedding, one color per label."""
    label_of = [labels.get(c, "?") for c in emb.companies]
    colors = _color_map(label_of)
    fig, ax = plt.subplots(figsize=(7, 6))
    for lab in sorted(colors):
        idx = [i for i, l in enumerate(label_of) if l == lab]
        ax.scatter(
            emb.points[idx, 0], emb.points[idx, 1],
            s=28, color=colors[lab], label=lab, alpha=0.85, edgecolors="none",
        )
    ax.set_xlabel("dimension 1")
    ax.set_ylabel("dimension 2")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="best", frameon=False)
    fig.tight_layout()
    _save(fig, path)


def dendrogram_figure(d: Dendrogram, labels: dict[str, str], path, title: str = "") -> None:
    """Merge tree drawn with leaf ticks colored by label."""
    n = d.n
    order: list[int] = []

    def walk(v: int) -> None:
        if v < n:
            order.append(v)
            return
        m = d.merges[v - n]
        walk(m.left)
        walk(m.right)

    walk(2 * n - 2)
    xpos = {leaf: k for k, leaf in enumerate(order)}
    height = {v: 0.0 for v in range(n)}
    fig, ax = plt.subplots(figsize=(max(6.0, n * 0.14), 4.5))
    for k, m in enumerate(d.merges):
        node = n + k
        xl, xr = xpos[m.left], xpos[m.right]
        hl, hr = height[m.left], height[m.right]
        ax.plot([xl, xl, xr, xr], [hl, m.height, m.height, hr], lw=0.8, color="0.3")
        xpos[node] = (xl + xr) / 2
        height[node] = m.height
    label_of = [labels.get(d.leaves[v], "?") for v in order]
    colors = _color_map(label_of)
    for k, v in enumerate(order):
        ax.plot(k, 0, marker="s", ms=4, color=colors[label_of[k]])
    handles = [
        plt.Line2D([], [], marker="s", ls="", color=colors[lab], label=lab)
        for lab in sorted(colors)
    ]
    ax.legend(handles=handles, fontsize=7, loc="upper right", frameon=False)
    ax.set_xticks([])
    ax.set_ylabel("linkage distance")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def purity_series_figure(
    rows: list[tuple[dt.date, str, float]], path, title: str = ""
) -> None:
    """One line per label over time from (date, label, purity) rows."""
    by_label: dict[str, tuple[list[dt.date], list[float]]] = {}
    for day, label, value in rows:
        xs, ys = by_label.setdefault(label, ([], []))
        xs.append(day)
        ys.append(value)
    colors = _color_map(list(by_label))
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for label in sorted(by_label):
        xs, ys = by_label[label]
        ax.plot(xs, ys, lw=1.1, label=label, color=colors[label])
    ax.set_ylabel("purity")
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, ncol=2, frameon=False)
    fig.autofmt_xdate()
    fig.tight_layout()
    _save(fig, path)
