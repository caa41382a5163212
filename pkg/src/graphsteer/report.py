"""Matplotlib rendering of layout snapshots for CLI report output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import palettes
from .geometry import EdgeFilter, Snapshot, apply_edge_filter, edge_paths
from .projection import Layout

_MARKERS = {"circle": "o", "square": "s", "triangle": "^"}


def _quad_points(points: tuple[tuple[float, float], ...], samples: int = 24) -> np.ndarray:
    a, c, b = (np.asarray(p) for p in points)
    t = np.linspace(0.0, 1.0, samples)[:, None]
    return (1 - t) ** 2 * a + 2 * t * (1 - t) * c + t ** 2 * b


def render_layout_png(snapshot: Snapshot, path: str | Path,
                      edge_kind: str = "straight",
                      edge_filter: EdgeFilter | None = None,
                      offset_spacing: float | None = None,
                      dpi: int = 150) -> None:
    """Write a scatter figure of the layout with its edges to ``path``."""
    layout = Layout(snapshot.positions, snapshot.residual)
    extent = 2.0 * layout.half_extent()
    spacing = offset_spacing if offset_spacing is not None else max(extent, 1e-9) * 0.01
    paths = edge_paths(layout, snapshot.graph, edge_kind, snapshot.clustering, spacing)
    if edge_filter is not None:
        paths = apply_edge_filter(paths, snapshot.graph, edge_filter)

    fig, ax = plt.subplots(figsize=(8, 6))
    for p in paths:
        pts = (np.asarray(p.points) if len(p.points) == 2
               else _quad_points(p.points))
        ax.plot(pts[:, 0], pts[:, 1], color=palettes.NEUTRAL_EDGE,
                alpha=max(p.opacity * 0.6, 0.02), linewidth=0.7, zorder=1)

    positions = snapshot.positions
    if snapshot.clustering is not None:
        scheme = snapshot.clustering.color_scheme_index
        index = {c: i for i, c in enumerate(snapshot.clustering.cluster_ids)}
        for label in snapshot.clustering.cluster_ids:
            rows = [i for i, node in enumerate(snapshot.node_ids)
                    if snapshot.clustering.label_of(node) == label]
            ci = index[label]
            ax.scatter(positions[rows, 0], positions[rows, 1], s=18,
                       c=palettes.cluster_color(ci, scheme),
                       marker=_MARKERS[palettes.cluster_shape(ci)],
                       edgecolors="#333333", linewidths=0.3,
                       label=label, zorder=2)
        ax.legend(loc="upper right", fontsize=8, framealpha=0.9)
    else:
        ax.scatter(positions[:, 0], positions[:, 1], s=18, c="#4477aa",
                   edgecolors="#333333", linewidths=0.3, zorder=2)

    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"{len(snapshot.node_ids)} nodes, "
                 f"{len(snapshot.graph.edges)} edges, "
                 f"residual {snapshot.residual:.4g}", fontsize=10)
    ax.tick_params(labelsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
