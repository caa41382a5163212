"""Bundled synthetic datasets shaped like the case studies.

``influence()``: 226 nodes with 168 binary attributes and 281 directed
edges, three latent groups, no cluster column (clustering is the user's
job). ``citation()``: 395 nodes, 100 binary keyword attributes, 989 directed
edges, five clusters given in the file, with two overlapping groups and
edges biased within clusters. Both are deterministic.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .dataset import Edge, Graph, NodeTable


def _binary_table(rng: np.random.Generator, sizes: list[int], p: int,
                  block_width: int, p_in: float, p_out: float,
                  p_background: float) -> np.ndarray:
    n = sum(sizes)
    groups = np.repeat(np.arange(len(sizes)), sizes)
    raw = (rng.random((n, p)) < p_background).astype(float)
    for g in range(len(sizes)):
        cols = slice(g * block_width, (g + 1) * block_width)
        inside = groups == g
        raw[inside, cols] = (rng.random((int(inside.sum()), block_width)) < p_in).astype(float)
        raw[~inside, cols] = (rng.random((int((~inside).sum()), block_width)) < p_out).astype(float)
    return raw


def _group_edges(rng: np.random.Generator, groups: np.ndarray, count: int,
                 intra_fraction: float) -> list[tuple[int, int]]:
    n = len(groups)
    members: dict[int, np.ndarray] = {g: np.flatnonzero(groups == g)
                                      for g in np.unique(groups)}
    edges: set[tuple[int, int]] = set()
    while len(edges) < count:
        if rng.random() < intra_fraction:
            g = int(rng.integers(len(members)))
            pool = members[g]
            i, j = rng.choice(pool, size=2, replace=False)
        else:
            i, j = rng.choice(n, size=2, replace=False)
        if i != j:
            edges.add((int(i), int(j)))
    ordered = sorted(edges)
    rng.shuffle(ordered)
    return ordered[:count]


def influence(seed: int = 7) -> tuple[NodeTable, Graph]:
    """226 nodes x 168 binary attributes, 281 directed edges, no cluster column."""
    rng = np.random.default_rng(seed)
    sizes = [76, 75, 75]
    p = 168
    raw = _binary_table(rng, sizes, p, block_width=40,
                        p_in=0.55, p_out=0.04, p_background=0.08)
    groups = np.repeat(np.arange(3), sizes)
    ids = tuple(f"artist{i:03d}" for i in range(sum(sizes)))
    names = tuple(f"attr{j:03d}" for j in range(p))
    table = NodeTable(ids=ids, labels=ids, clusters=None,
                      attribute_names=names, raw=raw)
    pairs = _group_edges(rng, groups, 281, intra_fraction=0.8)
    edges = tuple(Edge(ids[i], ids[j]) for i, j in pairs)
    return table, Graph(nodes=ids, edges=edges)


def citation(seed: int = 11) -> tuple[NodeTable, Graph]:
    """395 nodes x 100 binary keyword attributes, 989 edges, 5 file clusters.

    Two of the clusters share part of their keyword block, so attributes
    alone leave their layouts overlapping; edges are mostly intra-cluster,
    which is what makes adjacency augmentation tighten the clusters.
    """
    rng = np.random.default_rng(seed)
    sizes = [100, 90, 80, 70, 55]
    n = sum(sizes)
    p = 100
    groups = np.repeat(np.arange(5), sizes)
    raw = (rng.random((n, p)) < 0.04).astype(float)
    block = 14  # per-cluster keyword block; the rest is shared/noise
    for g in range(5):
        cols = slice(g * block, (g + 1) * block)
        inside = groups == g
        raw[inside, cols] = (rng.random((int(inside.sum()), block)) < 0.45).astype(float)
    # overlap: clusters 0 and 1 share a band of keywords
    shared = slice(5 * block, 5 * block + 12)
    overlap = (groups == 0) | (groups == 1)
    raw[overlap, shared] = (rng.random((int(overlap.sum()), 12)) < 0.35).astype(float)

    ids = tuple(f"paper{i:03d}" for i in range(n))
    names = tuple(f"kw{j:03d}" for j in range(p))
    labels = tuple(f"topic{groups[i]}" for i in range(n))
    table = NodeTable(ids=ids, labels=ids, clusters=labels,
                      attribute_names=names, raw=raw)
    pairs = _group_edges(rng, groups, 989, intra_fraction=0.85)
    edges = tuple(Edge(ids[i], ids[j]) for i, j in pairs)
    return table, Graph(nodes=ids, edges=edges)


def write_csv(table: NodeTable, graph: Graph, nodes_path: str | Path,
              edges_path: str | Path | None = None) -> None:
    """Write a dataset back out in the importable CSV forms."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["id"] + (["cluster"] if table.clusters is not None else []) \
        + list(table.attribute_names)
    writer.writerow(header)
    for i, node in enumerate(table.ids):
        row = [node]
        if table.clusters is not None:
            row.append(table.clusters[i])
        row += [_num(v) for v in table.raw[i]]
        writer.writerow(row)
    Path(nodes_path).write_text(buf.getvalue(), encoding="utf-8")

    if edges_path is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source", "target", "weight"])
        for e in graph.edges:
            writer.writerow([e.source, e.target, _num(e.weight)])
        Path(edges_path).write_text(buf.getvalue(), encoding="utf-8")


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


BUILTIN = {"influence": influence, "citation": citation}
