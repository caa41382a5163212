"""Edge geometry, filtering, viewport transform, and layout export.

Everything between node positions and pixels, computed headlessly: straight
and curved edge paths (clockwise traversal encodes direction on curves),
centroid-grouped inter-cluster bundles whose width grows with edge count,
opacity filtering, and the JSON/SVG exports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import palettes
from .dataset import Clustering, DatasetError, Edge, Graph, clustering_from_labels, degrees
from .projection import Layout, ProjectionMatrix

CURVE_BULGE = 0.15  # fraction of segment length for the quadratic control offset

LAYOUT_SCHEMA = "graphsteer-layout/1"


class GeometryError(ValueError):
    """Raised on invalid geometry inputs."""


@dataclass(frozen=True)
class EdgePath:
    """Renderable path for one edge: 2 control points for straight segments,
    3 for quadratics. ``bundle`` carries the cluster pair and rank for
    grouped inter-cluster edges."""

    source: str
    target: str
    kind: str  # straight | curved | grouped
    points: tuple[tuple[float, float], ...]
    weight: float = 1.0
    opacity: float = 1.0
    color_mode: str = "neutral"  # neutral | source
    bundle: tuple[str, str] | None = None
    bundle_rank: int = 0
    bundle_size: int = 0

    def __post_init__(self) -> None:
        if not all(np.isfinite(c) for pt in self.points for c in pt):
            raise GeometryError("non-finite control point")
        if not 0.0 <= self.opacity <= 1.0:
            raise GeometryError("opacity must be in [0, 1]")


@dataclass(frozen=True)
class ViewTransform:
    """Pan/zoom applied at render time only; data positions never change."""

    pan: tuple[float, float] = (0.0, 0.0)
    zoom: float = 1.0

    def __post_init__(self) -> None:
        if self.zoom <= 0:
            raise GeometryError("zoom must be positive")

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) * self.zoom + np.asarray(self.pan)

    def invert(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - np.asarray(self.pan)) / self.zoom


@dataclass(frozen=True)
class EdgeFilter:
    selection: frozenset[str] | None = None
    unselected_opacity: float = 0.15
    hide_unconnected: bool = False
    direction: str = "all"  # all | incoming | outgoing
    min_weight: float | None = None
    max_weight: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.unselected_opacity <= 1.0:
            raise GeometryError("unselected_opacity must be in [0, 1]")
        if self.direction not in ("all", "incoming", "outgoing"):
            raise GeometryError(f"unknown direction mode {self.direction!r}")
        if (self.min_weight is not None and self.max_weight is not None
                and self.min_weight > self.max_weight):
            raise GeometryError("min_weight exceeds max_weight")


def _left_normal(vec: np.ndarray) -> np.ndarray:
    """Unit normal to the left of the travel direction."""
    length = float(np.hypot(vec[0], vec[1]))
    if length == 0:
        return np.array([0.0, 1.0])
    return np.array([-vec[1], vec[0]]) / length


def _straight(a: np.ndarray, b: np.ndarray) -> tuple[tuple[float, float], ...]:
    return (tuple(a), tuple(b))


def _curved(a: np.ndarray, b: np.ndarray) -> tuple[tuple[float, float], ...]:
    seg = b - a
    mid = (a + b) / 2.0
    ctrl = mid + _left_normal(seg) * CURVE_BULGE * float(np.hypot(seg[0], seg[1]))
    return (tuple(a), tuple(ctrl), tuple(b))


def cluster_centroids(layout: Layout, clustering: Clustering,
                      node_ids: Sequence[str]) -> dict[str, tuple[float, float]]:
    """Arithmetic mean of member positions per cluster."""
    sums: dict[str, np.ndarray] = {c: np.zeros(2) for c in clustering.cluster_ids}
    counts: dict[str, int] = {c: 0 for c in clustering.cluster_ids}
    for i, node in enumerate(node_ids):
        label = clustering.label_of(node)
        sums[label] += layout.positions[i]
        counts[label] += 1
    out: dict[str, tuple[float, float]] = {}
    for label in clustering.cluster_ids:
        if counts[label] == 0:
            continue
        c = sums[label] / counts[label]
        out[label] = (float(c[0]), float(c[1]))
    return out


def bundle_thickness(count: int, offset_spacing: float) -> float:
    """Nominal visual thickness of a grouped bundle: count x spacing."""
    return count * offset_spacing


def edge_paths(layout: Layout, graph: Graph, kind: str = "straight",
               clustering: Clustering | None = None,
               offset_spacing: float = 1.0,
               color_mode: str = "neutral") -> list[EdgePath]:
    """Build renderable paths for every edge.

    straight: two-point segment source -> target.
    curved:   quadratic whose control point sits perpendicular-left of the
              travel direction at 0.15 x segment length, so following the
              curve clockwise gives the edge direction.
    grouped:  intra-cluster edges as curved; inter-cluster edges become
              quadratics between the two cluster centroids, each endpoint
              offset along the perpendicular by
              (rank - (count - 1) / 2) * offset_spacing within its bundle so
              the bundle reads as one thick line. Ranks order by
              (source id, target id).
    """
    if kind not in ("straight", "curved", "grouped"):
        raise GeometryError(f"unknown edge kind {kind!r}")
    if kind == "grouped" and clustering is None:
        raise GeometryError("grouped edges require a clustering")
    if offset_spacing <= 0:
        raise GeometryError("offset_spacing must be positive")
    row_of = {node: i for i, node in enumerate(graph.nodes)}
    pos = layout.positions
    if pos.shape[0] != len(graph.nodes):
        raise GeometryError("layout rows do not match graph nodes")

    if kind in ("straight", "curved"):
        build = _straight if kind == "straight" else _curved
        return [EdgePath(e.source, e.target, kind,
                         build(pos[row_of[e.source]], pos[row_of[e.target]]),
                         weight=e.weight, color_mode=color_mode)
                for e in graph.edges]

    assert clustering is not None
    centroids = cluster_centroids(layout, clustering, graph.nodes)
    bundles: dict[tuple[str, str], list[tuple[int, Edge]]] = {}
    paths: dict[int, EdgePath] = {}
    for idx, e in enumerate(graph.edges):
        c_src = clustering.label_of(e.source)
        c_dst = clustering.label_of(e.target)
        if c_src == c_dst:
            paths[idx] = EdgePath(e.source, e.target, "curved",
                                  _curved(pos[row_of[e.source]], pos[row_of[e.target]]),
                                  weight=e.weight, color_mode=color_mode)
        else:
            bundles.setdefault((c_src, c_dst), []).append((idx, e))

    for (c_src, c_dst), members in bundles.items():
        members.sort(key=lambda ie: (ie[1].source, ie[1].target, ie[0]))
        count = len(members)
        a = np.asarray(centroids[c_src])
        b = np.asarray(centroids[c_dst])
        normal = _left_normal(b - a)
        for rank, (idx, e) in enumerate(members):
            shift = (rank - (count - 1) / 2.0) * offset_spacing
            start = a + shift * normal
            end = b + shift * normal
            ctrl = (start + end) / 2.0
            paths[idx] = EdgePath(
                e.source, e.target, "grouped",
                (tuple(start), tuple(ctrl), tuple(end)),
                weight=e.weight, color_mode=color_mode,
                bundle=(c_src, c_dst), bundle_rank=rank, bundle_size=count)
    return [paths[i] for i in range(len(graph.edges))]


def apply_edge_filter(paths: Iterable[EdgePath], graph: Graph,
                      flt: EdgeFilter) -> list[EdgePath]:
    """Apply weight bounds, selection-driven opacity, and visibility rules.

    Never changes geometry: edges incident to the selection (respecting the
    direction mode) keep opacity 1, the rest are dimmed to
    ``unselected_opacity`` or dropped when ``hide_unconnected``.
    """
    out: list[EdgePath] = []
    selection = flt.selection
    for path in paths:
        if flt.min_weight is not None and path.weight < flt.min_weight:
            continue
        if flt.max_weight is not None and path.weight > flt.max_weight:
            continue
        if selection:
            if flt.direction == "outgoing":
                connected = path.source in selection
            elif flt.direction == "incoming":
                connected = path.target in selection
            else:
                connected = path.source in selection or path.target in selection
            if connected:
                out.append(_with_opacity(path, 1.0))
            elif not flt.hide_unconnected:
                out.append(_with_opacity(path, flt.unselected_opacity))
        else:
            out.append(_with_opacity(path, 1.0))
    return out


def _with_opacity(path: EdgePath, opacity: float) -> EdgePath:
    if path.opacity == opacity:
        return path
    return EdgePath(path.source, path.target, path.kind, path.points,
                    path.weight, opacity, path.color_mode,
                    path.bundle, path.bundle_rank, path.bundle_size)


# ---------------------------------------------------------------------------
# Export


@dataclass(frozen=True)
class Snapshot:
    """Everything needed to reload or render the current view."""

    node_ids: tuple[str, ...]
    positions: np.ndarray
    residual: float
    weights: np.ndarray
    attribute_names: tuple[str, ...]
    included_mask: np.ndarray
    graph: Graph
    clustering: Clustering | None = None
    attribute_values: np.ndarray | None = None  # for attribute coloring/sizing


def export_layout(snapshot: Snapshot) -> dict:
    """Structured document carrying ids, positions, clusters, P, mask, residual, edges."""
    doc = {
        "schema": LAYOUT_SCHEMA,
        "node_ids": list(snapshot.node_ids),
        "positions": [[float(x), float(y)] for x, y in snapshot.positions],
        "residual": float(snapshot.residual),
        "projection": [[float(a), float(b)] for a, b in snapshot.weights],
        "attribute_names": list(snapshot.attribute_names),
        "included_mask": [bool(m) for m in snapshot.included_mask],
        "edges": [[e.source, e.target, float(e.weight)] for e in snapshot.graph.edges],
        "directed": snapshot.graph.directed,
        "clusters": None,
    }
    if snapshot.clustering is not None:
        doc["clusters"] = {
            "cluster_ids": list(snapshot.clustering.cluster_ids),
            "assignment": [snapshot.clustering.assignment[n] for n in snapshot.node_ids],
            "color_scheme_index": snapshot.clustering.color_scheme_index,
        }
    return doc


def import_layout(doc: dict) -> Snapshot:
    """Inverse of export_layout."""
    if doc.get("schema") != LAYOUT_SCHEMA:
        raise GeometryError(f"unsupported layout schema {doc.get('schema')!r}")
    node_ids = tuple(doc["node_ids"])
    clustering = None
    if doc.get("clusters"):
        c = doc["clusters"]
        clustering = clustering_from_labels(node_ids, c["assignment"],
                                            c.get("color_scheme_index", 0))
        if tuple(c["cluster_ids"]) != clustering.cluster_ids:
            clustering = Clustering(tuple(c["cluster_ids"]),
                                    dict(zip(node_ids, c["assignment"])),
                                    c.get("color_scheme_index", 0))
    graph = Graph(nodes=node_ids,
                  edges=tuple(Edge(s, t, float(w)) for s, t, w in doc["edges"]),
                  directed=bool(doc.get("directed", True)))
    return Snapshot(
        node_ids=node_ids,
        positions=np.asarray(doc["positions"], dtype=float).reshape(len(node_ids), 2),
        residual=float(doc["residual"]),
        weights=np.asarray(doc["projection"], dtype=float),
        attribute_names=tuple(doc["attribute_names"]),
        included_mask=np.asarray(doc["included_mask"], dtype=bool),
        graph=graph,
        clustering=clustering,
    )


def write_layout_json(snapshot: Snapshot, path: str | Path) -> None:
    Path(path).write_text(json.dumps(export_layout(snapshot), indent=1), encoding="utf-8")


def read_layout_json(path: str | Path) -> Snapshot:
    return import_layout(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# SVG rendering


@dataclass(frozen=True)
class SvgStyle:
    width: int = 960
    height: int = 720
    margin: float = 48.0
    edge_kind: str = "straight"
    color_by: str = "cluster"  # "cluster" or an attribute name
    size_by: str | None = None  # "degree" | "in_degree" | "out_degree" | attribute name
    show_axes: bool = False
    show_arrowheads: bool = False
    show_labels: bool = False
    node_radius: float = 4.0
    offset_spacing: float | None = None  # data units; None = 1% of extent
    edge_filter: EdgeFilter | None = None
    scheme_index: int | None = None  # None = clustering's own scheme


def _fit_transform(positions: np.ndarray, width: float, height: float,
                   margin: float) -> tuple[float, np.ndarray]:
    """Scale + offset mapping data space into the SVG viewport (y flipped)."""
    if positions.size == 0:
        return 1.0, np.array([width / 2, height / 2])
    lo = positions.min(axis=0)
    hi = positions.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    scale = min((width - 2 * margin) / span[0], (height - 2 * margin) / span[1])
    center = (lo + hi) / 2.0
    offset = np.array([width / 2, height / 2]) - np.array([1.0, -1.0]) * center * scale
    return float(scale), offset


def _to_screen(pt: Sequence[float], scale: float, offset: np.ndarray) -> tuple[float, float]:
    return (float(pt[0] * scale + offset[0]), float(-pt[1] * scale + offset[1]))


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _glyph(shape: str, x: float, y: float, r: float, fill: str, title: str,
           label: str | None) -> str:
    common = f'fill="{fill}" stroke="#333" stroke-width="0.5"'
    if shape == "square":
        body = (f'<rect class="node" x="{_fmt(x - r)}" y="{_fmt(y - r)}" '
                f'width="{_fmt(2 * r)}" height="{_fmt(2 * r)}" {common}>'
                f'<title>{title}</title></rect>')
    elif shape == "triangle":
        pts = f"{_fmt(x)},{_fmt(y - r)} {_fmt(x - r)},{_fmt(y + r)} {_fmt(x + r)},{_fmt(y + r)}"
        body = (f'<polygon class="node" points="{pts}" {common}>'
                f'<title>{title}</title></polygon>')
    else:
        body = (f'<circle class="node" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" {common}>'
                f'<title>{title}</title></circle>')
    if label:
        body += (f'<text class="label" x="{_fmt(x + r + 2)}" y="{_fmt(y + 3)}" '
                 f'font-size="9">{label}</text>')
    return body


def export_svg(snapshot: Snapshot, style: SvgStyle = SvgStyle()) -> str:
    """Render the snapshot as an SVG 1.1 document.

    Nodes are colored by cluster (or by a standardized attribute's value on
    the blue-to-red ramp), shaped by cluster shape index, optionally sized by
    degree or attribute, with edge paths and optional attribute axes.
    """
    positions = snapshot.positions
    scale, offset = _fit_transform(positions, style.width, style.height, style.margin)
    layout = Layout(positions, snapshot.residual)
    extent = 2.0 * layout.half_extent()
    spacing = style.offset_spacing if style.offset_spacing is not None else max(extent, 1e-9) * 0.01

    parts: list[str] = []
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                 f'width="{style.width}" height="{style.height}" '
                 f'viewBox="0 0 {style.width} {style.height}">')
    if style.show_arrowheads and style.edge_kind == "straight":
        parts.append('<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
                     'markerWidth="6" markerHeight="6" orient="auto-start-reverse">'
                     '<path d="M 0 0 L 10 5 L 0 10 z" fill="#777"/></marker></defs>')
    parts.append(f'<rect width="{style.width}" height="{style.height}" fill="white"/>')

    cluster_index: dict[str, int] = {}
    scheme = 0
    if snapshot.clustering is not None:
        cluster_index = {c: i for i, c in enumerate(snapshot.clustering.cluster_ids)}
        scheme = (style.scheme_index if style.scheme_index is not None
                  else snapshot.clustering.color_scheme_index)

    # axes under everything else
    if style.show_axes:
        origin = _to_screen((0.0, 0.0), scale, offset)
        weights = snapshot.weights
        magnitudes = np.hypot(weights[:, 0], weights[:, 1])
        top = magnitudes.max() if magnitudes.size else 0.0
        axis_scale = 0.0 if top == 0 else 0.45 * max(extent, 1e-9) / top
        for j, name in enumerate(snapshot.attribute_names):
            if not snapshot.included_mask[j] or magnitudes[j] == 0:
                continue
            tip = _to_screen(weights[j] * axis_scale, scale, offset)
            parts.append(f'<line class="axis" x1="{_fmt(origin[0])}" y1="{_fmt(origin[1])}" '
                         f'x2="{_fmt(tip[0])}" y2="{_fmt(tip[1])}" stroke="#bbbbbb" '
                         f'stroke-width="0.6"/>')
            if magnitudes[j] >= 0.5 * top:
                parts.append(f'<text class="axis-label" x="{_fmt(tip[0])}" y="{_fmt(tip[1])}" '
                             f'font-size="8" fill="#888888">{name}</text>')

    paths = edge_paths(layout, snapshot.graph, style.edge_kind,
                       snapshot.clustering, spacing)
    if style.edge_filter is not None:
        paths = apply_edge_filter(paths, snapshot.graph, style.edge_filter)
    row_of = {node: i for i, node in enumerate(snapshot.node_ids)}
    for path in paths:
        pts = [_to_screen(p, scale, offset) for p in path.points]
        if len(pts) == 2:
            d = (f"M {_fmt(pts[0][0])} {_fmt(pts[0][1])} "
                 f"L {_fmt(pts[1][0])} {_fmt(pts[1][1])}")
        else:
            d = (f"M {_fmt(pts[0][0])} {_fmt(pts[0][1])} "
                 f"Q {_fmt(pts[1][0])} {_fmt(pts[1][1])} "
                 f"{_fmt(pts[2][0])} {_fmt(pts[2][1])}")
        if path.color_mode == "source" and snapshot.clustering is not None:
            color = palettes.cluster_color(
                cluster_index[snapshot.clustering.label_of(path.source)], scheme)
        else:
            color = palettes.NEUTRAL_EDGE
        marker = (' marker-end="url(#arrow)"'
                  if style.show_arrowheads and style.edge_kind == "straight" else "")
        parts.append(f'<path class="edge" d="{d}" fill="none" stroke="{color}" '
                     f'stroke-opacity="{_fmt(path.opacity)}" stroke-width="1"{marker}/>')

    sizes = _node_sizes(snapshot, style)
    for i, node in enumerate(snapshot.node_ids):
        x, y = _to_screen(positions[i], scale, offset)
        if style.color_by != "cluster" and snapshot.attribute_values is not None:
            j = snapshot.attribute_names.index(style.color_by)
            fill = palettes.value_color(float(snapshot.attribute_values[i, j]))
            shape = "circle"
        elif snapshot.clustering is not None:
            ci = cluster_index[snapshot.clustering.label_of(node)]
            fill = palettes.cluster_color(ci, scheme)
            shape = palettes.cluster_shape(ci)
        else:
            fill, shape = "#4477aa", "circle"
        label = node if style.show_labels else None
        parts.append(_glyph(shape, x, y, sizes[i], fill, node, label))

    parts.append("</svg>")
    return "\n".join(parts)


def _node_sizes(snapshot: Snapshot, style: SvgStyle) -> np.ndarray:
    n = len(snapshot.node_ids)
    base = style.node_radius
    if style.size_by is None:
        return np.full(n, base)
    if style.size_by in ("degree", "in_degree", "out_degree"):
        degs = degrees(snapshot.graph)
        key = {"degree": 2, "in_degree": 0, "out_degree": 1}[style.size_by]
        raw = np.array([degs[node][key] for node in snapshot.node_ids], dtype=float)
    else:
        if snapshot.attribute_values is None:
            raise GeometryError("attribute sizing requires attribute values")
        j = snapshot.attribute_names.index(style.size_by)
        raw = snapshot.attribute_values[:, j].astype(float)
    top = raw.max()
    norm = raw / top if top > 0 else np.zeros(n)
    return base * (0.5 + 1.5 * norm)
