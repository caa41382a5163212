"""Session orchestration: one mutable analysis state per dataset.

A session owns the dataset, the current clustering/projection/layout,
selection and view options, and a monotonically increasing revision. Every
targeted command (separate, drag) runs the stepped solver, publishing one
frame per step to subscribers; a newer command supersedes an in-flight solve
at the next step boundary. All commands are recorded with their exact step
counts so a log replays bit-for-bit on a fresh session.
"""

from __future__ import annotations

import itertools
import json
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TextIO

import numpy as np

from .analytics import (
    augment_with_adjacency,
    compare_selection,
    exclude_attributes,
    significance_table,
)
from .clustering import KMeansConfig, kmeans
from .dataset import (
    AttributeMatrix,
    Clustering,
    Graph,
    NodeTable,
    file_clustering,
    load_adjacency_dataset,
    load_dataset,
    standardize,
)
from .geometry import (
    EdgeFilter,
    EdgePath,
    Snapshot,
    SvgStyle,
    ViewTransform,
    apply_edge_filter,
    edge_paths,
    export_layout,
    export_svg,
)
from .projection import (
    Layout,
    ProjectionMatrix,
    ProjectionSolver,
    SolverConfig,
    TargetView,
    default_separation_radius,
    drag_target,
    pca_projection,
    simplex_target,
)


class SessionError(ValueError):
    """Raised on invalid session commands."""


@dataclass
class Frame:
    revision: int
    positions: np.ndarray
    residual: float
    converged: bool
    command: int

    def to_json(self) -> dict[str, Any]:
        return {
            "revision": self.revision,
            "positions": [[float(x), float(y)] for x, y in self.positions],
            "residual": float(self.residual),
            "converged": self.converged,
            "command": self.command,
        }


@dataclass
class EdgeOptions:
    kind: str = "straight"
    filter: EdgeFilter = field(default_factory=EdgeFilter)
    offset_spacing: float | None = None
    color_mode: str = "neutral"


class SessionEngine:
    """Holds SessionState and serializes commands against it.

    One writer at a time per session; readers snapshot state under the same
    lock so they never observe a torn (layout, revision) pair.
    """

    def __init__(self, table: NodeTable, graph: Graph,
                 solver: SolverConfig = SolverConfig(),
                 kmeans_restarts: int = 10) -> None:
        self.table = table
        self.graph = graph
        self.solver_cfg = solver
        self.kmeans_restarts = kmeans_restarts
        self.attrs: AttributeMatrix = standardize(table)
        if self.attrs.included_count < 2:
            raise SessionError("need at least 2 attribute columns")
        self.clustering: Clustering | None = file_clustering(table)
        pca = pca_projection(self.attrs)
        self.projection: ProjectionMatrix = pca.projection
        self.layout: Layout = pca.layout
        self.converged: bool = True
        self.selection: set[str] = set()
        self.view = ViewTransform()
        self.edge_options = EdgeOptions()
        self.revision = 1
        self.last_target: TargetView | None = None
        self.command_log: list[dict[str, Any]] = []
        self._lock = threading.RLock()
        self._command_counter = itertools.count(1)
        self._current_command = 0
        self._subscribers: list[queue.SimpleQueue] = []

    # -- construction --------------------------------------------------

    @classmethod
    def from_files(cls, nodes: str | Path | TextIO | None = None,
                   edges: str | Path | TextIO | None = None,
                   adjacency: str | Path | TextIO | None = None,
                   solver: SolverConfig = SolverConfig()) -> "SessionEngine":
        if adjacency is not None:
            if nodes is not None:
                raise SessionError("give either nodes/edges files or one adjacency file")
            table, graph = load_adjacency_dataset(adjacency)
        elif nodes is not None:
            table, graph = load_dataset(nodes, edges)
        else:
            raise SessionError("no dataset given")
        return cls(table, graph, solver)

    # -- subscriptions ---------------------------------------------------

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.SimpleQueue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _publish(self, frame: Frame) -> None:
        for q in list(self._subscribers):
            q.put(frame)

    # -- solve machinery ---------------------------------------------------

    def _run_solve(self, target: TargetView, command_id: int,
                   max_steps: int | None = None,
                   on_frame: Callable[[Frame], None] | None = None) -> dict[str, Any]:
        """Step the solver toward ``target`` until convergence or supersession."""
        with self._lock:
            solver = ProjectionSolver(self.attrs, target,
                                      warm_start=self.projection, cfg=self.solver_cfg)
            self.last_target = target
        steps = 0
        superseded = False
        while True:
            with self._lock:
                if self._current_command != command_id:
                    superseded = True
                    break
                converged = solver.step()
                steps += 1
                self.projection = solver.projection
                self.layout = solver.layout
                self.converged = converged
                self.revision += 1
                frame = Frame(self.revision, self.layout.positions,
                              self.layout.residual, converged, command_id)
            self._publish(frame)
            if on_frame is not None:
                on_frame(frame)
            if converged or solver.epochs >= self.solver_cfg.max_epochs:
                break
            if max_steps is not None and steps >= max_steps:
                break
        return {"steps": steps, "superseded": superseded,
                "converged": self.converged, "epochs": solver.epochs}

    def _next_command(self) -> int:
        with self._lock:
            cid = next(self._command_counter)
            self._current_command = cid
            return cid

    # -- commands ----------------------------------------------------------

    def separate(self, alpha: float, clusters: Iterable[str] | None = None,
                 radius: float | None = None, max_steps: int | None = None,
                 on_frame: Callable[[Frame], None] | None = None,
                 _record: bool = True) -> dict[str, Any]:
        """Automated cluster separation toward the k-gon vertices."""
        clusters = sorted(set(clusters)) if clusters is not None else None
        with self._lock:
            if self.clustering is None:
                raise SessionError("no clustering; run k-means or supply a cluster column")
            resolved_radius = (default_separation_radius(self.layout)
                               if radius is None else float(radius))
            target = simplex_target(self.layout, self.clustering, alpha,
                                    resolved_radius, self.table.ids, clusters)
        cid = self._next_command()
        outcome = self._run_solve(target, cid, max_steps, on_frame)
        if _record:
            self._record({"op": "separate", "alpha": alpha, "clusters": clusters,
                          "radius": resolved_radius, "steps": outcome["steps"]})
        return outcome

    def drag(self, selection: Iterable[str], displacement: Sequence[float],
             max_steps: int | None = None,
             on_frame: Callable[[Frame], None] | None = None,
             _record: bool = True) -> dict[str, Any]:
        """Translate the selected nodes' targets and re-solve."""
        selection = list(selection)
        with self._lock:
            target = drag_target(self.layout, selection, displacement, self.table.ids)
        cid = self._next_command()
        outcome = self._run_solve(target, cid, max_steps, on_frame)
        if _record:
            self._record({"op": "drag", "selection": sorted(selection),
                          "displacement": [float(displacement[0]), float(displacement[1])],
                          "steps": outcome["steps"]})
        return outcome

    def set_clusters(self, k: int, rng_seed: int | None = None,
                     max_steps: int | None = None,
                     _record: bool = True) -> Clustering:
        """Run k-means over the included attributes and adopt the result."""
        seed = self.solver_cfg.rng_seed if rng_seed is None else rng_seed
        cfg = KMeansConfig(k=k, rng_seed=seed, restarts=self.kmeans_restarts)
        with self._lock:
            clustering = kmeans(self.attrs, self.table.ids, cfg)
            self.clustering = clustering
            self.revision += 1
        outcome = self._resolve_to_last_target(max_steps)
        if _record:
            self._record({"op": "cluster", "k": k, "rng_seed": seed,
                          "steps": outcome["steps"]})
        return clustering

    def exclude(self, names: Iterable[str], max_steps: int | None = None,
                _record: bool = True) -> dict[str, Any]:
        """Remove attributes from the projection and re-solve with warm start."""
        names = sorted(set(names))
        with self._lock:
            self.attrs = exclude_attributes(self.attrs, names)
            weights = np.array(self.projection.weights)
            weights[~self.attrs.included_mask] = 0.0
            self.projection = ProjectionMatrix(weights)
            self.revision += 1
        outcome = self._resolve_to_last_target(max_steps)
        if _record:
            self._record({"op": "exclude", "names": names, "steps": outcome["steps"]})
        return outcome

    def augment_adjacency(self, min_in_degree: int = 1, edges_only: bool = False,
                          max_steps: int | None = None,
                          _record: bool = True) -> dict[str, Any]:
        """Append incoming-edge indicator columns; optionally mask originals."""
        with self._lock:
            original = self.attrs.attribute_names
            augmented = augment_with_adjacency(self.attrs, self.graph, min_in_degree)
            if edges_only:
                mask = np.array(augmented.included_mask)
                for j, name in enumerate(augmented.attribute_names):
                    if name in original:
                        mask[j] = False
                if mask.sum() < 2:
                    raise SessionError("fewer than 2 adjacency columns; cannot go edges-only")
                augmented = augmented.with_mask(mask)
            self.attrs = augmented
            old = self.projection.weights
            weights = np.zeros((augmented.p, 2))
            weights[:old.shape[0]] = old
            weights[~augmented.included_mask] = 0.0
            self.projection = ProjectionMatrix(weights)
            self.revision += 1
        outcome = self._resolve_to_last_target(max_steps)
        if _record:
            self._record({"op": "augment", "min_in_degree": min_in_degree,
                          "edges_only": edges_only, "steps": outcome["steps"]})
        return outcome

    def _resolve_to_last_target(self, max_steps: int | None = None) -> dict[str, Any]:
        """Re-solve toward the previous target (defaulting to the current view)."""
        with self._lock:
            target = self.last_target
            if target is None:
                target = TargetView(np.array(self.layout.positions))
        cid = self._next_command()
        return self._run_solve(target, cid, max_steps)

    def set_selection(self, selection: Iterable[str], _record: bool = True) -> None:
        ids = set(selection)
        unknown = ids - set(self.table.ids)
        if unknown:
            raise SessionError(f"unknown node ids: {sorted(unknown)}")
        with self._lock:
            self.selection = ids
            self.revision += 1
        if _record:
            self._record({"op": "selection", "selection": sorted(ids)})

    def set_view(self, pan: Sequence[float], zoom: float) -> None:
        with self._lock:
            self.view = ViewTransform((float(pan[0]), float(pan[1])), float(zoom))
            self.revision += 1

    def set_edge_options(self, kind: str | None = None,
                         flt: EdgeFilter | None = None,
                         color_mode: str | None = None,
                         offset_spacing: float | None = None) -> None:
        with self._lock:
            if kind is not None:
                self.edge_options.kind = kind
            if flt is not None:
                self.edge_options.filter = flt
            if color_mode is not None:
                self.edge_options.color_mode = color_mode
            if offset_spacing is not None:
                self.edge_options.offset_spacing = offset_spacing
            self.revision += 1

    def _record(self, entry: dict[str, Any]) -> None:
        with self._lock:
            self.command_log.append(entry)

    # -- getters -----------------------------------------------------------

    def state(self) -> dict[str, Any]:
        with self._lock:
            clustering = None
            if self.clustering is not None:
                clustering = {
                    "cluster_ids": list(self.clustering.cluster_ids),
                    "assignment": [self.clustering.assignment[n] for n in self.table.ids],
                    "color_scheme_index": self.clustering.color_scheme_index,
                }
            return {
                "revision": self.revision,
                "n": self.table.n,
                "p": self.attrs.p,
                "node_ids": list(self.table.ids),
                "positions": [[float(x), float(y)] for x, y in self.layout.positions],
                "residual": float(self.layout.residual),
                "converged": self.converged,
                "clustering": clustering,
                "included": [bool(m) for m in self.attrs.included_mask],
                "attribute_names": list(self.attrs.attribute_names),
                "selection": sorted(self.selection),
                "edge_kind": self.edge_options.kind,
            }

    def significance(self) -> list[dict[str, Any]]:
        with self._lock:
            rows = significance_table(self.projection.weights,
                                      self.attrs.attribute_names,
                                      self.attrs.included_mask)
        return [{"attribute": r.attribute_name, "x_weight": r.x_weight,
                 "y_weight": r.y_weight, "magnitude": r.magnitude,
                 "included": r.included} for r in rows]

    def comparison(self) -> list[dict[str, Any]]:
        with self._lock:
            rows = compare_selection(self.attrs, self.table.ids, self.selection)
        return [{"attribute": r.attribute_name, "overall_mean": r.overall_mean,
                 "selection_mean": r.selection_mean, "nonzero_count": r.nonzero_count,
                 "selection_nonzero_count": r.selection_nonzero_count} for r in rows]

    def edges(self, kind: str | None = None,
              flt: EdgeFilter | None = None) -> list[EdgePath]:
        with self._lock:
            kind = kind or self.edge_options.kind
            flt = flt if flt is not None else self.edge_options.filter
            spacing = self.edge_options.offset_spacing
            if spacing is None:
                spacing = max(2.0 * self.layout.half_extent(), 1e-9) * 0.01
            paths = edge_paths(self.layout, self.graph, kind, self.clustering,
                               spacing, self.edge_options.color_mode)
            return apply_edge_filter(paths, self.graph, flt)

    def snapshot(self) -> Snapshot:
        with self._lock:
            return Snapshot(
                node_ids=self.table.ids,
                positions=np.array(self.layout.positions),
                residual=float(self.layout.residual),
                weights=np.array(self.projection.weights),
                attribute_names=self.attrs.attribute_names,
                included_mask=np.array(self.attrs.included_mask),
                graph=self.graph,
                clustering=self.clustering,
                attribute_values=np.array(self.attrs.values),
            )

    def export(self, fmt: str = "json", style: SvgStyle | None = None) -> str:
        snap = self.snapshot()
        if fmt == "json":
            return json.dumps(export_layout(snap), indent=1)
        if fmt == "svg":
            style = style or SvgStyle(edge_kind=self.edge_options.kind,
                                      edge_filter=self.edge_options.filter)
            return export_svg(snap, style)
        raise SessionError(f"unknown export format {fmt!r}")

    # -- replay --------------------------------------------------------------

    def replay(self, log: Iterable[dict[str, Any]]) -> None:
        """Re-run a recorded command log with exact step counts."""
        for entry in log:
            op = entry["op"]
            if op == "separate":
                self.separate(entry["alpha"], entry["clusters"], entry["radius"],
                              max_steps=entry["steps"], _record=False)
            elif op == "drag":
                self.drag(entry["selection"], entry["displacement"],
                          max_steps=entry["steps"], _record=False)
            elif op == "cluster":
                self.set_clusters(entry["k"], entry["rng_seed"],
                                  max_steps=entry["steps"], _record=False)
            elif op == "exclude":
                self.exclude(entry["names"], max_steps=entry["steps"], _record=False)
            elif op == "augment":
                self.augment_adjacency(entry["min_in_degree"], entry["edges_only"],
                                       max_steps=entry["steps"], _record=False)
            elif op == "selection":
                self.set_selection(entry["selection"], _record=False)
            else:
                raise SessionError(f"unknown log op {op!r}")
