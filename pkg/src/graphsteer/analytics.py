"""Interpretive layer linking the projection back to attributes.

Significance rows expose the per-attribute x/y weights of the current
projection; selection comparison contrasts attribute means and non-zero
counts between a node selection and the whole dataset; attribute exclusion
produces a reduced view; adjacency augmentation turns incoming edges into
extra binary attribute columns.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .dataset import ADJACENCY_PREFIX, AttributeMatrix, DatasetError, Graph


@dataclass(frozen=True)
class SignificanceRow:
    attribute_name: str
    x_weight: float
    y_weight: float
    magnitude: float
    included: bool


@dataclass(frozen=True)
class AttributeComparison:
    attribute_name: str
    overall_mean: float
    selection_mean: float
    nonzero_count: int
    selection_nonzero_count: int


def significance_table(weights: np.ndarray, attribute_names: Sequence[str],
                       included_mask: np.ndarray) -> list[SignificanceRow]:
    """One row per attribute, in attribute order; excluded rows carry zeros."""
    if weights.shape[0] != len(attribute_names):
        raise DatasetError("projection rows do not match attribute names")
    rows = []
    for j, name in enumerate(attribute_names):
        included = bool(included_mask[j])
        x, y = (float(weights[j, 0]), float(weights[j, 1])) if included else (0.0, 0.0)
        rows.append(SignificanceRow(name, x, y, math.hypot(x, y), included))
    return rows


def significance_csv(rows: Iterable[SignificanceRow]) -> str:
    """Stable tabular form of the significance panel."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["attribute", "x_weight", "y_weight", "magnitude", "included"])
    for r in rows:
        writer.writerow([r.attribute_name, repr(r.x_weight), repr(r.y_weight),
                         repr(r.magnitude), int(r.included)])
    return buf.getvalue()


def compare_selection(X: AttributeMatrix, node_ids: Sequence[str],
                      selection: Iterable[str]) -> list[AttributeComparison]:
    """Overall vs selection mean and non-zero count, per attribute."""
    selected = set(selection)
    if not selected:
        raise DatasetError("selection is empty")
    unknown = selected - set(node_ids)
    if unknown:
        raise DatasetError(f"unknown node ids in selection: {sorted(unknown)}")
    rows_sel = [i for i, node in enumerate(node_ids) if node in selected]
    values = X.values
    sub = values[rows_sel]
    out = []
    for j, name in enumerate(X.attribute_names):
        out.append(AttributeComparison(
            attribute_name=name,
            overall_mean=float(values[:, j].mean()),
            selection_mean=float(sub[:, j].mean()),
            nonzero_count=int(np.count_nonzero(values[:, j])),
            selection_nonzero_count=int(np.count_nonzero(sub[:, j])),
        ))
    return out


def comparison_csv(rows: Iterable[AttributeComparison]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["attribute", "overall_mean", "selection_mean",
                     "nonzero_count", "selection_nonzero_count"])
    for r in rows:
        writer.writerow([r.attribute_name, repr(r.overall_mean), repr(r.selection_mean),
                         r.nonzero_count, r.selection_nonzero_count])
    return buf.getvalue()


def exclude_attributes(X: AttributeMatrix, names: Iterable[str]) -> AttributeMatrix:
    """Clear the inclusion mask for ``names``; at least 2 must stay included."""
    to_drop = set(names)
    unknown = to_drop - set(X.attribute_names)
    if unknown:
        raise DatasetError(f"unknown attributes: {sorted(unknown)}")
    mask = np.array(X.included_mask, dtype=bool)
    for j, name in enumerate(X.attribute_names):
        if name in to_drop:
            mask[j] = False
    if mask.sum() < 2:
        raise DatasetError("removal would leave fewer than 2 included attributes")
    return X.with_mask(mask)


def include_attributes(X: AttributeMatrix, names: Iterable[str]) -> AttributeMatrix:
    """Re-set the inclusion mask for ``names``."""
    to_add = set(names)
    unknown = to_add - set(X.attribute_names)
    if unknown:
        raise DatasetError(f"unknown attributes: {sorted(unknown)}")
    mask = np.array(X.included_mask, dtype=bool)
    for j, name in enumerate(X.attribute_names):
        if name in to_add:
            mask[j] = True
    return X.with_mask(mask)


def augment_with_adjacency(X: AttributeMatrix, graph: Graph,
                           min_in_degree: int = 0) -> AttributeMatrix:
    """Append one binary column per node whose in-degree exceeds the threshold.

    Column ``adj:<j>`` has a 1 in row i iff an edge i->j exists; parallel
    edges count once, both for the column values and for the in-degree
    threshold, so a threshold of 1 guarantees every appended column has at
    least two non-zero entries. ``min_in_degree`` of -1 admits every node
    (the edges-only recipe, combined with masking out the original columns).
    Original columns are carried over unchanged.
    """
    if min_in_degree < -1:
        raise DatasetError("min_in_degree must be >= -1")
    if X.n != len(graph.nodes):
        raise DatasetError("graph nodes do not align with attribute rows")
    row_of = {node: i for i, node in enumerate(graph.nodes)}
    sources: dict[str, set[str]] = {node: set() for node in graph.nodes}
    for e in graph.edges:
        sources[e.target].add(e.source)
    qualifying = [node for node in graph.nodes if len(sources[node]) > min_in_degree]
    if not qualifying:
        return X
    extra = np.zeros((X.n, len(qualifying)))
    for j, node in enumerate(qualifying):
        for src in sources[node]:
            extra[row_of[src], j] = 1.0
    names = X.attribute_names + tuple(f"{ADJACENCY_PREFIX}{node}" for node in qualifying)
    values = np.column_stack([X.values, extra])
    mask = np.concatenate([X.included_mask, np.ones(len(qualifying), dtype=bool)])
    return AttributeMatrix(values, names, mask)


def attribute_only_names(X: AttributeMatrix) -> list[str]:
    """Names of the original (non-adjacency) attribute columns."""
    return [n for n in X.attribute_names if not n.startswith(ADJACENCY_PREFIX)]
