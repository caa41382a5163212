"""Attribute-driven graph layout with steerable linear projections.

Node positions are a linear projection of standardized node attributes; the
projection is continuously re-solved toward user-supplied 2D target views
(drags or automated k-gon cluster separation), with k-means clustering,
attribute significance analytics, and grouped-edge rendering on top.
"""

from .analytics import (
    AttributeComparison,
    SignificanceRow,
    augment_with_adjacency,
    compare_selection,
    exclude_attributes,
    significance_table,
)
from .clustering import KMeansConfig, kmeans, wcss
from .dataset import (
    AttributeMatrix,
    Clustering,
    ConstantColumnWarning,
    DatasetError,
    Degree,
    Edge,
    Graph,
    NodeTable,
    degrees,
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
    cluster_centroids,
    edge_paths,
    export_layout,
    export_svg,
    import_layout,
)
from .projection import (
    Layout,
    PcaResult,
    ProjectionMatrix,
    ProjectionSolver,
    SolveResult,
    SolverConfig,
    TargetView,
    drag_target,
    instant_projection,
    pca_projection,
    simplex_target,
    simplex_vertices,
    solve_projection,
    step_projection,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeComparison",
    "AttributeMatrix",
    "Clustering",
    "ConstantColumnWarning",
    "DatasetError",
    "Degree",
    "Edge",
    "EdgeFilter",
    "EdgePath",
    "Graph",
    "KMeansConfig",
    "Layout",
    "NodeTable",
    "PcaResult",
    "ProjectionMatrix",
    "ProjectionSolver",
    "SignificanceRow",
    "Snapshot",
    "SolveResult",
    "SolverConfig",
    "SvgStyle",
    "TargetView",
    "ViewTransform",
    "apply_edge_filter",
    "augment_with_adjacency",
    "cluster_centroids",
    "compare_selection",
    "degrees",
    "drag_target",
    "edge_paths",
    "exclude_attributes",
    "export_layout",
    "export_svg",
    "import_layout",
    "instant_projection",
    "kmeans",
    "load_adjacency_dataset",
    "load_dataset",
    "pca_projection",
    "significance_table",
    "simplex_target",
    "simplex_vertices",
    "solve_projection",
    "standardize",
    "step_projection",
    "wcss",
]
