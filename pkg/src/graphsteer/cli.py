"""Command line interface.

``graphsteer run`` executes the headless pipeline (load, standardize,
cluster, PCA, k-gon separation, solve) and writes the layout JSON, an SVG
rendering, a PNG figure, and the significance CSV next to each other.
``graphsteer serve`` starts the HTTP session service for the browser UI;
``graphsteer sample`` materializes the bundled datasets.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analytics import significance_csv, significance_table
from .geometry import SvgStyle, export_svg, write_layout_json
from .projection import SolverConfig
from .samples import BUILTIN, write_csv
from .session import SessionEngine

LARGE_SESSION_NODES = 1000
LARGE_SESSION_ATTRS = 200

ALL_FORMATS = ("json", "svg", "csv", "png")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphsteer")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="headless layout pipeline")
    run.add_argument("--nodes", help="node CSV: id[,cluster],attr_1,...")
    run.add_argument("--edges", help="edge CSV: source,target[,weight]")
    run.add_argument("--adjacency", help="combined CSV with adj:<id> columns")
    run.add_argument("--k", type=int, default=3,
                     help="k-means cluster count when the file has no cluster column")
    run.add_argument("--alpha", type=float, default=1.0,
                     help="separation strength in [0,1]")
    run.add_argument("--radius", type=float, default=None,
                     help="separation k-gon radius (default: 1.2 x layout half-extent)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--format", default="all", choices=ALL_FORMATS + ("all",))
    run.add_argument("--edge-kind", default="straight",
                     choices=("straight", "curved", "grouped"))
    run.add_argument("--min-in-degree", type=int, default=1,
                     help="in-degree threshold for adjacency augmentation")
    run.add_argument("--edges-as-attributes", action="store_true",
                     help="append incoming-edge indicator columns before solving")
    run.add_argument("--edges-only", action="store_true",
                     help="with --edges-as-attributes: mask out the original columns")

    serve = sub.add_parser("serve", help="start the HTTP session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8520)
    serve.add_argument("--frontend", default=None,
                       help="directory of built UI assets to serve at /")

    sample = sub.add_parser("sample", help="write a bundled dataset as CSV")
    sample.add_argument("name", choices=sorted(BUILTIN))
    sample.add_argument("--out", default=".", help="output directory")

    return parser


def _run(args: argparse.Namespace) -> int:
    try:
        engine = SessionEngine.from_files(nodes=args.nodes, edges=args.edges,
                                          adjacency=args.adjacency,
                                          solver=SolverConfig(rng_seed=args.seed))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if engine.table.n > LARGE_SESSION_NODES or engine.attrs.p > LARGE_SESSION_ATTRS:
        print(f"warning: {engine.table.n} nodes x {engine.attrs.p} attributes "
              "is beyond the interactive budget; batch mode only", file=sys.stderr)

    try:
        if args.edges_as_attributes:
            engine.augment_adjacency(args.min_in_degree, args.edges_only)
        if engine.clustering is None:
            engine.set_clusters(args.k, args.seed)
        engine.separate(args.alpha, radius=args.radius)

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        formats = ALL_FORMATS if args.format == "all" else (args.format,)
        snapshot = engine.snapshot()
        written = []
        if "json" in formats:
            write_layout_json(snapshot, out / "layout.json")
            written.append(out / "layout.json")
        if "svg" in formats:
            style = SvgStyle(edge_kind=args.edge_kind)
            (out / "layout.svg").write_text(export_svg(snapshot, style), encoding="utf-8")
            written.append(out / "layout.svg")
        if "png" in formats:
            from .report import render_layout_png
            render_layout_png(snapshot, out / "layout.png", edge_kind=args.edge_kind)
            written.append(out / "layout.png")
        if "csv" in formats:
            rows = significance_table(engine.projection.weights,
                                      engine.attrs.attribute_names,
                                      engine.attrs.included_mask)
            (out / "significance.csv").write_text(significance_csv(rows), encoding="utf-8")
            written.append(out / "significance.csv")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    state = engine.state()
    print(f"n={state['n']} p={state['p']} residual={state['residual']:.6g} "
          f"converged={state['converged']}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app()
    if args.frontend:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=args.frontend, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _sample(args: argparse.Namespace) -> int:
    table, graph = BUILTIN[args.name]()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    nodes_path = out / f"{args.name}_nodes.csv"
    edges_path = out / f"{args.name}_edges.csv"
    write_csv(table, graph, nodes_path, edges_path)
    print(f"wrote {nodes_path}")
    print(f"wrote {edges_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    if args.command == "serve":
        return _serve(args)
    return _sample(args)


if __name__ == "__main__":
    sys.exit(main())
