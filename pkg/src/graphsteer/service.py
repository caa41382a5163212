"""Local HTTP/JSON API exposing session engines to the browser UI.

Datasets are posted inline as CSV text. Targeted commands (separate, drag)
solve to convergence and return the final state, or stream one JSON frame
per solver step as server-sent events when ``stream`` is set. A standing
event-stream endpoint relays every frame a session produces.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from io import StringIO
from typing import Any, Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, Response, StreamingResponse
from pydantic import BaseModel

from .geometry import EdgeFilter
from .projection import SolverConfig
from .session import SessionEngine


class CreateSession(BaseModel):
    nodes_csv: str | None = None
    edges_csv: str | None = None
    adjacency_csv: str | None = None
    seed: int = 0


class SeparateCommand(BaseModel):
    alpha: float
    clusters: list[str] | None = None
    radius: float | None = None
    stream: bool = False


class DragCommand(BaseModel):
    selection: list[str]
    displacement: tuple[float, float]
    stream: bool = False


class ClusterCommand(BaseModel):
    k: int
    rng_seed: int | None = None


class ExcludeCommand(BaseModel):
    names: list[str]


class SelectionCommand(BaseModel):
    selection: list[str]


def _sse(payload: dict[str, Any]) -> str:
    return f"data: {json.dumps(payload)}\n\n"


class SessionRegistry:
    def __init__(self) -> None:
        self.sessions: dict[str, SessionEngine] = {}

    def create(self, body: CreateSession) -> str:
        engine = SessionEngine.from_files(
            nodes=StringIO(body.nodes_csv) if body.nodes_csv else None,
            edges=StringIO(body.edges_csv) if body.edges_csv else None,
            adjacency=StringIO(body.adjacency_csv) if body.adjacency_csv else None,
            solver=SolverConfig(rng_seed=body.seed),
        )
        session_id = uuid.uuid4().hex[:12]
        self.sessions[session_id] = engine
        return session_id

    def get(self, session_id: str) -> SessionEngine:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session") from None


def create_app(registry: SessionRegistry | None = None) -> FastAPI:
    app = FastAPI(title="graphsteer", version="0.1.0")
    reg = registry or SessionRegistry()
    app.state.registry = reg

    async def _bad_request(request: Request, exc: Exception) -> Response:
        return Response(content=json.dumps({"detail": str(exc)}),
                        status_code=400, media_type="application/json")

    # the domain error types all derive from ValueError
    app.add_exception_handler(ValueError, _bad_request)

    @app.post("/sessions")
    def create_session(body: CreateSession) -> dict[str, Any]:
        session_id = reg.create(body)
        return {"session_id": session_id, "state": reg.get(session_id).state()}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict[str, Any]:
        return reg.get(session_id).state()

    def _command_response(engine: SessionEngine, run, stream: bool):
        if not stream:
            outcome = run(None)
            return {"outcome": outcome, "state": engine.state()}

        def frames() -> Iterator[str]:
            q: queue.SimpleQueue = queue.SimpleQueue()
            result: dict[str, Any] = {}

            def work() -> None:
                try:
                    result["outcome"] = run(q.put)
                except ValueError as exc:
                    result["error"] = str(exc)
                finally:
                    q.put(None)

            threading.Thread(target=work, daemon=True).start()
            while True:
                frame = q.get()
                if frame is None:
                    break
                yield _sse(frame.to_json())
            if "error" in result:
                yield _sse({"done": True, "error": result["error"]})
            else:
                yield _sse({"done": True, "outcome": result["outcome"]})

        return StreamingResponse(frames(), media_type="text/event-stream")

    @app.post("/sessions/{session_id}/separate")
    def separate(session_id: str, body: SeparateCommand):
        engine = reg.get(session_id)
        return _command_response(
            engine,
            lambda cb: engine.separate(body.alpha, body.clusters, body.radius,
                                       on_frame=cb),
            body.stream)

    @app.post("/sessions/{session_id}/drag")
    def drag(session_id: str, body: DragCommand):
        engine = reg.get(session_id)
        return _command_response(
            engine,
            lambda cb: engine.drag(body.selection, body.displacement, on_frame=cb),
            body.stream)

    @app.post("/sessions/{session_id}/cluster")
    def cluster(session_id: str, body: ClusterCommand) -> dict[str, Any]:
        engine = reg.get(session_id)
        engine.set_clusters(body.k, body.rng_seed)
        return {"state": engine.state()}

    @app.post("/sessions/{session_id}/exclude")
    def exclude(session_id: str, body: ExcludeCommand) -> dict[str, Any]:
        engine = reg.get(session_id)
        outcome = engine.exclude(body.names)
        return {"outcome": outcome, "state": engine.state()}

    @app.post("/sessions/{session_id}/selection")
    def selection(session_id: str, body: SelectionCommand) -> dict[str, Any]:
        engine = reg.get(session_id)
        engine.set_selection(body.selection)
        return {"state": engine.state()}

    @app.get("/sessions/{session_id}/significance")
    def significance(session_id: str) -> dict[str, Any]:
        engine = reg.get(session_id)
        return {"revision": engine.revision, "rows": engine.significance()}

    @app.get("/sessions/{session_id}/comparison")
    def comparison(session_id: str) -> dict[str, Any]:
        engine = reg.get(session_id)
        return {"revision": engine.revision, "rows": engine.comparison()}

    @app.get("/sessions/{session_id}/edges")
    def edges(session_id: str, kind: str | None = None,
              direction: str = "all",
              unselected_opacity: float = 0.15,
              hide_unconnected: bool = False,
              min_weight: float | None = None,
              max_weight: float | None = None,
              use_selection: bool = True) -> dict[str, Any]:
        engine = reg.get(session_id)
        selection = frozenset(engine.selection) if (use_selection and engine.selection) else None
        flt = EdgeFilter(selection=selection,
                         unselected_opacity=unselected_opacity,
                         hide_unconnected=hide_unconnected,
                         direction=direction,
                         min_weight=min_weight, max_weight=max_weight)
        paths = engine.edges(kind, flt)
        return {
            "revision": engine.revision,
            "edges": [{
                "source": p.source, "target": p.target, "kind": p.kind,
                "points": [list(pt) for pt in p.points],
                "weight": p.weight, "opacity": p.opacity,
                "color_mode": p.color_mode,
            } for p in paths],
        }

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, format: str = "json"):
        engine = reg.get(session_id)
        body = engine.export(format)
        if format == "svg":
            return PlainTextResponse(body, media_type="image/svg+xml")
        return Response(content=body, media_type="application/json")

    @app.get("/sessions/{session_id}/frames")
    def frames(session_id: str, keepalive: float = 30.0) -> StreamingResponse:
        engine = reg.get(session_id)

        def stream() -> Iterator[str]:
            q = engine.subscribe()
            try:
                yield _sse({"revision": engine.revision, "subscribed": True})
                while True:
                    try:
                        frame = q.get(timeout=keepalive)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield _sse(frame.to_json())
            finally:
                engine.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


app = create_app()
