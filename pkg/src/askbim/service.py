"""HTTP service exposing the query pipeline.

Endpoints:
  POST /api/query {"text": ...}          -> QueryResponse
  GET  /api/models                       -> model census
  GET  /api/schema/graph                 -> schema graph as xgml
  GET  /api/dictionary/resolve?word=...  -> concept record
  GET  /api/responses/{id}               -> recently served response

Errors: 400 for bad requests, 404 for unknown resources, 422 for pipeline
failures (body carries the failing stage). The model, dictionary and graph
are immutable shared state; requests run concurrently.
"""

import threading
from collections import OrderedDict
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import graph as graphmod
from .errors import AskbimError, ConceptNotFoundError
from .pipeline import PipelineError

RESPONSE_CACHE_SIZE = 32


class QueryBody(BaseModel):
    text: str = ""
    prejoin: bool = False
    plan_only: bool = False


class ResponseCache:
    """Keeps the last N responses addressable by id for the console."""

    def __init__(self, size=RESPONSE_CACHE_SIZE):
        self.size = size
        self._items = OrderedDict()
        self._lock = threading.Lock()

    def put(self, response):
        with self._lock:
            self._items[response.id] = response
            self._items.move_to_end(response.id)
            while len(self._items) > self.size:
                self._items.popitem(last=False)

    def get(self, response_id):
        with self._lock:
            return self._items.get(response_id)


def create_app(engine, static_dir=None):
    app = FastAPI(title="askbim", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    cache = ResponseCache()

    @app.post("/api/query")
    def query(body: QueryBody):
        if not body.text or not body.text.strip():
            return JSONResponse(status_code=400,
                                content={"error": "query text is required"})
        try:
            response = engine.query(body.text, use_prejoin=body.prejoin,
                                    plan_only=body.plan_only)
        except PipelineError as exc:
            return JSONResponse(status_code=422, content={
                "error": str(exc), "stage": exc.stage,
                "suggestions": exc.suggestions})
        except AskbimError as exc:
            return JSONResponse(status_code=422, content={
                "error": str(exc), "stage": exc.stage, "suggestions": []})
        cache.put(response)
        return JSONResponse(content=response.to_json())

    @app.get("/api/models")
    def models():
        return {"models": [{
            "name": engine.model.name,
            "census": engine.model.census(),
            "partitions": engine.model.partition_count,
            "blobs": len(engine.model.blobs),
            "report": engine.model.report,
        }]}

    @app.get("/api/schema/graph")
    def schema_graph():
        return PlainTextResponse(graphmod.export_xgml(engine.graph),
                                 media_type="application/xml")

    @app.get("/api/dictionary/resolve")
    def resolve(word: str = ""):
        if not word:
            return JSONResponse(status_code=400,
                                content={"error": "word parameter is required"})
        try:
            concept = engine.dictionary.resolve_concept(word)
        except ConceptNotFoundError as exc:
            return JSONResponse(status_code=404, content={
                "error": str(exc), "stage": "map",
                "suggestions": exc.suggestions})
        return {"word": word,
                "normalized": engine.dictionary.normalize(word),
                "concept": concept.to_json()}

    @app.get("/api/responses/{response_id}")
    def cached_response(response_id: str):
        response = cache.get(response_id)
        if response is None:
            return JSONResponse(status_code=404, content={
                "error": f"response {response_id} is no longer cached "
                         "(only the last 32 are kept); resubmit the query"})
        return JSONResponse(content=response.to_json())

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="console")
    return app


def serve(engine, host="127.0.0.1", port=8008, static_dir=None):
    import uvicorn

    app = create_app(engine, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
