"""Read-only JSON API over the search pipeline.

Two endpoints: /api/search runs the full query path and returns the result
page payload; /api/doc/{doc_id} returns document metadata for thumbnail
geometry (full text only when the deployment allows it). The service holds
immutable artifacts loaded at startup and keeps no per-request state, so
identical requests get identical responses for a fixed artifact set.

Every response carries an X-Artifact-Version header naming the index and
model builds by content hash, so a client can detect artifact swaps.
"""

from __future__ import annotations

import logging
import uuid

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import EngineConfig, MODE_EXPLAINABLE, MODE_REGULAR, SERP_MODES
from .manifest import sha256_file
from .pipeline import SearchEngine, UnanswerableQueryError

log = logging.getLogger(__name__)


def artifact_version(cfg: EngineConfig) -> str:
    """Short content hashes of the loaded index and model files."""
    parts = []
    for name, path in (("index", cfg.artifacts.index), ("model", cfg.artifacts.model)):
        if path:
            parts.append(f"{name}:{sha256_file(path)[:12]}")
    return " ".join(parts) if parts else "unversioned"


def create_app(
    cfg: EngineConfig | None = None,
    engine: SearchEngine | None = None,
    version: str | None = None,
) -> FastAPI:
    """Build the service around an engine.

    Normally called with a config, which loads all artifacts; tests may
    pass a prebuilt engine and version string directly.
    """
    if engine is None:
        if cfg is None:
            raise ValueError("create_app needs a config or a prebuilt engine")
        engine = SearchEngine.from_config(cfg)
    if version is None:
        version = artifact_version(cfg) if cfg is not None else "unversioned"
    default_mode = cfg.service.default_mode if cfg is not None else MODE_EXPLAINABLE
    serve_text = cfg.service.serve_text if cfg is not None else False
    origins = list(cfg.service.cors_origins) if cfg is not None else ["*"]

    app = FastAPI(title="searchlight", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=origins,
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def add_version_header(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Artifact-Version"] = version
        return response

    @app.get("/api/search")
    def search(q: str = Query(default=""), mode: str | None = Query(default=None)):
        mode = default_mode if mode is None else mode
        if mode not in SERP_MODES:
            return JSONResponse(
                status_code=400,
                content={"error": f"mode must be one of {list(SERP_MODES)}"},
            )
        if not q.strip():
            return JSONResponse(status_code=400, content={"error": "empty query"})
        try:
            payload = engine.search(q)
        except UnanswerableQueryError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except Exception:
            incident = uuid.uuid4().hex
            log.exception("search failed (incident %s)", incident)
            return JSONResponse(
                status_code=500,
                content={"error": "internal error", "incident_id": incident},
            )
        return payload.to_json_dict(mode)

    @app.get("/api/doc/{doc_id}")
    def doc(doc_id: str):
        if doc_id not in engine.store:
            return JSONResponse(status_code=404, content={"error": f"unknown document {doc_id!r}"})
        record = engine.store.get(doc_id)
        body = {
            "doc_id": record.doc_id,
            "title": record.title or record.doc_id,
            "char_length": len(record.body),
        }
        if serve_text:
            body["text"] = record.body
        return body

    @app.get("/api/health")
    def health():
        return {"status": "ok", "documents": len(engine.store)}

    if cfg is not None and cfg.service.ui_dir:
        app.mount("/", StaticFiles(directory=cfg.service.ui_dir, html=True), name="ui")

    return app
