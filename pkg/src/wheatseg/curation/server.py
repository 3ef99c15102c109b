"""HTTP review API over a CurationStore.

Endpoints:
    GET  /candidates[?state=...]      list (sorted by id) with decisions
    GET  /candidates/{id}             one candidate
    GET  /candidates/{id}/image       PNG
    GET  /candidates/{id}/mask        PNG
    GET  /candidates/{id}/probmap     PNG
    POST /candidates/{id}/decision    {"decision": ..., "annotator": ...}
    GET  /stats                       decision counts
    POST /export                      {"out_dir": ...}

A browser UI, when built, is mounted at /ui and talks to these routes;
nothing in the API assumes it exists.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import DataError, NotFoundError
from .export import export_curated
from .store import Candidate, CurationStore


class DecisionRequest(BaseModel):
    decision: Literal["accepted", "rejected", "undecided"]
    annotator: str = ""


class ExportRequest(BaseModel):
    out_dir: str


def _candidate_view(store: CurationStore, cand: Candidate) -> dict:
    return {
        "id": cand.id,
        "source_id": cand.source_id,
        "model_tag": cand.model_tag,
        "auto_stats": cand.auto_stats,
        "decision": store.decision(cand.id),
        "image_url": f"/candidates/{cand.id}/image",
        "mask_url": f"/candidates/{cand.id}/mask",
        "probmap_url": f"/candidates/{cand.id}/probmap",
    }


def create_app(store: CurationStore, static_dir=None) -> FastAPI:
    app = FastAPI(title="wheatseg curation")
    write_lock = threading.Lock()

    @app.get("/candidates")
    def list_candidates(
        state: Literal["accepted", "rejected", "undecided"] | None = None,
    ) -> list[dict]:
        return [_candidate_view(store, c) for c in store.candidates(state)]

    @app.get("/candidates/{candidate_id}")
    def get_candidate(candidate_id: str) -> dict:
        try:
            return _candidate_view(store, store.get(candidate_id))
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc

    def _asset(candidate_id: str, kind: str) -> FileResponse:
        try:
            path = store.asset_path(candidate_id, kind)
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        if not path.exists():
            raise HTTPException(404, f"asset file missing: {path}")
        return FileResponse(path, media_type="image/png")

    @app.get("/candidates/{candidate_id}/image")
    def get_image(candidate_id: str) -> FileResponse:
        return _asset(candidate_id, "image")

    @app.get("/candidates/{candidate_id}/mask")
    def get_mask(candidate_id: str) -> FileResponse:
        return _asset(candidate_id, "mask")

    @app.get("/candidates/{candidate_id}/probmap")
    def get_probmap(candidate_id: str) -> FileResponse:
        return _asset(candidate_id, "probmap")

    @app.post("/candidates/{candidate_id}/decision")
    def post_decision(candidate_id: str, body: DecisionRequest) -> dict:
        try:
            with write_lock:
                store.record_decision(candidate_id, body.decision, body.annotator)
            return _candidate_view(store, store.get(candidate_id))
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc

    @app.get("/stats")
    def get_stats() -> dict:
        return store.stats()

    @app.post("/export")
    def post_export(body: ExportRequest) -> dict:
        try:
            with write_lock:
                manifest = export_curated(store, body.out_dir)
        except DataError as exc:
            raise HTTPException(400, str(exc)) from exc
        return {
            "exported": len(manifest.entries),
            "manifest": str(Path(body.out_dir) / "manifest.jsonl"),
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(store: CurationStore, host: str = "127.0.0.1", port: int = 8000, static_dir=None):
    import uvicorn

    uvicorn.run(create_app(store, static_dir), host=host, port=port, log_level="warning")
