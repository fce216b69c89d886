"""HTTP session service: upload an image, adjust segmentation, place
border curves, read results.  One analysis pipeline is shared with the
CLI, so both front ends produce identical numbers for identical inputs.

Sessions persist in a store directory (originals plus a session
document per session) and survive restarts.  Mutations recompute the
cached result synchronously under a per-session lock before returning;
reads only ever see committed snapshots.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import documents
from .errors import DocumentError, ImageLoadError, SessionNotFoundError
from .fsio import atomic_write_bytes
from .geometry import QuadraticBezier, REJECTED
from .imaging import RasterImage, encode_png, load_image_bytes
from .pipeline import AnalysisConfig, AnalysisResult, analyze_image, render_result

_CONTENT_TYPES = {"image/png": ".png", "image/tiff": ".tif"}

PREVIEW_LAYERS = ("original", "mask", "annotated")


@dataclass
class Session:
    id: str
    image: RasterImage
    image_file: str
    config: AnalysisConfig
    curves: list[QuadraticBezier]
    revision: int
    result: AnalysisResult
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Directory-backed session registry, safe for concurrent handlers."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    def create(self, image_bytes: bytes, content_type: str) -> Session:
        image = load_image_bytes(image_bytes, source="upload")
        session_id = secrets.token_hex(8)
        config = AnalysisConfig()
        result = analyze_image(image, config)
        image_file = "image" + _CONTENT_TYPES[content_type]
        session = Session(
            id=session_id,
            image=image,
            image_file=image_file,
            config=config,
            curves=[],
            revision=1,
            result=result,
        )
        session_dir = self.root / session_id
        session_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_bytes(session_dir / image_file, image_bytes)
        self._persist(session)
        with self._registry_lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is not None:
            return session
        session = self._load(session_id)
        with self._registry_lock:
            # another handler may have loaded it concurrently; keep the first
            return self._sessions.setdefault(session_id, session)

    def _load(self, session_id: str) -> Session:
        session_dir = self.root / session_id
        doc_path = session_dir / "session.json"
        if not doc_path.is_file():
            raise SessionNotFoundError(f"no session {session_id!r}")
        doc = documents.read_document(doc_path, documents.SESSION)
        config = documents.parse_config(doc.get("config", {}))
        curves = [documents.parse_curve(entry) for entry in doc.get("curves", [])]
        image_file = doc.get("image_file", "image.png")
        image = load_image_bytes((session_dir / image_file).read_bytes(), source=str(session_dir / image_file))
        result = analyze_image(image, config, tuple(curves))
        return Session(
            id=session_id,
            image=image,
            image_file=image_file,
            config=config,
            curves=curves,
            revision=int(doc.get("revision", 1)),
            result=result,
        )

    def _persist(self, session: Session) -> None:
        payload = {
            "session": session.id,
            "revision": session.revision,
            "image_file": session.image_file,
            "config": documents.config_payload(session.config),
            "curves": [documents.curve_payload(c) for c in session.curves],
            "needs_threshold": session.result.needs_threshold,
        }
        documents.write_document(self.root / session.id / "session.json", documents.SESSION, payload)

    def mutate(self, session: Session, config: AnalysisConfig | None = None, curves: list | None = None) -> Session:
        """Apply a config/curve change, recompute, bump revision, persist."""
        with session.lock:
            new_config = config if config is not None else session.config
            new_curves = curves if curves is not None else session.curves
            session.result = analyze_image(session.image, new_config, tuple(new_curves))
            session.config = new_config
            session.curves = list(new_curves)
            session.revision += 1
            self._persist(session)
            return session


def _result_document(session: Session) -> dict:
    payload = documents.result_payload(session.result, session.curves)
    return documents.make_document(
        documents.RESULT, {"session": session.id, "revision": session.revision, **payload}
    )


def _session_document(session: Session) -> dict:
    return documents.make_document(
        documents.SESSION,
        {
            "session": session.id,
            "revision": session.revision,
            "config": documents.config_payload(session.config),
            "curves": [
                documents.outcome_payload(curve, outcome)
                for curve, outcome in zip(session.curves, session.result.curve_outcomes)
            ],
            "needs_threshold": session.result.needs_threshold,
        },
    )


def create_app(store_dir) -> FastAPI:
    store = SessionStore(store_dir)
    app = FastAPI(title="leafbite service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc.detail)})

    def _session_or_404(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except (SessionNotFoundError, DocumentError) as exc:
            raise HTTPException(404, str(exc)) from exc

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        content_type = (request.headers.get("content-type") or "").split(";")[0].strip().lower()
        if content_type not in _CONTENT_TYPES:
            raise HTTPException(415, f"unsupported content type {content_type!r}, expected image/png or image/tiff")
        body = await request.body()
        try:
            session = store.create(body, content_type)
        except ImageLoadError as exc:
            raise HTTPException(400, str(exc)) from exc
        return _result_document(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return _session_document(session)

    @app.patch("/sessions/{session_id}/config")
    async def update_config(session_id: str, request: Request):
        session = _session_or_404(session_id)
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "config body must be a JSON object") from None
        try:
            new_config = documents.parse_config(body, base=session.config)
        except DocumentError as exc:
            raise HTTPException(400, str(exc)) from exc
        store.mutate(session, config=new_config)
        return _result_document(session)

    @app.post("/sessions/{session_id}/curves")
    async def add_curve(session_id: str, request: Request):
        session = _session_or_404(session_id)
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "curve body must be a JSON object") from None
        try:
            curve = documents.parse_curve(body)
        except DocumentError as exc:
            raise HTTPException(400, str(exc)) from exc

        with session.lock:
            if session.result.needs_threshold:
                raise HTTPException(409, "set a threshold before placing curves")
            candidate = list(session.curves) + [curve]
            result = analyze_image(session.image, session.config, tuple(candidate))
            outcome = result.curve_outcomes[-1]
            if outcome.status == REJECTED:
                # in-band rejection: curve list and revision stay put
                doc = _result_document(session)
                doc["submitted_curve"] = documents.outcome_payload(curve, outcome)
                return doc
            session.result = result
            session.curves = candidate
            session.revision += 1
            store._persist(session)
            doc = _result_document(session)
            doc["submitted_curve"] = documents.outcome_payload(curve, outcome)
            return doc

    @app.delete("/sessions/{session_id}/curves/{index}")
    def remove_curve(session_id: str, index: int):
        session = _session_or_404(session_id)
        with session.lock:
            if not 0 <= index < len(session.curves):
                raise HTTPException(404, f"no curve at index {index}")
            curves = list(session.curves)
            del curves[index]
            session.result = analyze_image(session.image, session.config, tuple(curves))
            session.curves = curves
            session.revision += 1
            store._persist(session)
            return _result_document(session)

    @app.get("/sessions/{session_id}/result")
    def get_result(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return _result_document(session)

    @app.get("/sessions/{session_id}/preview")
    def get_preview(session_id: str, layer: str = "original"):
        if layer not in PREVIEW_LAYERS:
            raise HTTPException(400, f"unknown layer {layer!r}, expected one of {PREVIEW_LAYERS}")
        session = _session_or_404(session_id)
        with session.lock:
            if layer == "original":
                png = encode_png(session.image)
            elif session.result.needs_threshold:
                raise HTTPException(409, "no mask yet: set a threshold first")
            elif layer == "mask":
                png = encode_png(session.result.mask)
            else:
                png = encode_png(render_result(session.image, session.result))
        return Response(content=png, media_type="image/png")

    return app
