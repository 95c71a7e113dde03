"""Session-oriented HTTP service exposing the grading pipeline.

Uploads are raw-body PUTs: a ZIP of numbered PNG frames (``application/zip``)
or, for the reference, a single PNG image. Graded frames are derived on
demand from the persisted input frames and LUT stack, cached in memory per
(revision, frame index). Mutations on one session are serialized by a
per-session lock; different sessions never contend.
"""

from __future__ import annotations

import io
import threading
import zipfile
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request, Response

from ..errors import (
    ClipIOError,
    GradeforgeError,
    InvalidArgumentError,
    UnmatchablePromptError,
)
from ..frames import (
    VideoClip,
    frame_from_png_bytes,
    frame_to_png_bytes,
    sample_indices,
    select_key_frames,
)
from ..lut import write_cube
from ..retouch import RetouchCatalog, apply_feedback, toy_retouch_catalog
from ..session import STATUS_GRADED, STATUS_LOADED, GradingSession
from .store import SessionStore, UnknownSessionError


@dataclass
class ServiceConfig:
    store_path: str = "gradeforge-store"
    checkpoint_path: Optional[str] = None
    catalog_dir: Optional[str] = None
    sample_steps: int = 25
    preview_cache_frames: int = 128
    workers: int = 2
    key_frame_sample_hz: float = 1.0


class _PreviewCache:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self._data: OrderedDict[tuple, bytes] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: tuple) -> Optional[bytes]:
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return None

    def put(self, key: tuple, value: bytes) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)


class GradingService:
    """Shared state behind the HTTP surface."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = SessionStore(config.store_path)
        self.catalog: RetouchCatalog = (
            RetouchCatalog.load(config.catalog_dir)
            if config.catalog_dir
            else toy_retouch_catalog()
        )
        self._engine = None
        self._engine_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self.previews = _PreviewCache(config.preview_cache_frames)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def engine(self):
        """Lazy-loaded (params, schedule) from the configured checkpoint."""
        with self._engine_lock:
            if self._engine is None:
                path = self.config.checkpoint_path
                if not path or not Path(path).exists():
                    raise HTTPException(
                        status_code=503,
                        detail=f"model checkpoint not configured or missing: {path}",
                    )
                from ..diffusion import load_checkpoint

                self._engine = load_checkpoint(path)
            return self._engine

    def load_session(self, session_id: str) -> GradingSession:
        try:
            return self.store.load(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc


def _state_view(session: GradingSession) -> dict:
    return {
        "id": session.id,
        "status": session.status,
        "revision": session.revision,
        "input_frames": len(session.input_clip) if session.input_clip else 0,
        "reference_frames": len(session.reference_clip) if session.reference_clip else 0,
        "key_pair": (
            {
                "input_index": session.key_pair.input_index,
                "reference_index": session.key_pair.reference_index,
                "similarity": session.key_pair.similarity,
            }
            if session.key_pair
            else None
        ),
        "stack": [{"source": e.source, "name": e.name} for e in session.lut_stack],
        "history": [
            {
                "prompt": h.prompt,
                "matched": h.matched,
                "similarity": h.similarity,
                "runner_up": h.runner_up,
            }
            for h in session.history
        ],
    }


def _decode_upload(body: bytes, content_type: str, fps: float) -> VideoClip:
    if not body:
        raise HTTPException(status_code=422, detail="empty upload body")
    if body[:4] == b"PK\x03\x04":
        try:
            with zipfile.ZipFile(io.BytesIO(body)) as zf:
                names = sorted(n for n in zf.namelist() if n.lower().endswith(".png"))
                if not names:
                    raise HTTPException(
                        status_code=422, detail="archive contains no .png frames"
                    )
                frames = []
                for name in names:
                    try:
                        frames.append(frame_from_png_bytes(zf.read(name)))
                    except Exception as exc:  # noqa: BLE001
                        raise HTTPException(
                            status_code=422, detail=f"bad frame file {name!r}: {exc}"
                        ) from exc
                return VideoClip(frames, fps=fps)
        except zipfile.BadZipFile as exc:
            raise HTTPException(status_code=422, detail=f"bad zip archive: {exc}") from exc
        except InvalidArgumentError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
    # single image upload
    try:
        return VideoClip([frame_from_png_bytes(body)], fps=fps)
    except Exception as exc:  # noqa: BLE001
        raise HTTPException(
            status_code=422,
            detail=f"body is neither a zip archive nor a PNG image: {exc}",
        ) from exc


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    service = GradingService(config or ServiceConfig())
    app = FastAPI(title="gradeforge", version="0.1.0")
    app.state.service = service

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session():
        session = service.store.create()
        return _state_view(session)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return _state_view(service.load_session(session_id))

    @app.put("/sessions/{session_id}/input")
    async def upload_input(session_id: str, request: Request, fps: float = 24.0):
        body = await request.body()
        with service.session_lock(session_id):
            session = service.load_session(session_id)
            clip = _decode_upload(body, request.headers.get("content-type", ""), fps)
            service.store.replace_clip(session, "input", clip)
            return _state_view(session)

    @app.put("/sessions/{session_id}/reference")
    async def upload_reference(session_id: str, request: Request, fps: float = 24.0):
        body = await request.body()
        with service.session_lock(session_id):
            session = service.load_session(session_id)
            clip = _decode_upload(body, request.headers.get("content-type", ""), fps)
            service.store.replace_clip(session, "reference", clip)
            return _state_view(session)

    @app.post("/sessions/{session_id}/grade")
    async def grade(session_id: str):
        with service.session_lock(session_id):
            session = service.load_session(session_id)
            if session.status not in (STATUS_LOADED, STATUS_GRADED):
                raise HTTPException(
                    status_code=409,
                    detail="input and reference must be uploaded before grading",
                )
            params, sched = service.engine()
            from ..diffusion import generate_lut

            key_pair = select_key_frames(
                session.input_clip,
                session.reference_clip,
                sample_hz=service.config.key_frame_sample_hz,
            )
            lut = generate_lut(
                session.input_clip.frames[key_pair.input_index],
                session.reference_clip.frames[key_pair.reference_index],
                params,
                sched,
                steps=service.config.sample_steps,
                seed=session.seed,
            )
            session.set_graded(lut, key_pair)
            service.store.save(session)
            view = _state_view(session)
            n = len(session.input_clip)
            view["lut_id"] = "generated"
            view["preview_indices"] = sorted({0, n // 2, n - 1})
            return view

    @app.post("/sessions/{session_id}/feedback")
    async def feedback(session_id: str, payload: dict):
        prompt = payload.get("prompt", "")
        with service.session_lock(session_id):
            session = service.load_session(session_id)
            if session.status != STATUS_GRADED:
                raise HTTPException(status_code=409, detail="session is not graded yet")
            try:
                match = apply_feedback(session, prompt, service.catalog)
            except UnmatchablePromptError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            service.store.save(session)
            view = _state_view(session)
            view["matched"] = match.name
            view["similarity"] = match.similarity
            view["runner_up"] = match.runner_up
            view["runner_up_similarity"] = match.runner_up_similarity
            view["low_confidence"] = match.low_confidence
            return view

    @app.post("/sessions/{session_id}/undo")
    async def undo(session_id: str, payload: dict):
        to_index = payload.get("to_index")
        if not isinstance(to_index, int):
            raise HTTPException(status_code=422, detail="to_index must be an integer")
        with service.session_lock(session_id):
            session = service.load_session(session_id)
            try:
                session.undo(to_index)
            except InvalidArgumentError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            service.store.save(session)
            return _state_view(session)

    @app.get("/sessions/{session_id}/preview/{index}")
    async def preview(session_id: str, index: int):
        session = service.load_session(session_id)
        if session.status != STATUS_GRADED:
            raise HTTPException(status_code=409, detail="session is not graded yet")
        if not 0 <= index < len(session.input_clip):
            raise HTTPException(status_code=404, detail=f"no frame {index}")
        key = (session_id, session.revision, index)
        data = service.previews.get(key)
        if data is None:
            data = frame_to_png_bytes(session.graded_frame(index))
            service.previews.put(key, data)
        return Response(
            content=data,
            media_type="image/png",
            headers={"X-Revision": str(session.revision)},
        )

    @app.get("/sessions/{session_id}/export.cube")
    async def export_cube(session_id: str):
        session = service.load_session(session_id)
        if session.status != STATUS_GRADED:
            raise HTTPException(status_code=409, detail="session is not graded yet")
        text = write_cube(session.current_lut(), title=f"gradeforge {session_id}")
        return Response(
            content=text.encode("utf-8"),
            media_type="text/plain",
            headers={"Content-Disposition": f'attachment; filename="{session_id}.cube"'},
        )

    @app.get("/sessions/{session_id}/export")
    async def export_clip(session_id: str):
        session = service.load_session(session_id)
        if session.status != STATUS_GRADED:
            raise HTTPException(status_code=409, detail="session is not graded yet")
        graded = session.graded_clip(workers=service.config.workers)
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
            for i, frame in enumerate(graded.frames):
                zf.writestr(f"{i + 1:06d}.png", frame_to_png_bytes(frame))
            import json as _json

            zf.writestr(
                "clip.json",
                _json.dumps({"fps": graded.fps, "frame_count": len(graded)}, indent=2),
            )
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{session_id}.zip"'},
        )

    return app
