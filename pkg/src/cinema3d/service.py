"""HTTP facade for the interactive authoring UI.

Sessions hold uploaded assets in memory with a TTL; the layered scene
is built lazily once per session and shared by every preview and
render job. Previews are synchronous and carry a deterministic content
hash so clients can cache; full renders run as polled jobs. All errors
come back as {"code": ..., "message": ...}.
"""

from __future__ import annotations

import hashlib
import logging
import secrets
import tempfile
import threading
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import cv2
import numpy as np
from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import motion as motion_mod
from .assets import ColorImage, DepthMap, FlowField, decode_color, decode_depth, linear_to_srgb
from .config import TRAJECTORY_PRESETS
from .errors import AssetError
from .pipeline import preset_pose
from .renderer import RenderConfig, render_view
from .scene import Camera, LayeredScene, SceneParams, build_layered_scene, default_camera

logger = logging.getLogger(__name__)

DEFAULT_TTL_SECONDS = 30 * 60
DEFAULT_MAX_UPLOAD = 32 * 1024 * 1024


@dataclass
class Session:
    id: str
    color: ColorImage
    depth: DepthMap
    created: float
    expires: float
    ttl: float
    field: FlowField | None = None
    motion_revision: int = 0
    scene: LayeredScene | None = None
    scene_build_count: int = 0
    lock: threading.Lock = dataclass_field(default_factory=threading.Lock)


@dataclass
class RenderJob:
    id: str
    done: bool = False
    error: str | None = None
    frames: list[str] = dataclass_field(default_factory=list)
    directory: Path | None = None


class EngineState:
    def __init__(self, ttl: float, max_upload: int):
        self.ttl = ttl
        self.max_upload = max_upload
        self.sessions: dict[str, Session] = {}
        self.jobs: dict[str, RenderJob] = {}
        self.lock = threading.Lock()

    def get_session(self, session_id: str) -> Session:
        now = time.monotonic()
        with self.lock:
            session = self.sessions.get(session_id)
            if session is None or now > session.expires:
                self.sessions.pop(session_id, None)
                raise HTTPException(status_code=404, detail="unknown session")
            session.expires = now + session.ttl  # sliding expiry
            return session


def _error_response(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": status, "message": message})


def _session_scene(session: Session) -> LayeredScene:
    # One build per session asset set; hint changes never invalidate it.
    with session.lock:
        if session.scene is None:
            camera = default_camera(session.color.width, session.color.height)
            session.scene = build_layered_scene(
                session.color, session.depth, camera, SceneParams()
            )
            session.scene_build_count += 1
        return session.scene


def _parse_camera(spec, scene: LayeredScene) -> Camera:
    if spec is None:
        return scene.camera
    if not isinstance(spec, dict):
        raise HTTPException(status_code=422, detail="camera must be an object")
    if "preset" in spec:
        unknown = set(spec) - {"preset", "amplitude", "phase"}
        if unknown:
            raise HTTPException(
                status_code=422, detail=f"unknown camera keys: {sorted(unknown)}"
            )
        preset = spec["preset"]
        if preset not in TRAJECTORY_PRESETS:
            raise HTTPException(status_code=422, detail=f"unknown preset: {preset!r}")
        amplitude = float(spec.get("amplitude", 0.05))
        phase = float(spec.get("phase", 0.0))
        if amplitude < 0:
            raise HTTPException(status_code=422, detail="amplitude must be >= 0")
        return preset_pose(preset, amplitude, phase % 1.0, scene.camera, scene.depth_stats)
    if set(spec) == {"rotation", "translation"}:
        try:
            return scene.camera.with_pose(
                np.asarray(spec["rotation"], dtype=np.float64),
                np.asarray(spec["translation"], dtype=np.float64),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
    raise HTTPException(
        status_code=422, detail="camera needs 'preset' or 'rotation' + 'translation'"
    )


def _parse_render_config(spec) -> RenderConfig:
    if spec is None:
        return RenderConfig()
    if not isinstance(spec, dict):
        raise HTTPException(status_code=422, detail="render must be an object")
    unknown = set(spec) - {"mode", "radius_px", "z_window", "sharpness", "near"}
    if unknown:
        raise HTTPException(status_code=422, detail=f"unknown render keys: {sorted(unknown)}")
    try:
        return RenderConfig(
            mode=spec.get("mode", "soft"),
            radius_px=float(spec.get("radius_px", 1.0)),
            z_window=float(spec.get("z_window", 0.01)),
            sharpness=float(spec.get("sharpness", 10.0)),
            near=float(spec.get("near", 1e-3)),
        )
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _encode_frame_png(color: ColorImage) -> bytes:
    srgb = linear_to_srgb(np.clip(color.data, 0.0, 1.0))
    quantized = np.floor(srgb * 255.0 + 0.5).astype(np.uint8)
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(quantized[:, :, ::-1]))
    if not ok:
        raise HTTPException(status_code=500, detail="PNG encode failed")
    return buf.tobytes()


def create_app(
    static_dir=None,
    session_ttl: float = DEFAULT_TTL_SECONDS,
    max_upload: int = DEFAULT_MAX_UPLOAD,
) -> FastAPI:
    app = FastAPI(title="cinema3d service")
    state = EngineState(ttl=session_ttl, max_upload=max_upload)
    app.state.engine = state

    @app.exception_handler(HTTPException)
    async def handle_http_error(request: Request, exc: HTTPException):
        return _error_response(exc.status_code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return _error_response(422, str(exc.errors()))

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(image: UploadFile, depth: UploadFile, depth_scale: float = 10.0):
        image_bytes = await image.read()
        depth_bytes = await depth.read()
        if len(image_bytes) > state.max_upload or len(depth_bytes) > state.max_upload:
            raise HTTPException(status_code=413, detail="upload exceeds size limit")
        try:
            color = decode_color(image_bytes, image.filename or "image")
            depth_map = decode_depth(depth_bytes, depth_scale, depth.filename or "depth")
        except AssetError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if (color.height, color.width) != (depth_map.height, depth_map.width):
            raise HTTPException(status_code=400, detail="dimension mismatch")
        session_id = secrets.token_hex(16)
        now = time.monotonic()
        with state.lock:
            state.sessions[session_id] = Session(
                id=session_id,
                color=color,
                depth=depth_map,
                created=now,
                expires=now + state.ttl,
                ttl=state.ttl,
            )
        return {"id": session_id}

    @app.post("/sessions/{session_id}/motion")
    async def set_motion(session_id: str, request: Request):
        session = state.get_session(session_id)
        document = await request.json()
        try:
            mask, hints, speed = motion_mod.parse_hints_document(document)
            field, info = motion_mod.solve_hint_field(
                mask, hints, (session.color.width, session.color.height)
            )
            if speed != 1.0:
                field = motion_mod.scale_flow(field, speed)
        except AssetError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with session.lock:
            session.field = field
            session.motion_revision += 1
        magnitude = np.hypot(field.data[:, :, 0], field.data[:, :, 1])
        return {
            "mean_magnitude": float(magnitude.mean()),
            "max_magnitude": float(magnitude.max()),
            "iterations": info.iterations,
            "motion_revision": session.motion_revision,
        }

    @app.post("/sessions/{session_id}/preview")
    async def preview_frame(session_id: str, request: Request):
        session = state.get_session(session_id)
        body = await request.json()
        if not isinstance(body, dict):
            raise HTTPException(status_code=422, detail="preview request must be an object")
        unknown = set(body) - {"t", "N", "camera", "render"}
        if unknown:
            raise HTTPException(status_code=422, detail=f"unknown preview keys: {sorted(unknown)}")
        if session.field is None:
            raise HTTPException(status_code=409, detail="motion not set")
        try:
            t = int(body["t"])
            num_frames = int(body["N"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail="'t' and 'N' must be integers") from exc
        if num_frames < 1 or not 0 <= t <= num_frames:
            raise HTTPException(status_code=422, detail=f"need 0 <= t <= N, got t={t}, N={num_frames}")
        scene = _session_scene(session)
        camera = _parse_camera(body.get("camera"), scene)
        render_config = _parse_render_config(body.get("render"))
        frame = render_view(scene, session.field, t, num_frames, camera, render_config)
        payload = _encode_frame_png(frame.color)
        digest = hashlib.sha256(payload).hexdigest()
        return Response(
            content=payload,
            media_type="image/png",
            headers={"X-Content-Hash": digest, "ETag": f'"{digest}"'},
        )

    @app.post("/sessions/{session_id}/render")
    async def start_render(session_id: str, request: Request):
        session = state.get_session(session_id)
        body = {}
        if await request.body():
            body = await request.json()
        if not isinstance(body, dict):
            raise HTTPException(status_code=422, detail="render request must be an object")
        unknown = set(body) - {"N", "trajectory", "amplitude", "render"}
        if unknown:
            raise HTTPException(status_code=422, detail=f"unknown render keys: {sorted(unknown)}")
        if session.field is None:
            raise HTTPException(status_code=409, detail="motion not set")
        num_frames = int(body.get("N", 60))
        preset = body.get("trajectory", "sway")
        amplitude = float(body.get("amplitude", 0.05))
        if num_frames < 1:
            raise HTTPException(status_code=422, detail="N must be >= 1")
        if preset not in TRAJECTORY_PRESETS:
            raise HTTPException(status_code=422, detail=f"unknown preset: {preset!r}")
        render_config = _parse_render_config(body.get("render"))
        scene = _session_scene(session)

        job_id = secrets.token_hex(8)
        job = RenderJob(id=job_id, directory=Path(tempfile.mkdtemp(prefix="cinema3d_job_")))
        with state.lock:
            state.jobs[job_id] = job

        def run():
            try:
                field = session.field
                for k in range(num_frames):
                    camera = preset_pose(
                        preset,
                        amplitude,
                        (k % num_frames) / num_frames,
                        scene.camera,
                        scene.depth_stats,
                    )
                    frame = render_view(scene, field, k, num_frames, camera, render_config)
                    path = job.directory / f"frame_{k:05d}.png"
                    path.write_bytes(_encode_frame_png(frame.color))
                    job.frames.append(f"/jobs/{job_id}/frames/{k}")
                job.done = True
            except Exception as exc:  # surfaced through job polling
                logger.exception("render job %s failed", job_id)
                job.error = str(exc)
                job.done = True

        threading.Thread(target=run, daemon=True).start()
        return {"job": job_id}

    @app.get("/jobs/{job_id}")
    async def job_status(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        status = {"done": job.done, "frames": list(job.frames)}
        if job.error:
            status["error"] = job.error
        return status

    @app.get("/jobs/{job_id}/frames/{index}")
    async def job_frame(job_id: str, index: int):
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        path = job.directory / f"frame_{index:05d}.png"
        if not path.is_file():
            raise HTTPException(status_code=404, detail="frame not rendered yet")
        return FileResponse(path, media_type="image/png")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
