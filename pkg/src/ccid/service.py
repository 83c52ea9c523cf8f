"""HTTP service: denoising sessions with fused views on demand.

A session is created by uploading a noisy image (plus optional ground
truth, a precomputed deep output, and an external confidence map) and
holds the reliable and deep planes in memory. Fused views, confidence
overlays, and metrics are then pure GETs parameterized by (mode, w,
confidence source), cached per parameter tuple, and bit-identical to what
the command-line harness writes for the same inputs. At most max_sessions
sessions are kept, evicted least-recently-used.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Query, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse, RedirectResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image

from .confidence import (
    ConfidenceMap,
    confidence_from_text,
    format_confidence,
    ground_truth_confidence,
    load_default_model,
    predict_confidence,
    region_features,
    render_overlay,
)
from .denoisers import DenoiserSpec, ExternalDenoiserError, apply_denoiser, parse_denoiser_spec, run_deep_denoiser
from .fusion import SCHEDULES, FusionParams, fuse
from .harness import MODE_BY_TOKEN
from .image import ImageFormatError, ImagePlane, crop, decode_image, pad_to_multiple8, quantize_u8
from .metrics import compare_8bit

MAX_UPLOAD_BYTES = 16 * 1024 * 1024
DEFAULT_MAX_SESSIONS = 16
DEFAULT_OVERLAY_THRESHOLD = 0.95

_CONFIG_KEYS = {"reliable", "deep", "wavelet", "levels", "threshold", "schedule"}


def _encode_png(plane: ImagePlane) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(quantize_u8(plane), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def _encode_rgb_png(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


@dataclass
class Session:
    id: str
    noisy: ImagePlane
    reliable: ImagePlane
    deep: ImagePlane
    truth: ImagePlane | None
    reliable_desc: str
    deep_desc: str
    params: FusionParams
    external_conf: ConfidenceMap | None = None
    conf_maps: dict = field(default_factory=dict)
    fused_cache: dict = field(default_factory=dict)
    png_cache: dict = field(default_factory=dict)

    @property
    def sources(self) -> list[str]:
        available = ["none", "model"]
        if self.truth is not None:
            available.insert(1, "oracle")
        if self.external_conf is not None:
            available.append("external")
        return available

    def plane_png(self, name: str, plane: ImagePlane) -> bytes:
        if name not in self.png_cache:
            self.png_cache[name] = _encode_png(plane)
        return self.png_cache[name]

    def confidence_map(self, source: str) -> ConfidenceMap:
        if source not in self.sources or source == "none":
            raise HTTPException(
                status_code=409,
                detail=f"confidence source {source!r} is not available for this session",
            )
        if source not in self.conf_maps:
            noisy_p = pad_to_multiple8(self.noisy)
            deep_p = pad_to_multiple8(self.deep)
            if source == "oracle":
                conf = ground_truth_confidence(pad_to_multiple8(self.truth), deep_p)
            elif source == "model":
                reliable_p = pad_to_multiple8(self.reliable)
                noise_map = ImagePlane(noisy_p.pixels - deep_p.pixels)
                features = region_features(noisy_p, reliable_p, noise_map)
                conf = predict_confidence(load_default_model(), features)
            else:
                conf = self.external_conf
            self.conf_maps[source] = conf
        return self.conf_maps[source]

    def fused(self, mode: str, w: float, conf_source: str):
        if conf_source not in ("none", "oracle", "model", "external"):
            raise HTTPException(
                status_code=400, detail=f"unknown confidence source {conf_source!r}"
            )
        if mode != "dwt-conf":
            conf_source = "none"  # confidence does not enter the other modes
        key = (mode, w, conf_source)
        if key not in self.fused_cache:
            params = FusionParams(
                w=w,
                t=self.params.t,
                mode=MODE_BY_TOKEN[mode],
                dwt_schedule=self.params.dwt_schedule,
                wavelet=self.params.wavelet,
                levels=self.params.levels,
            )
            conf = None
            if params.mode == "dwt_confidence":
                if conf_source == "none":
                    raise HTTPException(
                        status_code=400, detail="mode dwt-conf needs conf=oracle|model|external"
                    )
                conf = self.confidence_map(conf_source)
            fused_p = fuse(
                pad_to_multiple8(self.deep), pad_to_multiple8(self.reliable), params, conf
            )
            fused = crop(fused_p, self.noisy.height, self.noisy.width)
            png = _encode_png(fused)
            if self.truth is not None:
                report = compare_8bit(self.truth, fused)
                metrics = {"psnr_db": report.psnr_db, "ssim": report.ssim}
            else:
                metrics = None
            self.fused_cache[key] = (png, metrics)
        return self.fused_cache[key]


class SessionStore:
    """LRU map of session id to Session."""

    def __init__(self, max_sessions: int):
        if max_sessions < 1:
            raise ValueError("max_sessions must be at least 1")
        self.max_sessions = max_sessions
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session
            while len(self._sessions) > self.max_sessions:
                self._sessions.popitem(last=False)

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
            self._sessions.move_to_end(session_id)
            return self._sessions[session_id]

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)

    def __contains__(self, session_id: str) -> bool:
        with self._lock:
            return session_id in self._sessions


async def _read_upload(upload: UploadFile | None, what: str) -> bytes | None:
    if upload is None:
        return None
    data = await upload.read()
    if len(data) > MAX_UPLOAD_BYTES:
        raise HTTPException(status_code=413, detail=f"{what} upload exceeds 16MB")
    if not data:
        raise HTTPException(status_code=400, detail=f"{what} upload is empty")
    return data


def _decode_upload(data: bytes, what: str) -> ImagePlane:
    try:
        return decode_image(data, origin=what)
    except ImageFormatError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _parse_config(text: str | None) -> dict:
    if not text:
        return {}
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HTTPException(status_code=400, detail=f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise HTTPException(status_code=400, detail="config must be a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise HTTPException(status_code=400, detail=f"unknown config keys: {sorted(unknown)}")
    return config


def _params_from_config(config: dict) -> FusionParams:
    try:
        return FusionParams(
            w=0.5,
            t=float(config.get("threshold", 0.8)),
            dwt_schedule=config.get("schedule", "low_first"),
            wavelet=config.get("wavelet", "haar"),
            levels=config.get("levels"),
        )
    except (ValueError, TypeError) as exc:
        raise HTTPException(status_code=400, detail=f"bad fusion config: {exc}") from exc


def _parse_query_weight(w: float) -> float:
    if not 0.0 <= w <= 1.0:
        raise HTTPException(status_code=400, detail=f"w must lie in [0,1], got {w}")
    return w


def _parse_query_mode(mode: str) -> str:
    if mode not in MODE_BY_TOKEN:
        raise HTTPException(
            status_code=400, detail=f"unknown mode {mode!r} (expected dct, dwt, or dwt-conf)"
        )
    return mode


def create_app(
    max_sessions: int = DEFAULT_MAX_SESSIONS, frontend_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI(title="ccid service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Psnr-Db", "X-Ssim"],
    )
    store = SessionStore(max_sessions)
    app.state.store = store

    @app.post("/sessions", status_code=201)
    async def create_session(
        noisy: UploadFile = File(...),
        truth: UploadFile | None = File(None),
        deep: UploadFile | None = File(None),
        cmap: UploadFile | None = File(None),
        config: str | None = Form(None),
    ):
        noisy_plane = _decode_upload(await _read_upload(noisy, "noisy"), "noisy")
        if noisy_plane.height < 8 or noisy_plane.width < 8:
            raise HTTPException(status_code=422, detail="noisy image must be at least 8x8")

        cfg = _parse_config(config)
        params = _params_from_config(cfg)
        try:
            reliable_spec = parse_denoiser_spec(cfg.get("reliable", "gaussian:4"))
            deep_spec = parse_denoiser_spec(cfg.get("deep", "mock:identity"))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

        truth_plane = None
        truth_data = await _read_upload(truth, "truth")
        if truth_data is not None:
            truth_plane = _decode_upload(truth_data, "truth")
            if truth_plane.shape != noisy_plane.shape:
                raise HTTPException(
                    status_code=422,
                    detail=f"truth is {truth_plane.height}x{truth_plane.width}, "
                    f"noisy is {noisy_plane.height}x{noisy_plane.width}",
                )

        deep_data = await _read_upload(deep, "deep")
        if deep_data is not None:
            deep_plane = _decode_upload(deep_data, "deep")
            if deep_plane.shape != noisy_plane.shape:
                raise HTTPException(
                    status_code=422,
                    detail=f"deep is {deep_plane.height}x{deep_plane.width}, "
                    f"noisy is {noisy_plane.height}x{noisy_plane.width}",
                )
            deep_desc = "uploaded"
        else:
            try:
                deep_plane, _ = run_deep_denoiser(deep_spec, noisy_plane)
            except ExternalDenoiserError as exc:
                raise HTTPException(status_code=502, detail=str(exc)[:2000]) from exc
            deep_desc = cfg.get("deep", "mock:identity")

        try:
            reliable_plane = apply_denoiser(reliable_spec, noisy_plane)
        except ExternalDenoiserError as exc:
            raise HTTPException(status_code=502, detail=str(exc)[:2000]) from exc

        external_conf = None
        cmap_data = await _read_upload(cmap, "cmap")
        if cmap_data is not None:
            try:
                external_conf = confidence_from_text(cmap_data.decode("ascii"), origin="cmap upload")
            except (UnicodeDecodeError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            padded = pad_to_multiple8(noisy_plane)
            expected = (padded.height // 8, padded.width // 8)
            if (external_conf.grid_height, external_conf.grid_width) != expected:
                raise HTTPException(
                    status_code=422,
                    detail=f"cmap grid is {external_conf.grid_height}x{external_conf.grid_width}, "
                    f"expected {expected[0]}x{expected[1]}",
                )

        session = Session(
            id=uuid.uuid4().hex[:12],
            noisy=noisy_plane,
            reliable=reliable_plane,
            deep=deep_plane,
            truth=truth_plane,
            reliable_desc=cfg.get("reliable", "gaussian:4"),
            deep_desc=deep_desc,
            params=params,
            external_conf=external_conf,
        )
        store.add(session)
        return _session_info(session)

    def _session_info(session: Session) -> dict:
        return {
            "id": session.id,
            "width": session.noisy.width,
            "height": session.noisy.height,
            "confidence_sources": session.sources,
            "reliable": session.reliable_desc,
            "deep": session.deep_desc,
            "has_truth": session.truth is not None,
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_info(store.get(session_id))

    @app.get("/sessions/{session_id}/fused")
    def get_fused(
        session_id: str,
        mode: str = Query("dct"),
        w: float = Query(0.5),
        conf: str = Query("none"),
    ):
        session = store.get(session_id)
        png, metrics = session.fused(_parse_query_mode(mode), _parse_query_weight(w), conf)
        headers = {}
        if metrics is not None:
            headers["X-Psnr-Db"] = repr(metrics["psnr_db"])
            headers["X-Ssim"] = repr(metrics["ssim"])
        return Response(content=png, media_type="image/png", headers=headers)

    @app.get("/sessions/{session_id}/confidence")
    def get_confidence(
        session_id: str,
        source: str = Query("model"),
        threshold: float = Query(DEFAULT_OVERLAY_THRESHOLD),
        format: str = Query("overlay"),
    ):
        if source not in ("oracle", "model", "external"):
            raise HTTPException(
                status_code=400,
                detail=f"unknown confidence source {source!r} (expected oracle, model, or external)",
            )
        if format not in ("overlay", "cmap"):
            raise HTTPException(status_code=400, detail=f"unknown format {format!r}")
        session = store.get(session_id)
        conf = session.confidence_map(source)
        if format == "cmap":
            return PlainTextResponse(format_confidence(conf))
        if not 0.0 < threshold < 1.0:
            raise HTTPException(status_code=400, detail=f"threshold must be in (0,1), got {threshold}")
        overlay = render_overlay(conf, threshold)
        # Crop the 8x upsampled overlay to the displayed image size.
        overlay = overlay[: session.noisy.height, : session.noisy.width]
        return Response(content=_encode_rgb_png(overlay), media_type="image/png")

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(
        session_id: str,
        mode: str = Query("dct"),
        w: float = Query(0.5),
        conf: str = Query("none"),
    ):
        session = store.get(session_id)
        if session.truth is None:
            raise HTTPException(status_code=409, detail="metrics need a ground truth upload")
        _, metrics = session.fused(_parse_query_mode(mode), _parse_query_weight(w), conf)
        return metrics

    @app.get("/sessions/{session_id}/{plane_name}")
    def get_plane(session_id: str, plane_name: str):
        if plane_name not in ("noisy", "reliable", "deep", "truth"):
            raise HTTPException(status_code=404, detail=f"unknown resource {plane_name!r}")
        session = store.get(session_id)
        plane = getattr(session, plane_name)
        if plane is None:
            raise HTTPException(status_code=404, detail="session has no ground truth")
        return Response(content=session.plane_png(plane_name, plane), media_type="image/png")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/app", StaticFiles(directory=str(frontend_dir), html=True), name="app")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse(url="/app/")

    return app
